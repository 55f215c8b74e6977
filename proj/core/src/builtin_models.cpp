#include "mddest/builtin_models.hpp"

#include <cmath>
#include <stdexcept>

namespace mddest {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<std::string> numbered(const std::string& stem, int count, int from = 1) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) names.push_back(stem + std::to_string(from + i));
  return names;
}

// Builds the canonical intercept-split model from an affine m-part:
// m(z, theta2) = m_const(z) + m_design(z) * theta2 and
// h(z, theta) = (theta1; 0) + m(z, theta2).
ResidualModel affine_intercept_model(int l, int d1, int d2,
                                     std::function<Eigen::VectorXd(RowView)> m_const,
                                     std::function<Eigen::MatrixXd(RowView)> m_design) {
  if (d1 > l) throw std::invalid_argument("intercept model: d1 must not exceed l");
  ResidualModel model;
  model.l = l;
  model.d = d1 + d2;
  model.d1 = d1;
  model.m_eval = [m_const, m_design](RowView z, const Eigen::VectorXd& theta2) {
    return Eigen::VectorXd(m_const(z) + m_design(z) * theta2);
  };
  model.m_jac = [m_design](RowView z, const Eigen::VectorXd&) { return m_design(z); };
  model.eval = [m_const, m_design, l, d1, d2](RowView z, const Eigen::VectorXd& theta) {
    Eigen::VectorXd h = m_const(z) + m_design(z) * theta.tail(d2);
    h.head(d1) += theta.head(d1);
    return h;
  };
  model.jac = [m_design, l, d1, d2](RowView z, const Eigen::VectorXd&) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(l, d1 + d2);
    j.topLeftCorner(d1, d1).setIdentity();
    j.rightCols(d2) = m_design(z);
    return j;
  };
  model.affine = true;
  model.affine_const = m_const;
  model.affine_design = [m_design, l, d1, d2](RowView z) {
    Eigen::MatrixXd dsn(l, d1 + d2);
    dsn.setZero();
    dsn.topLeftCorner(d1, d1).setIdentity();
    dsn.rightCols(d2) = m_design(z);
    return dsn;
  };
  return model;
}

// No-intercept affine model h(z, theta) = c(z) + D(z) theta.
ResidualModel affine_model(int l, int d, std::function<Eigen::VectorXd(RowView)> h_const,
                           std::function<Eigen::MatrixXd(RowView)> h_design) {
  ResidualModel model;
  model.l = l;
  model.d = d;
  model.d1 = 0;
  model.eval = [h_const, h_design](RowView z, const Eigen::VectorXd& theta) {
    return Eigen::VectorXd(h_const(z) + h_design(z) * theta);
  };
  model.jac = [h_design](RowView z, const Eigen::VectorXd&) { return h_design(z); };
  model.affine = true;
  model.affine_const = h_const;
  model.affine_design = h_design;
  return model;
}

}  // namespace

ResidualModel linear_model(int r) {
  if (r < 1) throw std::invalid_argument("linear_model: need at least one regressor");
  auto c = [](RowView z) { return Eigen::VectorXd::Constant(1, z[0]); };
  auto dsn = [r](RowView z) {
    Eigen::MatrixXd out(1, r);
    out.row(0) = -z.segment(1, r);
    return out;
  };
  ResidualModel model = affine_model(1, r, c, dsn);
  model.param_names = r == 1 ? std::vector<std::string>{"theta"} : numbered("theta", r);
  return model;
}

ResidualModel linear_with_intercept(int r) {
  if (r < 1) throw std::invalid_argument("linear_with_intercept: need a regressor");
  // m = theta2' z2 - z1 so that h = alpha + m vanishes conditionally at the
  // true (alpha, theta2); the global sign flip is invisible to the
  // objectives.
  auto m_const = [](RowView z) { return Eigen::VectorXd::Constant(1, -z[0]); };
  auto m_design = [r](RowView z) {
    Eigen::MatrixXd out(1, r);
    out.row(0) = z.segment(1, r);
    return out;
  };
  ResidualModel model = affine_intercept_model(1, 1, r, m_const, m_design);
  model.param_names.push_back("intercept");
  for (auto& name : numbered("theta", r)) model.param_names.push_back(name);
  return model;
}

ResidualModel multivariate_linear(int l, int r) {
  if (l < 1 || r < 1) throw std::invalid_argument("multivariate_linear: bad dimensions");
  auto c = [l](RowView z) { return Eigen::VectorXd(z.head(l).transpose()); };
  auto dsn = [l, r](RowView z) {
    // theta stacks Gamma row by row: row i of h loses Gamma_i. z2.
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(l, l * r);
    for (int i = 0; i < l; ++i) out.block(i, i * r, 1, r) = -z.segment(l, r);
    return out;
  };
  ResidualModel model = affine_model(l, l * r, c, dsn);
  for (int i = 1; i <= l; ++i)
    for (int j = 1; j <= r; ++j)
      model.param_names.push_back("gamma" + std::to_string(i) + std::to_string(j));
  return model;
}

ResidualModel sin_index() {
  ResidualModel model;
  model.l = 1;
  model.d = 1;
  model.eval = [](RowView z, const Eigen::VectorXd& theta) {
    return Eigen::VectorXd::Constant(1, z[0] - std::sin(theta[0] * z[1]));
  };
  model.jac = [](RowView z, const Eigen::VectorXd& theta) {
    return Eigen::MatrixXd::Constant(1, 1, -std::cos(theta[0] * z[1]) * z[1]);
  };
  model.param_names = {"theta"};
  return model;
}

ResidualModel sigmoid_index() {
  ResidualModel model;
  model.l = 1;
  model.d = 1;
  model.eval = [](RowView z, const Eigen::VectorXd& theta) {
    return Eigen::VectorXd::Constant(1, z[0] - sigmoid(theta[0] * z[1]));
  };
  model.jac = [](RowView z, const Eigen::VectorXd& theta) {
    double s = sigmoid(theta[0] * z[1]);
    return Eigen::MatrixXd::Constant(1, 1, -s * (1.0 - s) * z[1]);
  };
  model.param_names = {"theta"};
  return model;
}

ResidualModel quadratic_index() {
  ResidualModel model;
  model.l = 1;
  model.d = 1;
  model.eval = [](RowView z, const Eigen::VectorXd& theta) {
    double th = theta[0];
    return Eigen::VectorXd::Constant(1, z[0] - th * th * z[1] - th * z[1] * z[1]);
  };
  model.jac = [](RowView z, const Eigen::VectorXd& theta) {
    return Eigen::MatrixXd::Constant(1, 1, -2.0 * theta[0] * z[1] - z[1] * z[1]);
  };
  model.param_names = {"theta"};
  return model;
}

ResidualModel ar_model(int p, bool intercept) {
  if (p < 1) throw std::invalid_argument("ar_model: order must be positive");
  if (!intercept) {
    auto c = [](RowView z) { return Eigen::VectorXd::Constant(1, z[0]); };
    auto dsn = [p](RowView z) {
      Eigen::MatrixXd out(1, p);
      out.row(0) = -z.segment(1, p);
      return out;
    };
    ResidualModel model = affine_model(1, p, c, dsn);
    model.param_names = numbered("phi", p);
    return model;
  }
  auto m_const = [](RowView z) { return Eigen::VectorXd::Constant(1, -z[0]); };
  auto m_design = [p](RowView z) {
    Eigen::MatrixXd out(1, p);
    out.row(0) = z.segment(1, p);
    return out;
  };
  ResidualModel model = affine_intercept_model(1, 1, p, m_const, m_design);
  model.param_names.push_back("intercept");
  for (auto& name : numbered("phi", p)) model.param_names.push_back(name);
  return model;
}

ResidualModel var_model(int dim, int p, bool intercept) {
  if (dim < 1 || p < 1) throw std::invalid_argument("var_model: bad dimensions");
  const int r = dim * p;  // stacked lag vector length
  if (!intercept) {
    ResidualModel model = multivariate_linear(dim, r);
    model.param_names.clear();
    for (int a = 1; a <= dim; ++a)
      for (int lag = 1; lag <= p; ++lag)
        for (int b = 1; b <= dim; ++b)
          model.param_names.push_back("a" + std::to_string(lag) + "." + std::to_string(a) +
                                      std::to_string(b));
    return model;
  }
  // m = [A_1 ... A_p] lags - y_t, theta1 = A_0.
  auto m_const = [dim](RowView z) { return Eigen::VectorXd(-z.head(dim).transpose()); };
  auto m_design = [dim, r](RowView z) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim * r);
    for (int i = 0; i < dim; ++i) out.block(i, i * r, 1, r) = z.segment(dim, r);
    return out;
  };
  ResidualModel model = affine_intercept_model(dim, dim, dim * r, m_const, m_design);
  for (int a = 1; a <= dim; ++a) model.param_names.push_back("a0." + std::to_string(a));
  for (int a = 1; a <= dim; ++a)
    for (int lag = 1; lag <= p; ++lag)
      for (int b = 1; b <= dim; ++b)
        model.param_names.push_back("a" + std::to_string(lag) + "." + std::to_string(a) +
                                    std::to_string(b));
  return model;
}

ResidualModel tar_model(int p, int threshold_lag, double threshold) {
  if (p < 1 || threshold_lag < 1) throw std::invalid_argument("tar_model: bad order or lag");
  // Canonical theta2 = (phi_1..phi_p, delta0, psi_1..psi_p) where delta0 is
  // the upper-regime intercept offset; theta1 is the lower-regime
  // intercept, the only direction the MDD stage cannot see.
  auto upper = [threshold_lag, threshold](RowView z) {
    return z[threshold_lag] > threshold;  // strictly above -> upper regime
  };
  auto m_const = [](RowView z) { return Eigen::VectorXd::Constant(1, -z[0]); };
  auto m_design = [p, upper](RowView z) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(1, 2 * p + 1);
    if (upper(z)) {
      out(0, p) = 1.0;
      out.block(0, p + 1, 1, p) = z.segment(1, p);
    } else {
      out.block(0, 0, 1, p) = z.segment(1, p);
    }
    return out;
  };
  ResidualModel model = affine_intercept_model(1, 1, 2 * p + 1, m_const, m_design);

  model.param_names.push_back("lower.intercept");
  for (int i = 1; i <= p; ++i) model.param_names.push_back("lower.lag" + std::to_string(i));
  model.param_names.push_back("upper.offset");
  for (int i = 1; i <= p; ++i) model.param_names.push_back("upper.lag" + std::to_string(i));

  // Natural per-regime coefficients: the upper intercept is the shared
  // shift plus the offset.
  const int d = model.d;
  Eigen::MatrixXd transform = Eigen::MatrixXd::Zero(d, d);
  transform(0, 0) = 1.0;                           // lower intercept = theta1
  for (int i = 1; i <= p; ++i) transform(i, i) = 1.0;
  transform(p + 1, 0) = 1.0;                       // upper intercept = theta1 + delta0
  transform(p + 1, p + 1) = 1.0;
  for (int i = 1; i <= p; ++i) transform(p + 1 + i, p + 1 + i) = 1.0;
  model.report_transform = transform;
  model.report_names.push_back("lower.intercept");
  for (int i = 1; i <= p; ++i) model.report_names.push_back("lower.lag" + std::to_string(i));
  model.report_names.push_back("upper.intercept");
  for (int i = 1; i <= p; ++i) model.report_names.push_back("upper.lag" + std::to_string(i));
  return model;
}

ResidualModel builtin_model(const ModelSpec& spec) {
  if (spec.tag == "linear-no-intercept") return linear_model(spec.n_regressors);
  if (spec.tag == "linear-with-intercept") return linear_with_intercept(spec.n_regressors);
  if (spec.tag == "multivariate-linear") return multivariate_linear(spec.l, spec.n_regressors);
  if (spec.tag == "sin-index") return sin_index();
  if (spec.tag == "sigmoid-index") return sigmoid_index();
  if (spec.tag == "quadratic-index") return quadratic_index();
  if (spec.tag == "ar") return ar_model(spec.p, spec.intercept);
  if (spec.tag == "var") return var_model(spec.dim, spec.p, spec.intercept);
  if (spec.tag == "tar") return tar_model(spec.p, spec.threshold_lag, spec.threshold);
  throw std::invalid_argument("builtin_model: unknown spec tag '" + spec.tag + "'");
}

}  // namespace mddest
