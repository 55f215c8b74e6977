#include "mddest/residual_model.hpp"

#include "mddest/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mddest {

ResidualModel theta2_view(const ResidualModel& model) {
  if (!model.has_intercepts()) {
    throw std::invalid_argument("theta2_view: model has no intercept split");
  }
  ResidualModel view;
  view.l = model.l;
  view.d = model.d2();
  view.d1 = 0;
  view.eval = model.m_eval;
  view.jac = model.m_jac;
  if (model.affine) {
    // h = const(z) + [ (I_d1; 0) | D2(z) ] theta, so m keeps the const part
    // and the trailing d2 design columns.
    const int d1 = model.d1;
    const int d2 = model.d2();
    auto design = model.affine_design;
    view.affine = true;
    view.affine_const = model.affine_const;
    view.affine_design = [design, d1, d2](RowView z) -> Eigen::MatrixXd {
      return design(z).rightCols(d2);
    };
  }
  if (static_cast<int>(model.param_names.size()) == model.d) {
    view.param_names.assign(model.param_names.begin() + model.d1, model.param_names.end());
  }
  return view;
}

Eigen::MatrixXd eval_residuals(const ResidualModel& model, const Sample& sample,
                               const Eigen::VectorXd& theta) {
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd h(n, model.l);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::VectorXd ht = model.eval(sample.z.row(t), theta);
    if (!ht.allFinite()) {
      throw std::runtime_error("non-finite residual at row " + std::to_string(t));
    }
    h.row(t) = ht.transpose();
  }
  return h;
}

std::vector<Eigen::MatrixXd> eval_jacobians(const ResidualModel& model, const Sample& sample,
                                            const Eigen::VectorXd& theta) {
  const Eigen::Index n = sample.n();
  std::vector<Eigen::MatrixXd> jacs;
  jacs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    jacs.push_back(model.jac(sample.z.row(t), theta));
  }
  return jacs;
}

double max_jacobian_error(const ResidualModel& model, const Sample& sample,
                          const Eigen::VectorXd& theta_center, int trials, std::uint64_t seed) {
  Rng rng(seed, derive_stream(0x6a61636bULL));
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    Eigen::Index row = static_cast<Eigen::Index>(rng.next_u64() % sample.n());
    Eigen::VectorXd theta = theta_center + 0.5 * rng.normal_vector(model.d);
    Eigen::MatrixXd analytic = model.jac(sample.z.row(row), theta);
    Eigen::MatrixXd fd(model.l, model.d);
    for (int j = 0; j < model.d; ++j) {
      double step = 1e-6 * std::max(1.0, std::abs(theta[j]));
      Eigen::VectorXd up = theta, dn = theta;
      up[j] += step;
      dn[j] -= step;
      fd.col(j) = (model.eval(sample.z.row(row), up) - model.eval(sample.z.row(row), dn)) /
                  (2.0 * step);
    }
    double scale = std::max(1.0, fd.norm());
    worst = std::max(worst, (analytic - fd).norm() / scale);
  }
  return worst;
}

}  // namespace mddest
