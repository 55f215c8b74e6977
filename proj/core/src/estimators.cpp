#include "mddest/estimators.hpp"

#include "mddest/builtin_models.hpp"
#include "mddest/inference.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace mddest {

namespace {

Eigen::VectorXd solve_guarded(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::string& what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  if (!(smin > 0.0) || smax / smin > kConditionLimit) {
    throw std::runtime_error(what);
  }
  return svd.solve(b);
}

struct AffineParts {
  Eigen::MatrixXd c;                    // n x l constants
  std::vector<Eigen::MatrixXd> design;  // per-row l x d
};

AffineParts affine_parts(const ResidualModel& model, const Sample& sample) {
  if (!model.affine) {
    throw std::invalid_argument("model does not declare affine residual structure");
  }
  AffineParts parts;
  const Eigen::Index n = sample.n();
  parts.c.resize(n, model.l);
  parts.design.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    parts.c.row(t) = model.affine_const(sample.z.row(t)).transpose();
    parts.design.push_back(model.affine_design(sample.z.row(t)));
  }
  return parts;
}

void attach_vcov_mdd(EstimateResult& result, const ResidualModel& model,
                          const Sample& sample, const DistanceMatrix& dist) {
  MddVcov v = vcov_mdd(model, sample, dist, result.theta_hat.theta);
  result.vcov = v.vcov;
  result.std_errors = v.std_errors;
}

}  // namespace

DlObjectiveState dl_state(const Sample& sample) {
  const Eigen::Index n = sample.n();
  DlObjectiveState state;
  state.indicator.resize(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < n; ++j) {
      state.indicator(t, j) =
          (sample.x.row(t).array() <= sample.x.row(j).array()).all() ? 1.0 : 0.0;
    }
  }
  return state;
}

double dl_objective(const ResidualModel& model, const Sample& sample,
                    const DlObjectiveState& state, const Eigen::VectorXd& theta) {
  const double n = static_cast<double>(sample.n());
  Eigen::MatrixXd h = eval_residuals(model, sample, theta);
  Eigen::MatrixXd g = (h.transpose() * state.indicator) / n;  // column j = ghat_j
  return g.squaredNorm() / n;
}

MddEval dl_value_and_gradient(const ResidualModel& model, const Sample& sample,
                              const DlObjectiveState& state, const Eigen::VectorXd& theta) {
  const Eigen::Index n = sample.n();
  const double dn = static_cast<double>(n);
  Eigen::MatrixXd h = eval_residuals(model, sample, theta);
  Eigen::MatrixXd g = (h.transpose() * state.indicator) / dn;

  MddEval out;
  out.value = g.squaredNorm() / dn;

  // q_t = sum_j ghat_j 1{X_t <= X_j}; gradient = (2/n^2) sum_t hdot_t' q_t.
  Eigen::MatrixXd q = g * state.indicator.transpose();
  std::vector<Eigen::MatrixXd> jacs = eval_jacobians(model, sample, theta);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.d);
  for (Eigen::Index t = 0; t < n; ++t) {
    grad.noalias() += jacs[static_cast<std::size_t>(t)].transpose() * q.col(t);
  }
  out.gradient = 2.0 / (dn * dn) * grad;
  return out;
}

Eigen::VectorXd dl_gradient(const ResidualModel& model, const Sample& sample,
                            const DlObjectiveState& state, const Eigen::VectorXd& theta) {
  return dl_value_and_gradient(model, sample, state, theta).gradient;
}

Eigen::VectorXd ols_start(const ResidualModel& model, const Sample& sample) {
  AffineParts parts = affine_parts(model, sample);
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(model.d, model.d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(model.d);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::MatrixXd& dt = parts.design[static_cast<std::size_t>(t)];
    normal.noalias() += dt.transpose() * dt;
    rhs.noalias() -= dt.transpose() * parts.c.row(t).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[sv.size() - 1] > 0.0) || sv[0] / sv[sv.size() - 1] > kConditionLimit) {
    return Eigen::VectorXd::Zero(model.d);  // degenerate design; start at the origin
  }
  return svd.solve(rhs);
}

Eigen::VectorXd mdd_affine_solve(const ResidualModel& model, const Sample& sample,
                                 const DistanceMatrix& dist) {
  AffineParts parts = affine_parts(model, sample);
  const Eigen::Index n = sample.n();
  const int d = model.d;
  const int l = model.l;

  Eigen::MatrixXd dbar = Eigen::MatrixXd::Zero(l, d);
  for (const auto& dt : parts.design) dbar += dt;
  dbar /= static_cast<double>(n);
  Eigen::MatrixXd c = parts.c;
  c.rowwise() -= c.colwise().mean();

  // w_t = sum_t' d(t,t') Dc_t' and u_t = sum_t' d(t,t') c_t'; the stationarity
  // condition is [sum_t Dc_t' w_t] theta = -sum_t Dc_t' u_t.
  std::vector<Eigen::MatrixXd> w(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(l, d));
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd dc = parts.design[static_cast<std::size_t>(t)] - dbar;
    const auto& row = dist.d.row(t);
    for (Eigen::Index s = 0; s < n; ++s) {
      double v = row[s];
      if (v != 0.0) w[static_cast<std::size_t>(s)] += dc * v;
    }
  }
  Eigen::MatrixXd u = dist.d * c;

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd dc = parts.design[static_cast<std::size_t>(t)] - dbar;
    lhs.noalias() += dc.transpose() * w[static_cast<std::size_t>(t)];
    rhs.noalias() -= dc.transpose() * u.row(t).transpose();
  }
  return solve_guarded(lhs, rhs,
                       "unidentified: degenerate regressor/conditioning geometry");
}

EstimateResult estimate_mdd(const ResidualModel& model, const Sample& sample,
                            const OptimizerConfig& config) {
  if (model.has_intercepts()) {
    throw std::invalid_argument(
        "estimate_mdd: the objective cannot identify intercepts; use estimate_two_step");
  }
  validate_sample(sample, model.d);
  DistanceMatrix dist = distance_matrix(sample);

  auto value = [&](const Eigen::VectorXd& th) {
    return mdd_objective(model, sample, dist, th);
  };
  auto value_grad = [&](const Eigen::VectorXd& th) {
    MddEval e = mdd_value_and_gradient(model, sample, dist, th);
    return std::make_pair(e.value, e.gradient);
  };

  std::optional<Eigen::VectorXd> warm;
  if (model.affine) warm = ols_start(model, sample);
  std::vector<Eigen::VectorXd> starts =
      multistart_points(Eigen::VectorXd::Zero(model.d), warm, config);
  MinimizeResult run = minimize_multistart(value, value_grad, starts, config);

  EstimateResult result;
  result.theta_hat = {run.x, 0};
  result.objective_value = run.value;
  result.converged = run.converged;
  result.iterations = run.iterations;
  result.method = EstimatorMethod::Mdd;
  if (!run.converged) {
    result.diagnostics = "no start reached gradient norm below tolerance (best " +
                         std::to_string(run.grad_norm) + ")";
  }
  attach_vcov_mdd(result, model, sample, dist);
  return result;
}

EstimateResult closed_form_linear(const Sample& sample, int l, const OptimizerConfig&) {
  if (l < 1 || sample.k() <= l) {
    throw std::invalid_argument("closed_form_linear: need response dim l and regressors");
  }
  const int r = static_cast<int>(sample.k()) - l;
  validate_sample(sample, l * r);
  DistanceMatrix dist = distance_matrix(sample);

  // The normal matrix factors over the l rows of Gamma: with centered
  // regressors c_t it is I_l (x) S, S = sum sum c_t c_t'' d(t,t'), so only
  // the r x r core and the per-row right-hand sides are ever formed.
  Eigen::MatrixXd c2 = sample.z.rightCols(r);
  c2.rowwise() -= c2.colwise().mean();
  Eigen::MatrixXd c1 = sample.z.leftCols(l);
  c1.rowwise() -= c1.colwise().mean();

  Eigen::MatrixXd rsum = dist.d * c2;                  // row t = sum_t' d(t,t') c_t''
  Eigen::MatrixXd s = c2.transpose() * rsum;           // r x r
  Eigen::MatrixXd g = c2.transpose() * (dist.d * c1);  // r x l, column i = rhs for row i

  Eigen::VectorXd theta(l * r);
  for (int i = 0; i < l; ++i) {
    theta.segment(i * r, r) = solve_guarded(
        s, g.col(i), "unidentified: degenerate regressor/conditioning geometry");
  }

  ResidualModel model = multivariate_linear(l, r);
  EstimateResult result;
  result.theta_hat = {theta, 0};
  result.objective_value = mdd_objective(model, sample, dist, theta);
  result.converged = true;
  result.method = EstimatorMethod::MddClosedForm;
  attach_vcov_mdd(result, model, sample, dist);
  return result;
}

EstimateResult estimate_two_step(const ResidualModel& model, const Sample& sample,
                                 const OptimizerConfig& config) {
  if (!model.has_intercepts()) {
    throw std::invalid_argument("estimate_two_step: model declares no intercepts");
  }
  validate_sample(sample, model.d);
  DistanceMatrix dist = distance_matrix(sample);
  const Eigen::Index n = sample.n();
  const int d1 = model.d1;
  const int d2 = model.d2();

  ResidualModel stage = theta2_view(model);
  Eigen::VectorXd theta2;
  double objective = 0.0;
  bool converged = true;
  int iterations = 0;
  std::string diagnostics;

  if (d2 == 0) {
    theta2.resize(0);  // pure-intercept model, nothing to minimize
  } else if (stage.affine) {
    theta2 = mdd_affine_solve(stage, sample, dist);
    objective = mdd_objective(stage, sample, dist, theta2);
    diagnostics = "stage 1 solved in closed form";
  } else {
    auto value = [&](const Eigen::VectorXd& th) {
      return mdd_objective(stage, sample, dist, th);
    };
    auto value_grad = [&](const Eigen::VectorXd& th) {
      MddEval e = mdd_value_and_gradient(stage, sample, dist, th);
      return std::make_pair(e.value, e.gradient);
    };
    std::vector<Eigen::VectorXd> starts =
        multistart_points(Eigen::VectorXd::Zero(d2), std::nullopt, config);
    MinimizeResult run = minimize_multistart(value, value_grad, starts, config);
    theta2 = run.x;
    objective = run.value;
    converged = run.converged;
    iterations = run.iterations;
    if (!run.converged) {
      diagnostics = "stage 1: no start reached gradient norm below tolerance";
    }
  }

  // theta1 = -(1/n) sum_t m1(Z_t, theta2_hat).
  Eigen::VectorXd theta1 = Eigen::VectorXd::Zero(d1);
  for (Eigen::Index t = 0; t < n; ++t) {
    theta1 -= model.m_eval(sample.z.row(t), theta2).head(d1);
  }
  theta1 /= static_cast<double>(n);

  EstimateResult result;
  Eigen::VectorXd theta(model.d);
  theta << theta1, theta2;
  result.theta_hat = {theta, d1};
  result.objective_value = objective;
  result.converged = converged;
  result.iterations = iterations;
  result.method = EstimatorMethod::MddTwoStep;
  result.diagnostics = diagnostics;

  TwoStepVcov v = vcov_two_step(model, sample, dist, result.theta_hat);
  result.vcov = v.vcov;
  result.std_errors = v.std_errors;
  return result;
}

EstimateResult estimate_dl(const ResidualModel& model, const Sample& sample,
                           const OptimizerConfig& config) {
  validate_sample(sample, model.d);
  DlObjectiveState state = dl_state(sample);

  auto value = [&](const Eigen::VectorXd& th) {
    return dl_objective(model, sample, state, th);
  };
  auto value_grad = [&](const Eigen::VectorXd& th) {
    MddEval e = dl_value_and_gradient(model, sample, state, th);
    return std::make_pair(e.value, e.gradient);
  };

  std::optional<Eigen::VectorXd> warm;
  if (model.affine) warm = ols_start(model, sample);
  std::vector<Eigen::VectorXd> starts =
      multistart_points(Eigen::VectorXd::Zero(model.d), warm, config);
  MinimizeResult run = minimize_multistart(value, value_grad, starts, config);

  EstimateResult result;
  result.theta_hat = {run.x, model.d1};
  result.objective_value = run.value;
  result.converged = run.converged;
  result.iterations = run.iterations;
  result.method = EstimatorMethod::Dl;
  if (!run.converged) {
    result.diagnostics = "no start reached gradient norm below tolerance (best " +
                         std::to_string(run.grad_norm) + ")";
  }
  DlVcov v = vcov_dl(model, sample, run.x);
  result.vcov = v.vcov;
  result.std_errors = v.std_errors;
  return result;
}

}  // namespace mddest
