#include "mddest/inference.hpp"

#include "mddest/estimators.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace mddest {

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

// Rank-revealing inverse with an explicit condition ceiling; no
// pseudo-inverse fallback, a near-singular curvature matrix must surface.
Eigen::MatrixXd guarded_inverse(const Eigen::MatrixXd& a, const std::string& what) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() > 0 ? sv[0] : 0.0;
  double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  if (!(smin > 0.0) || smax / smin > kConditionLimit) {
    throw std::runtime_error(what);
  }
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

Eigen::VectorXd diag_sqrt(const Eigen::MatrixXd& vcov) {
  Eigen::VectorXd se(vcov.rows());
  for (Eigen::Index i = 0; i < vcov.rows(); ++i) se[i] = std::sqrt(std::max(0.0, vcov(i, i)));
  return se;
}

// uhat for an arbitrary jacobian set: uhat(X_s) = (1/n) sum_t jc_t d(t, s)
// with jc_t the centered jacobians.
std::vector<Eigen::MatrixXd> u_hat_from(const std::vector<Eigen::MatrixXd>& jacs,
                                        const DistanceMatrix& dist) {
  const Eigen::Index n = dist.n();
  const Eigen::Index l = jacs.front().rows();
  const Eigen::Index d = jacs.front().cols();

  Eigen::MatrixXd jbar = Eigen::MatrixXd::Zero(l, d);
  for (const auto& j : jacs) jbar += j;
  jbar /= static_cast<double>(n);

  std::vector<Eigen::MatrixXd> u(static_cast<std::size_t>(n),
                                 Eigen::MatrixXd::Zero(l, d));
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd jc = jacs[static_cast<std::size_t>(t)] - jbar;
    const auto& row = dist.d.row(t);
    for (Eigen::Index s = 0; s < n; ++s) {
      double w = row[s];
      if (w != 0.0) u[static_cast<std::size_t>(s)] += jc * w;
    }
  }
  for (auto& m : u) m /= static_cast<double>(n);
  return u;
}

struct SandwichCore {
  std::vector<Eigen::MatrixXd> u;  // centered later by the caller
  Eigen::MatrixXd omega;           // (1/n) sum_t jc_t' u(X_t)
  Eigen::MatrixXd ubar;
};

SandwichCore sandwich_core(const std::vector<Eigen::MatrixXd>& jacs, const DistanceMatrix& dist) {
  const Eigen::Index n = dist.n();
  const Eigen::Index l = jacs.front().rows();
  const Eigen::Index d = jacs.front().cols();

  SandwichCore core;
  core.u = u_hat_from(jacs, dist);

  Eigen::MatrixXd jbar = Eigen::MatrixXd::Zero(l, d);
  for (const auto& j : jacs) jbar += j;
  jbar /= static_cast<double>(n);

  core.omega = Eigen::MatrixXd::Zero(d, d);
  core.ubar = Eigen::MatrixXd::Zero(l, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    core.omega.noalias() +=
        (jacs[static_cast<std::size_t>(t)] - jbar).transpose() * core.u[static_cast<std::size_t>(t)];
    core.ubar += core.u[static_cast<std::size_t>(t)];
  }
  core.omega = symmetrize(core.omega / static_cast<double>(n));
  core.ubar /= static_cast<double>(n);
  return core;
}

Eigen::MatrixXd score_variance(const std::vector<Eigen::MatrixXd>& u, const Eigen::MatrixXd& ubar,
                               const Eigen::MatrixXd& h) {
  const Eigen::Index n = h.rows();
  const Eigen::Index d = u.front().cols();
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::VectorXd uth = (u[static_cast<std::size_t>(t)] - ubar).transpose() * h.row(t).transpose();
    sigma.noalias() += uth * uth.transpose();
  }
  return symmetrize(sigma / static_cast<double>(n));
}

}  // namespace

std::vector<Eigen::MatrixXd> u_hat(const ResidualModel& model, const Sample& sample,
                                   const DistanceMatrix& dist, const Eigen::VectorXd& theta_hat) {
  return u_hat_from(eval_jacobians(model, sample, theta_hat), dist);
}

MddVcov vcov_mdd(const ResidualModel& model, const Sample& sample,
                           const DistanceMatrix& dist, const Eigen::VectorXd& theta_hat) {
  const double n = static_cast<double>(sample.n());
  std::vector<Eigen::MatrixXd> jacs = eval_jacobians(model, sample, theta_hat);
  SandwichCore core = sandwich_core(jacs, dist);
  Eigen::MatrixXd h = eval_residuals(model, sample, theta_hat);
  Eigen::MatrixXd sigma = score_variance(core.u, core.ubar, h);

  Eigen::MatrixXd omega_inv =
      guarded_inverse(core.omega, "near-singular Omega; identification suspect");

  MddVcov out;
  out.omega_hat = core.omega;
  out.sigma_hat = sigma;
  out.vcov = symmetrize(omega_inv * sigma * omega_inv) / n;
  out.std_errors = diag_sqrt(out.vcov);
  return out;
}

TwoStepVcov vcov_two_step(const ResidualModel& model, const Sample& sample,
                           const DistanceMatrix& dist, const ParamVector& theta_hat) {
  if (!model.has_intercepts()) {
    throw std::invalid_argument("vcov_two_step: model has no intercept split");
  }
  const Eigen::Index n = sample.n();
  const int l = model.l;
  const int d1 = model.d1;
  const int d2 = model.d2();
  const Eigen::VectorXd theta2 = theta_hat.theta.tail(d2);

  if (d2 == 0) {
    // Pure intercepts: J_t = -Upsilon, so V collapses to the sample second
    // moment of the first d1 residual coordinates.
    Eigen::MatrixXd h = eval_residuals(model, sample, theta_hat.theta);
    Eigen::MatrixXd sigma1 = symmetrize((h.transpose() * h) / static_cast<double>(n));
    Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(d1, l);
    upsilon.leftCols(d1).setIdentity();
    TwoStepVcov out;
    out.sigma1_hat = sigma1;
    out.v_hat = upsilon * sigma1 * upsilon.transpose();
    out.v1_hat = out.v_hat;
    out.vcov = out.v_hat / static_cast<double>(n);
    out.std_errors = diag_sqrt(out.vcov);
    return out;
  }

  // Stage quantities at theta2_hat.
  ResidualModel stage = theta2_view(model);
  std::vector<Eigen::MatrixXd> mjacs = eval_jacobians(stage, sample, theta2);
  SandwichCore core = sandwich_core(mjacs, dist);

  // Residuals at the full estimate (theta1; 0) + m.
  Eigen::MatrixXd h = eval_residuals(model, sample, theta_hat.theta);

  Eigen::MatrixXd sigma2 = score_variance(core.u, core.ubar, h);
  Eigen::MatrixXd sigma1 = Eigen::MatrixXd::Zero(l, l);
  Eigen::MatrixXd omega1 = Eigen::MatrixXd::Zero(l, d2);
  Eigen::MatrixXd m1jac = Eigen::MatrixXd::Zero(d1, d2);  // mean of dm1/dtheta2
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::VectorXd ht = h.row(t).transpose();
    sigma1.noalias() += ht * ht.transpose();
    omega1.noalias() +=
        ht * (ht.transpose() * (core.u[static_cast<std::size_t>(t)] - core.ubar));
    m1jac += mjacs[static_cast<std::size_t>(t)].topRows(d1);
  }
  sigma1 = symmetrize(sigma1 / static_cast<double>(n));
  omega1 /= static_cast<double>(n);
  m1jac /= static_cast<double>(n);

  Eigen::MatrixXd omega2_inv =
      guarded_inverse(core.omega, "near-singular Omega2; identification suspect");

  Eigen::MatrixXd upsilon = Eigen::MatrixXd::Zero(d1, l);
  upsilon.leftCols(d1).setIdentity();

  // V from the per-row influence matrices.
  const int d = d1 + d2;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd uc_t = (core.u[static_cast<std::size_t>(t)] - core.ubar).transpose();  // d2 x l
    Eigen::MatrixXd j_t(d, l);
    j_t.topRows(d1) = m1jac * omega2_inv * uc_t - upsilon;
    j_t.bottomRows(d2) = -omega2_inv * uc_t;
    Eigen::VectorXd jh = j_t * h.row(t).transpose();
    v.noalias() += jh * jh.transpose();
  }
  v = symmetrize(v / static_cast<double>(n));

  // Marginal blocks from the closed forms; both routes are exact sample
  // algebra, so a mismatch means an implementation bug.
  Eigen::MatrixXd v2 = symmetrize(omega2_inv * sigma2 * omega2_inv);
  Eigen::MatrixXd v1 = symmetrize(
      m1jac * omega2_inv * sigma2 * omega2_inv * m1jac.transpose() -
      upsilon * omega1 * omega2_inv * m1jac.transpose() -
      m1jac * omega2_inv * omega1.transpose() * upsilon.transpose() +
      upsilon * sigma1 * upsilon.transpose());

  double scale = std::max(1.0, std::max(v1.norm(), v2.norm()));
  if ((v.topLeftCorner(d1, d1) - v1).norm() / scale > 1e-8 ||
      (v.bottomRightCorner(d2, d2) - v2).norm() / scale > 1e-8) {
    throw std::logic_error("vcov_two_step: block forms disagree with the influence sandwich");
  }

  TwoStepVcov out;
  out.v_hat = v;
  out.v1_hat = v1;
  out.v2_hat = v2;
  out.omega1_hat = omega1;
  out.sigma1_hat = sigma1;
  out.omega2_hat = core.omega;
  out.sigma2_hat = sigma2;
  out.vcov = v / static_cast<double>(n);
  out.std_errors = diag_sqrt(out.vcov);
  return out;
}

DlVcov vcov_dl(const ResidualModel& model, const Sample& sample,
               const Eigen::VectorXd& theta_hat) {
  const Eigen::Index n = sample.n();
  const int l = model.l;
  const int d = model.d;
  DlObjectiveState state = dl_state(sample);
  const Eigen::MatrixXd& ind = state.indicator;

  std::vector<Eigen::MatrixXd> jacs = eval_jacobians(model, sample, theta_hat);
  Eigen::MatrixXd h = eval_residuals(model, sample, theta_hat);

  // Hhat(X_j) = (1/n) sum_t hdot_t 1{X_t <= X_j}; flattened row-major so the
  // whole family is two matrix products.
  Eigen::MatrixXd jflat(n, l * d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd jt = jacs[static_cast<std::size_t>(t)];
    for (int i = 0; i < l; ++i) jflat.block(t, i * d, 1, d) = jt.row(i);
  }
  Eigen::MatrixXd hhat = (ind.transpose() * jflat) / static_cast<double>(n);  // n x (l d)
  Eigen::MatrixXd vhat = (ind * hhat) / static_cast<double>(n);               // n x (l d)

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd hj(l, d), vj(l, d);
    for (int i = 0; i < l; ++i) {
      hj.row(i) = hhat.block(t, i * d, 1, d);
      vj.row(i) = vhat.block(t, i * d, 1, d);
    }
    a.noalias() += hj.transpose() * hj;
    Eigen::VectorXd vth = vj.transpose() * h.row(t).transpose();
    b.noalias() += vth * vth.transpose();
  }
  a = symmetrize(a / static_cast<double>(n));
  b = symmetrize(b / static_cast<double>(n));

  Eigen::MatrixXd a_inv = guarded_inverse(a, "near-singular A; identification suspect");

  DlVcov out;
  out.a_hat = a;
  out.b_hat = b;
  out.vcov = symmetrize(a_inv * b * a_inv) / static_cast<double>(n);
  out.std_errors = diag_sqrt(out.vcov);
  return out;
}

}  // namespace mddest
