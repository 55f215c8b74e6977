#pragma once

#include "mddest/distance.hpp"
#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mddest {

/// Condition-number ceiling for every matrix inverted during inference; a
/// worse-conditioned curvature matrix signals failed identification and is
/// surfaced as an error instead of being pseudo-inverted.
inline constexpr double kConditionLimit = 1e12;

/// Sample analog of u(x) = E{ [hdot_t - E hdot_t] ||X_t - x|| }:
///   uhat(X_s) = (1/n) sum_t (hdot_t - hdotbar) d(t, s),
/// one l x d matrix per observation, computed with a single sweep over the
/// rows of the shared distance matrix.
std::vector<Eigen::MatrixXd> u_hat(const ResidualModel& model, const Sample& sample,
                                   const DistanceMatrix& dist, const Eigen::VectorXd& theta_hat);

struct MddVcov {
  Eigen::MatrixXd vcov;        // Omega^-1 Sigma Omega^-1 / n
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd omega_hat;   // (1/n) sum_t (hdot_t - hdotbar)' uhat(X_t)
  Eigen::MatrixXd sigma_hat;   // (1/n) sum_t [uhat(X_t)-ubar]' h_t h_t' [uhat(X_t)-ubar]
};

/// Sandwich covariance of the plain MDD estimator.  Sigma uses the raw
/// residuals h_t(theta_hat): the estimand contains h(Z_t, theta0) directly
/// and E h_t = 0 under the martingale difference assumption, so no extra
/// centering is applied.  Throws if Omega is numerically singular
/// ("near-singular Omega; identification suspect").
MddVcov vcov_mdd(const ResidualModel& model, const Sample& sample,
                           const DistanceMatrix& dist, const Eigen::VectorXd& theta_hat);

struct TwoStepVcov {
  Eigen::MatrixXd vcov;        // V / n for the joint (theta1, theta2)
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd v_hat;       // (1/n) sum_t J_t h_t h_t' J_t'
  Eigen::MatrixXd v1_hat;      // marginal theta1 block, closed form
  Eigen::MatrixXd v2_hat;      // Omega2^-1 Sigma2 Omega2^-1
  Eigen::MatrixXd omega1_hat;
  Eigen::MatrixXd sigma1_hat;
  Eigen::MatrixXd omega2_hat;
  Eigen::MatrixXd sigma2_hat;
};

/// Joint covariance of the two-step estimator.  V is assembled from the
/// per-row influence matrices
///   J_t = ( M1 Omega2^-1 [u2(X_t)-u2bar]' - Upsilon ; -Omega2^-1 [u2(X_t)-u2bar]' )
/// with M1 the sample mean of dm1/dtheta2 and Upsilon = (I_{d1}, 0).  The
/// marginal blocks V1 and V2 are also computed from their closed forms and
/// cross-checked against the corresponding blocks of V; both routes are
/// exact algebraic rearrangements at the sample level, so they must agree
/// to 1e-8.
TwoStepVcov vcov_two_step(const ResidualModel& model, const Sample& sample,
                           const DistanceMatrix& dist, const ParamVector& theta_hat);

struct DlVcov {
  Eigen::MatrixXd vcov;        // A^-1 B A^-1 / n
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd a_hat;       // (1/n) sum_j H(X_j)' H(X_j)
  Eigen::MatrixXd b_hat;       // (1/n) sum_t v(X_t)' h_t h_t' v(X_t)
};

/// Sample-analog sandwich for the indicator-weighted estimator, built from
///   H(X_j) = (1/n) sum_t hdot_t 1{X_t <= X_j}
///   v(X_t) = (1/n) sum_j H(X_j) 1{X_t <= X_j}.
DlVcov vcov_dl(const ResidualModel& model, const Sample& sample,
               const Eigen::VectorXd& theta_hat);

}  // namespace mddest
