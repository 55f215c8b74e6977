#pragma once

#include "mddest/distance.hpp"
#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include <Eigen/Dense>

namespace mddest {

/// The V-statistic objective
///
///   MDD_n(theta) = -(1/n^2) sum_t sum_t' (h_t - hbar)'(h_t' - hbar) ||X_t - X_t'||,
///
/// evaluated as -(1/n^2) sum_t a_t' w_t with a_t = h_t - hbar and
/// w_t = sum_t' a_t' d(t, t'), so no n x n residual-product matrix is ever
/// formed.  Nonnegative up to roundoff and invariant under constant shifts
/// of the residuals.
double mdd_objective(const ResidualModel& model, const Sample& sample,
                     const DistanceMatrix& dist, const Eigen::VectorXd& theta);

/// Analytic gradient of MDD_n,
///   g_j = -(2/n^2) sum_t sum_t' (hdot_t - hdotbar)_{.j}' (h_t' - hbar) d(t, t').
Eigen::VectorXd mdd_gradient(const ResidualModel& model, const Sample& sample,
                             const DistanceMatrix& dist, const Eigen::VectorXd& theta);

struct MddEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

/// Objective and gradient in one pass (the w_t sweep is shared).
MddEval mdd_value_and_gradient(const ResidualModel& model, const Sample& sample,
                               const DistanceMatrix& dist, const Eigen::VectorXd& theta);

/// Uncentered variant -(1/n^2) sum sum h_t' h_t' ||X_t - X_t'||.  Identifies
/// intercepts but is not shift invariant; kept as a comparison objective.
double icm_objective(const ResidualModel& model, const Sample& sample,
                     const DistanceMatrix& dist, const Eigen::VectorXd& theta);

/// The centered residual matrix (row t is (h_t - hbar)'); its rows sum to
/// zero by construction.  Exposed for diagnostics and tests.
Eigen::MatrixXd centered_residuals(const ResidualModel& model, const Sample& sample,
                                   const Eigen::VectorXd& theta);

}  // namespace mddest
