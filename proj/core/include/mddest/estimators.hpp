#pragma once

#include "mddest/distance.hpp"
#include "mddest/mdd.hpp"
#include "mddest/optimizer.hpp"
#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include <Eigen/Dense>

namespace mddest {

/// State shared by every DL objective evaluation on a sample: the indicator
/// matrix I(t, j) = 1{X_t <= X_j}, componentwise for vector X.  Diagonal is
/// all ones.
struct DlObjectiveState {
  Eigen::MatrixXd indicator;
};

DlObjectiveState dl_state(const Sample& sample);

/// DL_n(theta) = (1/n) sum_j || (1/n) sum_t h_t(theta) 1{X_t <= X_j} ||^2.
double dl_objective(const ResidualModel& model, const Sample& sample,
                    const DlObjectiveState& state, const Eigen::VectorXd& theta);

/// Analytic gradient (2/n) sum_j Hhat_j' ghat_j with
/// ghat_j = (1/n) sum_t h_t 1{X_t <= X_j} and Hhat_j the same average of
/// the Jacobians.
Eigen::VectorXd dl_gradient(const ResidualModel& model, const Sample& sample,
                            const DlObjectiveState& state, const Eigen::VectorXd& theta);

MddEval dl_value_and_gradient(const ResidualModel& model, const Sample& sample,
                              const DlObjectiveState& state, const Eigen::VectorXd& theta);

/// OLS-type warm start for models with affine residual structure: the
/// minimizer of sum_t ||h_t(theta)||^2.
Eigen::VectorXd ols_start(const ResidualModel& model, const Sample& sample);

/// Exact minimizer of MDD_n for models with affine residual structure (the
/// objective is then an exactly quadratic function of theta).  Throws on a
/// numerically singular normal matrix.
Eigen::VectorXd mdd_affine_solve(const ResidualModel& model, const Sample& sample,
                                 const DistanceMatrix& dist);

/// Minimizes MDD_n over the model parameters by multistart quasi-Newton
/// descent and attaches the sandwich covariance.  Rejects intercept-split
/// models: the objective cannot see constant shifts of the residual, so
/// intercepts must go through estimate_two_step.
EstimateResult estimate_mdd(const ResidualModel& model, const Sample& sample,
                            const OptimizerConfig& config = {});

/// Closed-form MDD estimate of Z1 = Gamma Z2 + eps (no intercept): the
/// first-order condition is a linear system in the rows of Gamma, solved
/// here without materializing any n^2 Kronecker blocks.  Distances are
/// taken on sample.x; when X_t = Z_{2t} this reduces to the textbook
/// pairwise-regressor-distance form.
EstimateResult closed_form_linear(const Sample& sample, int l,
                                  const OptimizerConfig& config = {});

/// Two-step estimation for intercept-split models: first minimize the MDD
/// objective with h replaced by m (a stage the intercepts cannot affect),
/// then recover the intercepts from the moment condition
/// theta1 = -(1/n) sum_t m1(Z_t, theta2_hat).  The joint covariance comes
/// from the influence-matrix sandwich.  When m is affine in theta2 the
/// first stage is solved exactly instead of iteratively.
EstimateResult estimate_two_step(const ResidualModel& model, const Sample& sample,
                                 const OptimizerConfig& config = {});

/// Minimizes DL_n; identifies intercepts, so it accepts any model.
EstimateResult estimate_dl(const ResidualModel& model, const Sample& sample,
                           const OptimizerConfig& config = {});

}  // namespace mddest
