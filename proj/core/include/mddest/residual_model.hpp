#pragma once

#include "mddest/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mddest {

using RowView = Eigen::Ref<const Eigen::RowVectorXd>;

/// A conditional moment model.  `eval` maps one observation row z and a
/// parameter vector theta to the l-dimensional residual h(z, theta) with
/// E[h(Z_t, theta0) | X_t] = 0 at the true parameter; `jac` returns the
/// l x d matrix of partial derivatives of h in theta.
///
/// Models with intercept parameters store the split
///
///     h(z, theta) = (theta1', 0)' + m(z, theta2),
///
/// where the first d1 <= l residual coordinates are shifted by the d1
/// intercepts theta1 and m depends only on the d2 = d - d1 remaining
/// parameters.  `m_eval` and `m_jac` expose the non-intercept part for the
/// two-step estimator; they must be set exactly when d1 > 0.
///
/// Evaluation procedures must be pure: models are immutable after
/// construction and shared read-only across parallel workers.
struct ResidualModel {
  int l = 1;
  int d = 1;
  int d1 = 0;

  std::function<Eigen::VectorXd(RowView, const Eigen::VectorXd&)> eval;
  std::function<Eigen::MatrixXd(RowView, const Eigen::VectorXd&)> jac;

  std::function<Eigen::VectorXd(RowView, const Eigen::VectorXd&)> m_eval;
  std::function<Eigen::MatrixXd(RowView, const Eigen::VectorXd&)> m_jac;

  // Residuals affine in theta: h(z, theta) = affine_const(z) +
  // affine_design(z) * theta.  Enables OLS warm starts and the exact
  // linear MDD solver.
  bool affine = false;
  std::function<Eigen::VectorXd(RowView)> affine_const;
  std::function<Eigen::MatrixXd(RowView)> affine_design;

  std::vector<std::string> param_names;

  // Optional reporting map for front ends whose natural coefficients differ
  // from the canonical intercept split: user-facing coefficients are
  // report_transform * theta with names report_names (empty: identity).
  Eigen::MatrixXd report_transform;
  std::vector<std::string> report_names;

  int d2() const { return d - d1; }
  bool has_intercepts() const { return d1 > 0; }
};

/// View of the non-intercept stage of an intercept-split model: a plain
/// model over theta2 whose residual is m(z, theta2).
ResidualModel theta2_view(const ResidualModel& model);

/// Residuals for every row, as an n x l matrix (row t is h(Z_t, theta)').
/// Throws std::runtime_error naming the first offending row if any residual
/// is non-finite.
Eigen::MatrixXd eval_residuals(const ResidualModel& model, const Sample& sample,
                               const Eigen::VectorXd& theta);

/// Jacobians for every row (each entry l x d).
std::vector<Eigen::MatrixXd> eval_jacobians(const ResidualModel& model, const Sample& sample,
                                            const Eigen::VectorXd& theta);

/// Self-test hook: the worst relative error between `jac` and a central
/// finite difference of `eval` (step 1e-6 * max(1, |theta_i|)) over `trials`
/// random (row, theta) draws around theta_center.
double max_jacobian_error(const ResidualModel& model, const Sample& sample,
                          const Eigen::VectorXd& theta_center, int trials, std::uint64_t seed);

}  // namespace mddest
