#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace mddest {

struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

enum class OptMethod { BfgsAnalyticGradient, NelderMeadFallback };

struct OptimizerConfig {
  OptMethod method = OptMethod::BfgsAnalyticGradient;
  double grad_tol = 1e-8;
  int max_iter = 500;
  int multistart = 5;
  double perturbation_scale = 0.5;
  std::optional<Bounds> bounds;  // box parameter space; empty = unconstrained
  std::uint64_t seed = 0;        // drives the multistart perturbations
};

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using ValueGradFn = std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)>;

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after each accepted step
};

/// Quasi-Newton minimizer with analytic gradient and backtracking Armijo
/// line search (c = 1e-4, shrink 0.5).  Accepted steps never increase the
/// objective.  Convergence means gradient 2-norm below grad_tol.
MinimizeResult minimize_bfgs(const ValueFn& value, const ValueGradFn& value_grad,
                             Eigen::VectorXd x0, const OptimizerConfig& config);

/// Derivative-free simplex fallback.
MinimizeResult minimize_nelder_mead(const ValueFn& value, Eigen::VectorXd x0,
                                    const OptimizerConfig& config);

/// Start points for a multistart run: the warm start if present, then the
/// origin-like base, then Gaussian perturbations of the base at
/// perturbation_scale, config.multistart points in total.
std::vector<Eigen::VectorXd> multistart_points(const Eigen::VectorXd& base,
                                               const std::optional<Eigen::VectorXd>& warm,
                                               const OptimizerConfig& config);

/// Runs the configured method from every start (BFGS runs get a
/// Nelder-Mead polish if they stall) and returns the best local minimum by
/// objective value, ties broken by start index.
MinimizeResult minimize_multistart(const ValueFn& value, const ValueGradFn& value_grad,
                                   const std::vector<Eigen::VectorXd>& starts,
                                   const OptimizerConfig& config);

}  // namespace mddest
