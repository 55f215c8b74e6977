#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mddest {

/// Aligned observations for a conditional moment model. `z` holds the model
/// variables Z_t (one row per observation, k columns) and `x` holds the
/// conditioning variables X_t (same rows, q columns).
struct Sample {
  Eigen::MatrixXd z;
  Eigen::MatrixXd x;

  Eigen::Index n() const { return z.rows(); }
  Eigen::Index k() const { return z.cols(); }
  Eigen::Index q() const { return x.cols(); }
};

struct Diagnostic {
  std::string message;
};

/// Structural defects (row-count mismatch, non-finite entries, n < 2) throw
/// std::invalid_argument.  Everything else the model assumptions ask for
/// (stationarity, ergodicity) is not checkable from one sample, so this only
/// returns heuristic warnings: a constant conditioning column makes every
/// pairwise distance in that coordinate zero, and n < d + 2 leaves too few
/// rows for d parameters.
std::vector<Diagnostic> validate_sample(const Sample& sample, int d = 0);

/// Parameter vector with an optional intercept split: the first d1
/// coordinates act as pure shifts of the residual (d1 == 0 means no split).
struct ParamVector {
  Eigen::VectorXd theta;
  int d1 = 0;

  int d() const { return static_cast<int>(theta.size()); }
  int d2() const { return d() - d1; }
  Eigen::VectorXd theta1() const { return theta.head(d1); }
  Eigen::VectorXd theta2() const { return theta.tail(d() - d1); }
};

enum class EstimatorMethod { Mdd, MddClosedForm, MddTwoStep, Dl, Icm };

std::string to_string(EstimatorMethod method);

struct EstimateResult {
  ParamVector theta_hat;
  Eigen::MatrixXd vcov;        // finite-sample covariance of theta_hat
  Eigen::VectorXd std_errors;  // sqrt of the vcov diagonal
  double objective_value = 0.0;
  bool converged = false;
  int iterations = 0;
  EstimatorMethod method = EstimatorMethod::Mdd;
  std::string diagnostics;
};

}  // namespace mddest
