#pragma once

#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace mddest {

/// log Gamma(x) for x > 0, Lanczos approximation (relative error below
/// 1e-12 over the range used here).
double log_gamma(double x);

/// The non-integrable frequency weight w(s) = 1 / (c_q ||s||^{1+q}) with
/// c_q = pi^{(1+q)/2} / Gamma((1+q)/2); c_1 = pi.
struct WeightFunction {
  int q = 1;
  double c_q = 0.0;

  double density(const Eigen::VectorXd& s) const;
};

WeightFunction weight_function(int q);

/// The empirical characteristic-function process
///   G_n(s, theta) = (1/n) sum_t (h_t - hbar) exp(i <s, X_t>)
/// evaluated on a grid of frequency points (one point per row of s_points).
struct CharProcessGrid {
  Eigen::MatrixXd s_points;                 // one q-vector per row
  std::vector<Eigen::VectorXcd> values;     // l complex coordinates per point
};

CharProcessGrid char_process(const ResidualModel& model, const Sample& sample,
                             const Eigen::VectorXd& theta, const Eigen::MatrixXd& s_points);

struct QuadratureConfig {
  double eps = 1e-3;     // inner cutoff, handled by the quadratic leading term
  double s_max = 200.0;  // outer truncation
  double rel_tol = 1e-6;
  int max_depth = 48;
};

/// Test oracle for scalar conditioning variables (q = 1): integrates
/// |G_n(s, theta)|^2 / (pi s^2) over the real line.  Near s = 0 the centered
/// average makes |G_n|^2 = O(s^2), so the integrand is bounded and the
/// [0, eps) piece is replaced by its quadratic leading term.  Agrees with
/// the pairwise-distance double sum; never used in estimation.
double mdd_via_quadrature(const ResidualModel& model, const Sample& sample,
                          const Eigen::VectorXd& theta, const QuadratureConfig& config = {});

}  // namespace mddest
