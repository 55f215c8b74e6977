#pragma once

#include "mddest/residual_model.hpp"

#include <string>

namespace mddest {

// Row layouts (z columns) used by the builtin models:
//   linear / index models:  (z1, z2_1, ..., z2_r)
//   multivariate linear:    (z1_1, ..., z1_l, z2_1, ..., z2_r)
//   ar(p):                  (y_t, y_{t-1}, ..., y_{t-p})
//   var(p), dim m:          (Y_t', Y_{t-1}', ..., Y_{t-p}')
//   tar(p, lag L):          (y_t, y_{t-1}, ..., y_{t-max(p,L)})
// Coefficient matrices are vectorized row by row, so the multivariate
// linear truth (G_11, G_12, G_21, G_22) reads along rows of Gamma.

/// h = z1 - theta' z2, no intercept.
ResidualModel linear_model(int n_regressors);

/// Intercept regression z1 = alpha + theta2' z2 + eps, stored in canonical
/// shift form h = alpha + m(z, theta2) with m = theta2' z2 - z1, so the
/// reported intercept is alpha itself.  (The sign flip h -> -h leaves every
/// objective in this library unchanged.)
ResidualModel linear_with_intercept(int n_regressors);

/// h = z1 - Gamma z2 with z1 of dimension l, Gamma l x r, theta = rows of
/// Gamma stacked.
ResidualModel multivariate_linear(int l, int n_regressors);

/// h = z1 - sin(theta z2), scalar theta.
ResidualModel sin_index();

/// h = z1 - sigmoid(theta z2), sigmoid(x) = 1 / (1 + exp(-x)).
ResidualModel sigmoid_index();

/// h = z1 - theta^2 z2 - theta z2^2, scalar theta.
ResidualModel quadratic_index();

/// AR(p): y_t = [c +] phi_1 y_{t-1} + ... + phi_p y_{t-p} + eps_t.
ResidualModel ar_model(int p, bool intercept = false);

/// VAR(p): Y_t = [A_0 +] A_1 Y_{t-1} + ... + A_p Y_{t-p} + eps_t.
ResidualModel var_model(int dim, int p, bool intercept = true);

/// Two-regime TAR(p) with threshold variable y_{t-threshold_lag}: the lower
/// regime applies when y_{t-L} <= threshold, the upper regime when strictly
/// above.  Each regime has its own intercept and p lag coefficients.
///
/// Only the common shift of the two regime intercepts is invisible to the
/// MDD objective, so the canonical parameters are
///   theta1 = (phi_lower_0)                               [d1 = 1]
///   theta2 = (phi_lower_1..p, psi_0 - phi_0, psi_upper_1..p)
/// and the model carries a report transform back to the natural
/// (lower intercept, lower lags, upper intercept, upper lags) coefficients.
ResidualModel tar_model(int p, int threshold_lag = 1, double threshold = 0.0);

struct ModelSpec {
  std::string tag;  // linear-no-intercept | linear-with-intercept |
                    // multivariate-linear | sin-index | sigmoid-index |
                    // quadratic-index | ar | var | tar
  int l = 1;
  int n_regressors = 1;
  int p = 1;
  int dim = 1;
  int threshold_lag = 1;
  double threshold = 0.0;
  bool intercept = false;
};

/// Tag-dispatched factory; throws std::invalid_argument on an unknown tag.
ResidualModel builtin_model(const ModelSpec& spec);

}  // namespace mddest
