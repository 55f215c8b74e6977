#include "mddest/quadrature.hpp"

#include "mddest/mdd.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mddest {

double log_gamma(double x) {
  if (!(x > 0.0)) {
    throw std::invalid_argument("log_gamma: requires x > 0");
  }
  // Lanczos, g = 7, 9 terms.
  static const double coef[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,       -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  double xx = x - 1.0;
  double a = coef[0];
  double t = xx + 7.5;
  for (int i = 1; i < 9; ++i) a += coef[i] / (xx + static_cast<double>(i));
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xx + 0.5) * std::log(t) - t + std::log(a);
}

WeightFunction weight_function(int q) {
  if (q < 1) throw std::invalid_argument("weight_function: q must be positive");
  double cq = std::exp(0.5 * (1.0 + q) * std::log(std::numbers::pi) -
                       log_gamma(0.5 * (1.0 + q)));
  return WeightFunction{q, cq};
}

double WeightFunction::density(const Eigen::VectorXd& s) const {
  double norm = s.norm();
  if (norm == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (c_q * std::pow(norm, 1 + q));
}

CharProcessGrid char_process(const ResidualModel& model, const Sample& sample,
                             const Eigen::VectorXd& theta, const Eigen::MatrixXd& s_points) {
  if (s_points.cols() != sample.q()) {
    throw std::invalid_argument("char_process: s points have wrong dimension");
  }
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd a = centered_residuals(model, sample, theta);

  CharProcessGrid grid;
  grid.s_points = s_points;
  grid.values.reserve(static_cast<std::size_t>(s_points.rows()));
  for (Eigen::Index p = 0; p < s_points.rows(); ++p) {
    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(model.l);
    for (Eigen::Index t = 0; t < n; ++t) {
      double phase = s_points.row(p).dot(sample.x.row(t));
      std::complex<double> e(std::cos(phase), std::sin(phase));
      acc += a.row(t).transpose().cast<std::complex<double>>() * e;
    }
    grid.values.push_back(acc / static_cast<double>(n));
  }
  return grid;
}

namespace {

// Sine integral Si(x) = int_0^x sin(u)/u du, rational approximations with
// relative error near machine precision (power-series form below 4, the
// f/g auxiliary form above).
double sine_integral(double x) {
  if (x < 0.0) return -sine_integral(-x);
  if (x <= 4.0) {
    double x2 = x * x;
    double num =
        1.0 +
        x2 * (-4.54393409816329991e-2 +
              x2 * (1.15457225751016682e-3 +
                    x2 * (-1.41018536821330254e-5 +
                          x2 * (9.43280809438713025e-8 +
                                x2 * (-3.53201978997168357e-10 +
                                      x2 * (7.08240282274875911e-13 +
                                            x2 * (-6.05338212010422477e-16)))))));
    double den =
        1.0 + x2 * (1.01162145739225565e-2 +
                    x2 * (4.99175116169755106e-5 +
                          x2 * (1.55654986308745614e-7 +
                                x2 * (3.28067571055789734e-10 +
                                      x2 * (4.50490975753865810e-13 +
                                            x2 * (3.21107051193712168e-16))))));
    return x * num / den;
  }
  double y = 1.0 / (x * x);
  double fnum =
      1.0 + y * (7.44437068161936700618e2 +
                 y * (1.96396372895146869801e5 +
                      y * (2.37750310125431834034e7 +
                           y * (1.43073403821274636888e9 +
                                y * (4.33736238870432522765e10 +
                                     y * (6.40533830574022022911e11 +
                                          y * (4.20968180571076940208e12 +
                                               y * (1.00795182980368574617e13 +
                                                    y * (4.94816688199951963482e12 +
                                                         y * (-4.94701168645415959931e11))))))))));
  double fden =
      1.0 + y * (7.46437068161927678031e2 +
                 y * (1.97865247031583951450e5 +
                      y * (2.41535670165126845144e7 +
                           y * (1.47478952192985464958e9 +
                                y * (4.58595115847765779830e10 +
                                     y * (7.08501308149515401563e11 +
                                          y * (5.06084464593475076774e12 +
                                               y * (1.43468549171581016479e13 +
                                                    y * (1.11535493509914254097e13)))))))));
  double gnum =
      1.0 + y * (8.13595201151686150e2 +
                 y * (2.35239181626478200e5 +
                      y * (3.12557570795778731e7 +
                           y * (2.06297595146763354e9 +
                                y * (6.83052205423625007e10 +
                                     y * (1.09049528450362786e12 +
                                          y * (7.57664583257834349e12 +
                                               y * (1.81004487464664575e13 +
                                                    y * (6.43291613143049485e12 +
                                                         y * (-1.36517137670871689e12))))))))));
  double gden =
      1.0 + y * (8.19595201151451564e2 +
                 y * (2.40036752835578777e5 +
                      y * (3.26026661647090822e7 +
                           y * (2.23355543278099360e9 +
                                y * (7.87465017341829930e10 +
                                     y * (1.39866710696414565e12 +
                                          y * (1.17164723371736605e13 +
                                               y * (4.01839087307656620e13 +
                                                    y * (3.99653257887490811e13)))))))));
  double f = fnum / fden / x;
  double g = gnum / gden / (x * x);
  return 0.5 * std::numbers::pi - f * std::cos(x) - g * std::sin(x);
}

// int_S^inf cos(s delta) / (pi s^2) ds, the exact tail of one residual pair
// beyond the quadrature truncation.
double pair_tail(double delta, double s_max) {
  if (delta == 0.0) return 1.0 / (std::numbers::pi * s_max);
  double xs = s_max * delta;
  double si_rem = 0.5 * std::numbers::pi - sine_integral(xs);
  return (std::cos(xs) / s_max - delta * si_rem) / std::numbers::pi;
}

// |G_n(s)|^2 for scalar s, from precomputed centered residuals and x values.
double g_squared(const Eigen::MatrixXd& a, const Eigen::VectorXd& x, double s) {
  const Eigen::Index n = a.rows();
  const Eigen::Index l = a.cols();
  double total = 0.0;
  for (Eigen::Index j = 0; j < l; ++j) {
    double re = 0.0, im = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      re += a(t, j) * std::cos(s * x[t]);
      im += a(t, j) * std::sin(s * x[t]);
    }
    total += re * re + im * im;
  }
  return total / (static_cast<double>(n) * static_cast<double>(n));
}

struct GK15 {
  double integral;
  double error;
};

// Gauss-Kronrod 7-15 nodes/weights on [-1, 1].
GK15 gauss_kronrod_15(const std::function<double(double)>& f, double lo, double hi) {
  static const double nodes[8] = {0.0,
                                  0.2077849550078985,
                                  0.4058451513773972,
                                  0.5860872354676911,
                                  0.7415311855993945,
                                  0.8648644233597691,
                                  0.9491079123427585,
                                  0.9914553711208126};
  static const double wk[8] = {0.2094821410847278, 0.2044329400752989,
                               0.1903505780647854, 0.1690047266392679,
                               0.1406532597155259, 0.1047900103222502,
                               0.0630920926299786, 0.0229353220105292};
  static const double wg[4] = {0.4179591836734694, 0.3818300505051189,
                               0.2797053914892767, 0.1294849661688697};
  double mid = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  double f_mid = f(mid);
  double kron = wk[0] * f_mid;
  double gauss = wg[0] * f_mid;
  for (int i = 1; i < 8; ++i) {
    double fp = f(mid + half * nodes[i]);
    double fm = f(mid - half * nodes[i]);
    kron += wk[i] * (fp + fm);
    if (i % 2 == 0) gauss += wg[i / 2] * (fp + fm);
  }
  kron *= half;
  gauss *= half;
  return {kron, std::abs(kron - gauss)};
}

}  // namespace

double mdd_via_quadrature(const ResidualModel& model, const Sample& sample,
                          const Eigen::VectorXd& theta, const QuadratureConfig& config) {
  if (sample.q() != 1) {
    throw std::invalid_argument("mdd_via_quadrature: only scalar conditioning (q = 1)");
  }
  const Eigen::Index n = sample.n();
  Eigen::MatrixXd a = centered_residuals(model, sample, theta);
  Eigen::VectorXd x = sample.x.col(0);

  const double pi = std::numbers::pi;
  auto integrand = [&](double s) { return g_squared(a, x, s) / (pi * s * s); };

  // [0, eps): G_n(s) = i s A - s^2 B / 2 - i s^3 C / 6 + ..., so the
  // integrand is (||A||^2 - s^2 (A'C/3 - ||B||^2/4)) / pi + O(s^4).
  Eigen::VectorXd ma = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd mb = Eigen::VectorXd::Zero(a.cols());
  Eigen::VectorXd mc = Eigen::VectorXd::Zero(a.cols());
  for (Eigen::Index t = 0; t < n; ++t) {
    ma += a.row(t).transpose() * x[t];
    mb += a.row(t).transpose() * x[t] * x[t];
    mc += a.row(t).transpose() * x[t] * x[t] * x[t];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  mc /= static_cast<double>(n);
  const double eps = config.eps;
  double inner = (ma.squaredNorm() * eps -
                  (ma.dot(mc) / 3.0 - mb.squaredNorm() / 4.0) * eps * eps * eps / 3.0) / pi;

  // Initial panels no wider than about a quarter oscillation of the fastest
  // cos(s * x) term, then adaptive bisection on the GK15 error estimate.
  double x_range = x.maxCoeff() - x.minCoeff();
  double panel = x_range > 0.0 ? pi / (2.0 * x_range) : (config.s_max - eps);
  panel = std::min(panel, config.s_max - eps);

  struct Segment {
    double lo, hi;
    GK15 est;
    int depth;
  };
  std::vector<Segment> segments;
  for (double lo = eps; lo < config.s_max;) {
    double hi = std::min(lo + panel, config.s_max);
    segments.push_back({lo, hi, gauss_kronrod_15(integrand, lo, hi), 0});
    lo = hi;
  }

  double total = inner;
  for (const auto& seg : segments) total += seg.est.integral;
  double tol = config.rel_tol * std::max(std::abs(total), 1e-14);

  std::vector<Segment> work = std::move(segments);
  double integral = 0.0;
  double length = config.s_max - eps;
  while (!work.empty()) {
    Segment seg = work.back();
    work.pop_back();
    double budget = tol * (seg.hi - seg.lo) / length;
    if (seg.est.error <= budget || seg.depth >= config.max_depth) {
      if (seg.depth >= config.max_depth && seg.est.error > 1e3 * budget) {
        throw std::runtime_error("mdd_via_quadrature: failed to converge");
      }
      integral += seg.est.integral;
      continue;
    }
    double mid = 0.5 * (seg.lo + seg.hi);
    work.push_back({seg.lo, mid, gauss_kronrod_15(integrand, seg.lo, mid), seg.depth + 1});
    work.push_back({mid, seg.hi, gauss_kronrod_15(integrand, mid, seg.hi), seg.depth + 1});
  }

  // Exact truncation correction: |G_n(s)|^2 expands into pairwise cosines,
  // so the mass beyond s_max is a known cosine-integral tail per pair (the
  // diagonal pairs do not oscillate and dominate it).
  double tail = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index s = 0; s < n; ++s) {
      double delta = std::abs(x[t] - x[s]);
      tail += a.row(t).dot(a.row(s)) * pair_tail(delta, config.s_max);
    }
  }
  tail /= static_cast<double>(n) * static_cast<double>(n);

  // Even integrand: double for the negative frequency half-line.
  return 2.0 * (inner + integral + tail);
}

}  // namespace mddest
