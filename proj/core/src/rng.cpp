#include "mddest/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace mddest {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer; also used as the hash for stream derivation.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie strictly in (0, 1)");
  }
  // Acklam's rational approximation, then one Halley step against erfc.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00, 2.938163982698783e+00};
  static const double dd[] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
  }
  // Halley refinement: e = Phi(x) - p, u = e / phi(x).
  const double sqrt2pi = 2.5066282746310005;
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * sqrt2pi * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed ^ mix64(stream * 0xA24BAED4963EE407ULL + kGolden))) {}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return normal_quantile(uniform_open()); }

double Rng::uniform_ab(double a, double b) { return a + (b - a) * uniform(); }

double Rng::student_t(int dof) {
  double z = normal();
  double w = 0.0;
  for (int i = 0; i < dof; ++i) {
    double g = normal();
    w += g * g;
  }
  return z / std::sqrt(w / static_cast<double>(dof));
}

Eigen::VectorXd Rng::normal_vector(int n) {
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) out[i] = normal();
  return out;
}

std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = mix64(a + kGolden);
  h = mix64(h ^ (b + 0xD6E8FEB86659FD93ULL));
  h = mix64(h ^ (c + 0xCA9B0C6F0E2D9A35ULL));
  return h;
}

}  // namespace mddest
