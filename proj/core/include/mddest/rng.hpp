#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace mddest {

/// Standard normal quantile (inverse CDF), accurate to near machine
/// precision via a rational approximation plus one Halley refinement.
double normal_quantile(double p);

/// Splittable deterministic random stream.  A stream is identified by
/// (seed, stream); distinct identifiers yield decorrelated sequences, so
/// replication r of a simulation can draw from stream r of the master seed
/// without any cross-replication coupling.  Normal deviates use the
/// inverse-CDF transform throughout the project, so every consumer sees the
/// same draw sequence regardless of platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  double uniform();        // [0, 1)
  double uniform_open();   // (0, 1)
  double normal();
  double uniform_ab(double a, double b);
  double student_t(int dof);  // normal / sqrt(chi2(dof)/dof)
  Eigen::VectorXd normal_vector(int n);

 private:
  std::uint64_t state_;
};

/// Hash-combine up to three indices into a substream identifier.
std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace mddest
