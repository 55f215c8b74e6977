#include "mddest/types.hpp"

#include <cmath>
#include <stdexcept>

namespace mddest {

std::vector<Diagnostic> validate_sample(const Sample& sample, int d) {
  if (sample.z.rows() != sample.x.rows()) {
    throw std::invalid_argument("sample: z has " + std::to_string(sample.z.rows()) +
                                " rows but x has " + std::to_string(sample.x.rows()));
  }
  if (sample.n() < 2) {
    throw std::invalid_argument("sample: need at least 2 rows, got " +
                                std::to_string(sample.n()));
  }
  if (!sample.z.allFinite()) {
    throw std::invalid_argument("sample: non-finite entry in z");
  }
  if (!sample.x.allFinite()) {
    throw std::invalid_argument("sample: non-finite entry in x");
  }

  std::vector<Diagnostic> warnings;
  for (Eigen::Index j = 0; j < sample.q(); ++j) {
    double lo = sample.x.col(j).minCoeff();
    double hi = sample.x.col(j).maxCoeff();
    if (lo == hi) {
      warnings.push_back({"degenerate conditioning variable: x column " + std::to_string(j) +
                          " is constant, all pairwise distances in it are zero"});
    }
  }
  if (d > 0 && sample.n() < d + 2) {
    warnings.push_back({"sample size " + std::to_string(sample.n()) +
                        " is below d + 2 = " + std::to_string(d + 2)});
  }
  return warnings;
}

std::string to_string(EstimatorMethod method) {
  switch (method) {
    case EstimatorMethod::Mdd: return "mdd";
    case EstimatorMethod::MddClosedForm: return "mdd-closed-form";
    case EstimatorMethod::MddTwoStep: return "mdd-two-step";
    case EstimatorMethod::Dl: return "dl";
    case EstimatorMethod::Icm: return "icm";
  }
  return "unknown";
}

}  // namespace mddest
