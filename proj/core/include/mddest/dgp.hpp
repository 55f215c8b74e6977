#pragma once

#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace mddest {

/// One of the sixteen simulation designs: 1-10 univariate without
/// intercept, 11-12 univariate with intercept, 13-16 bivariate linear /
/// vector AR.  Recursive components (AR, ARCH, GARCH states) start at zero
/// and run burn_in steps before the retained sample.
struct DgpSpec {
  int id = 1;
  int n = 100;
  std::uint64_t seed = 0;
  int burn_in = 200;
};

struct GeneratedData {
  Sample sample;
  ParamVector truth;            // in the reported parameterization
  ResidualModel model;
  EstimatorMethod mdd_route;    // Mdd, MddClosedForm or MddTwoStep
  Eigen::MatrixXd raw;          // observable series, one row per time point
  std::vector<std::string> raw_names;
};

/// Deterministic in (id, n, seed): identical specs produce bit-identical
/// samples.  The returned model and truth make the result self-describing
/// for the simulation driver.
GeneratedData generate(const DgpSpec& spec);

}  // namespace mddest
