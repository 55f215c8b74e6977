#pragma once

#include "mddest/types.hpp"

#include <Eigen/Dense>

namespace mddest {

/// Pairwise Euclidean distances of the conditioning variables,
/// d(t, t') = ||X_t - X_t'||.  Theta-independent, so it is computed once per
/// sample and shared across all objective and variance evaluations.
struct DistanceMatrix {
  Eigen::MatrixXd d;

  Eigen::Index n() const { return d.rows(); }
};

DistanceMatrix distance_matrix(const Sample& sample);

/// Distances between rows of an arbitrary point matrix (one point per row).
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

}  // namespace mddest
