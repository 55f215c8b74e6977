#include "mddest/distance.hpp"

namespace mddest {

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index s = t + 1; s < n; ++s) {
      double v = (points.row(t) - points.row(s)).norm();
      d(t, s) = v;
      d(s, t) = v;
    }
  }
  return d;
}

DistanceMatrix distance_matrix(const Sample& sample) {
  return DistanceMatrix{pairwise_distances(sample.x)};
}

}  // namespace mddest
