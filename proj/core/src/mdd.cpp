#include "mddest/mdd.hpp"

#include <stdexcept>

namespace mddest {

namespace {

void check_shapes(const Sample& sample, const DistanceMatrix& dist) {
  if (dist.n() != sample.n()) {
    throw std::invalid_argument("distance matrix built from a different sample size");
  }
}

}  // namespace

Eigen::MatrixXd centered_residuals(const ResidualModel& model, const Sample& sample,
                                   const Eigen::VectorXd& theta) {
  Eigen::MatrixXd h = eval_residuals(model, sample, theta);
  h.rowwise() -= h.colwise().mean();
  return h;
}

double mdd_objective(const ResidualModel& model, const Sample& sample,
                     const DistanceMatrix& dist, const Eigen::VectorXd& theta) {
  check_shapes(sample, dist);
  const double n = static_cast<double>(sample.n());
  Eigen::MatrixXd a = centered_residuals(model, sample, theta);
  Eigen::MatrixXd w = dist.d * a;  // w_t = sum_t' a_t' d(t,t')
  return -a.cwiseProduct(w).sum() / (n * n);
}

Eigen::VectorXd mdd_gradient(const ResidualModel& model, const Sample& sample,
                             const DistanceMatrix& dist, const Eigen::VectorXd& theta) {
  return mdd_value_and_gradient(model, sample, dist, theta).gradient;
}

MddEval mdd_value_and_gradient(const ResidualModel& model, const Sample& sample,
                               const DistanceMatrix& dist, const Eigen::VectorXd& theta) {
  check_shapes(sample, dist);
  const Eigen::Index n = sample.n();
  const double nn = static_cast<double>(n) * static_cast<double>(n);

  Eigen::MatrixXd a = centered_residuals(model, sample, theta);
  Eigen::MatrixXd w = dist.d * a;

  MddEval out;
  out.value = -a.cwiseProduct(w).sum() / nn;

  std::vector<Eigen::MatrixXd> jacs = eval_jacobians(model, sample, theta);
  Eigen::MatrixXd jbar = Eigen::MatrixXd::Zero(model.l, model.d);
  for (const auto& j : jacs) jbar += j;
  jbar /= static_cast<double>(n);

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.d);
  for (Eigen::Index t = 0; t < n; ++t) {
    grad.noalias() += (jacs[static_cast<std::size_t>(t)] - jbar).transpose() *
                      w.row(t).transpose();
  }
  out.gradient = -2.0 / nn * grad;
  return out;
}

double icm_objective(const ResidualModel& model, const Sample& sample,
                     const DistanceMatrix& dist, const Eigen::VectorXd& theta) {
  check_shapes(sample, dist);
  const double n = static_cast<double>(sample.n());
  Eigen::MatrixXd h = eval_residuals(model, sample, theta);
  Eigen::MatrixXd w = dist.d * h;
  return -h.cwiseProduct(w).sum() / (n * n);
}

}  // namespace mddest
