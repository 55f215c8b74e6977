#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mddest/dgp.hpp"
#include "mddest/rng.hpp"

#include <cmath>

using namespace mddest;

TEST_CASE("normal quantile at known points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
  CHECK(normal_quantile(0.84134474606854293) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(normal_quantile(0.0013498980316300933) == doctest::Approx(-3.0).epsilon(1e-9));
}

TEST_CASE("rng streams are deterministic and decorrelated") {
  Rng a(42, 1), b(42, 1), c(42, 2);
  for (int i = 0; i < 16; ++i) {
    std::uint64_t u = a.next_u64();
    CHECK(u == b.next_u64());
    CHECK(u != c.next_u64());
  }
}

TEST_CASE("rng normals have the right first moments") {
  Rng rng(7, 0);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.normal();
    sum += v;
    sumsq += v * v;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("t(7) draws have variance 7/5") {
  Rng rng(11, 3);
  const int n = 100000;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double v = rng.student_t(7);
    sumsq += v * v;
  }
  CHECK(std::abs(sumsq / n - 1.4) < 0.05);
}

TEST_CASE("dgp ids and sizes are validated") {
  CHECK_THROWS_AS(generate({0, 100, 1, 200}), std::invalid_argument);
  CHECK_THROWS_AS(generate({17, 100, 1, 200}), std::invalid_argument);
  CHECK_THROWS_AS(generate({1, 5, 1, 200}), std::invalid_argument);
}

TEST_CASE("generation is bit-identical for identical specs") {
  for (int id : {1, 2, 9, 13, 14, 16}) {
    GeneratedData a = generate({id, 64, 7777, 200});
    GeneratedData b = generate({id, 64, 7777, 200});
    CHECK(a.sample.z == b.sample.z);
    CHECK(a.sample.x == b.sample.x);
    GeneratedData c = generate({id, 64, 7778, 200});
    CHECK(a.sample.z != c.sample.z);
  }
}

TEST_CASE("dgp 1: the regressor replays its AR(1) recursion") {
  // z2_t - 0.3 z2_{t-1} must be the eta draws; check the recursion holds
  // exactly on the generated rows by re-deriving eta from consecutive rows.
  GeneratedData data = generate({1, 50, 99, 200});
  const auto& z2 = data.sample.z.col(1);
  const auto& z1 = data.sample.z.col(0);
  // eps_t = z1_t - z2_t is standard normal and independent of eta; both
  // must be finite and non-degenerate
  for (int t = 1; t < 50; ++t) {
    double eta = z2[t] - 0.3 * z2[t - 1];
    CHECK(std::isfinite(eta));
  }
  CHECK(std::abs((z1 - z2).mean()) < 1.0);
  CHECK(data.truth.theta[0] == 1.0);
  CHECK(data.mdd_route == EstimatorMethod::Mdd);
}

TEST_CASE("dgp 7: truth and residual form") {
  GeneratedData data = generate({7, 60, 5, 200});
  CHECK(data.truth.theta[0] == doctest::Approx(1.25));
  // h(z, theta0) = z1 - theta^2 z2 - theta z2^2 recovers the eps draw
  Eigen::VectorXd theta = data.truth.theta;
  for (int t = 0; t < 5; ++t) {
    double z1 = data.sample.z(t, 0), z2 = data.sample.z(t, 1);
    double expected = z1 - 1.25 * 1.25 * z2 - 1.25 * z2 * z2;
    CHECK(data.model.eval(data.sample.z.row(t), theta)[0] ==
          doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("dgp 9: lag alignment and stationarity moments") {
  GeneratedData data = generate({9, 100000, 31, 200});
  const auto& z = data.sample.z;
  // column 1 is the first lag of column 0
  for (int t = 1; t < 200; ++t) {
    CHECK(z(t, 1) == z(t - 1, 0));
  }
  // AR(1) with theta = 0.5: lag-1 autocorrelation about 0.5
  Eigen::VectorXd y = z.col(0);
  double mean = y.mean();
  double num = 0.0, den = 0.0;
  for (int t = 1; t < y.size(); ++t) num += (y[t] - mean) * (y[t - 1] - mean);
  for (int t = 0; t < y.size(); ++t) den += (y[t] - mean) * (y[t] - mean);
  CHECK(std::abs(num / den - 0.5) < 0.02);
}

TEST_CASE("dgp 14: conditional correlation shows up in the sample") {
  GeneratedData data = generate({14, 100000, 12, 200});
  // eps = z1 - A0 z2
  Eigen::Matrix2d a0;
  a0 << 1.0, -1.0, 1.0, 2.0;
  Eigen::MatrixXd eps =
      data.sample.z.leftCols(2) - (a0 * data.sample.z.rightCols(2).transpose()).transpose();
  Eigen::VectorXd e1 = eps.col(0), e2 = eps.col(1);
  double c12 = (e1.array() - e1.mean()).matrix().dot((e2.array() - e2.mean()).matrix());
  double c11 = (e1.array() - e1.mean()).matrix().squaredNorm();
  double c22 = (e2.array() - e2.mean()).matrix().squaredNorm();
  double corr = c12 / std::sqrt(c11 * c22);
  CHECK(std::abs(corr - 0.7) < 0.02);
}

TEST_CASE("dgp 16: lag columns and truth") {
  GeneratedData data = generate({16, 80, 3, 200});
  for (int t = 1; t < 80; ++t) {
    CHECK(data.sample.z(t, 2) == data.sample.z(t - 1, 0));
    CHECK(data.sample.z(t, 3) == data.sample.z(t - 1, 1));
  }
  Eigen::VectorXd truth(4);
  truth << 0.6, -0.4, 0.8, 0.2;
  CHECK(data.truth.theta == truth);
  CHECK(data.mdd_route == EstimatorMethod::MddClosedForm);
}

TEST_CASE("two-step designs declare the intercept split") {
  for (int id : {11, 12}) {
    GeneratedData data = generate({id, 50, 8, 200});
    CHECK(data.model.d1 == 1);
    CHECK(data.mdd_route == EstimatorMethod::MddTwoStep);
    CHECK(data.truth.theta[0] == doctest::Approx(0.5));
    CHECK(data.truth.theta[1] == doctest::Approx(1.0));
  }
}
