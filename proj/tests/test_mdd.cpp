#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mddest/builtin_models.hpp"
#include "mddest/distance.hpp"
#include "mddest/mdd.hpp"
#include "mddest/quadrature.hpp"
#include "mddest/rng.hpp"

#include "test_helpers.hpp"

#include <cmath>
#include <numbers>

using namespace mddest;

namespace {

// Model whose residual is read straight from the sample row, h = z (any l).
ResidualModel identity_model(int l) {
  ResidualModel model;
  model.l = l;
  model.d = 1;
  model.eval = [l](RowView z, const Eigen::VectorXd&) {
    return Eigen::VectorXd(z.head(l).transpose());
  };
  model.jac = [l](RowView, const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(l, 1); };
  return model;
}

}  // namespace

TEST_CASE("distance matrix on hand points") {
  Sample s;
  s.z.resize(2, 1);
  s.z << 1.0, 3.0;
  s.x.resize(2, 1);
  s.x << 0.0, 2.0;
  DistanceMatrix d = distance_matrix(s);
  CHECK(d.d(0, 0) == 0.0);
  CHECK(d.d(1, 1) == 0.0);
  CHECK(d.d(0, 1) == doctest::Approx(2.0));
  CHECK(d.d(1, 0) == doctest::Approx(2.0));

  Sample s2;
  s2.z.resize(2, 1);
  s2.z.setZero();
  s2.x.resize(2, 2);
  s2.x << 0.0, 0.0, 3.0, 4.0;
  CHECK(distance_matrix(s2).d(0, 1) == doctest::Approx(5.0));
}

TEST_CASE("distance matrix equals the brute-force pair loop") {
  Sample s = test::random_sample(10, 1, 3, 42);
  DistanceMatrix d = distance_matrix(s);
  for (int t = 0; t < 10; ++t) {
    for (int j = 0; j < 10; ++j) {
      CHECK(d.d(t, j) == doctest::Approx((s.x.row(t) - s.x.row(j)).norm()).epsilon(1e-15));
    }
  }
}

TEST_CASE("distance matrix invariants on random triples") {
  Sample s = test::random_sample(25, 1, 2, 43);
  DistanceMatrix d = distance_matrix(s);
  CHECK(d.d.diagonal().isZero(0.0));
  CHECK((d.d - d.d.transpose()).norm() == 0.0);
  CHECK(d.d.minCoeff() >= 0.0);
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    int a = static_cast<int>(rng.next_u64() % 25);
    int b = static_cast<int>(rng.next_u64() % 25);
    int c = static_cast<int>(rng.next_u64() % 25);
    CHECK(d.d(a, c) <= d.d(a, b) + d.d(b, c) + 1e-12);
  }
}

TEST_CASE("mdd objective on the two-point hand instance") {
  // h = (1, 3), X = (0, 2): (h1 - h2)^2 |X1 - X2| / 8 = 1.
  Sample s;
  s.z.resize(2, 1);
  s.z << 1.0, 3.0;
  s.x.resize(2, 1);
  s.x << 0.0, 2.0;
  ResidualModel model = identity_model(1);
  DistanceMatrix d = distance_matrix(s);
  CHECK(mdd_objective(model, s, d, Eigen::VectorXd::Zero(1)) == doctest::Approx(1.0));
}

TEST_CASE("constant residuals give exactly zero") {
  Sample s = test::random_sample(20, 1, 1, 3);
  s.z.col(0).setConstant(4.2);
  ResidualModel model = identity_model(1);
  DistanceMatrix d = distance_matrix(s);
  CHECK(mdd_objective(model, s, d, Eigen::VectorXd::Zero(1)) == 0.0);
}

TEST_CASE("mdd objective equals the naive double sum") {
  for (int trial = 0; trial < 5; ++trial) {
    Sample s = test::random_sample(15, 3, 2, 100 + trial);
    ResidualModel model = linear_model(2);
    DistanceMatrix d = distance_matrix(s);
    Eigen::VectorXd theta(2);
    theta << 0.3 + trial, -0.7;
    double fast = mdd_objective(model, s, d, theta);
    double slow = test::mdd_brute_force(model, s, theta);
    CHECK(test::rel_gap(fast, slow) < 1e-12);
  }
}

TEST_CASE("mdd gradient: hand value on the two-point instance") {
  // h_t = z1_t - theta z2_t with z1 = (1, 3), z2 = (0, 1), X = (0, 2):
  // MDD_n(theta) = (theta - 2)^2 / 4, so the gradient at 0 is -1.
  Sample s;
  s.z.resize(2, 2);
  s.z << 1.0, 0.0, 3.0, 1.0;
  s.x.resize(2, 1);
  s.x << 0.0, 2.0;
  ResidualModel model = linear_model(1);
  DistanceMatrix d = distance_matrix(s);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  CHECK(mdd_gradient(model, s, d, theta)[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(mdd_objective(model, s, d, theta) == doctest::Approx(1.0));
}

TEST_CASE("mdd gradient vanishes when h is free of theta") {
  Sample s = test::random_sample(12, 2, 1, 5);
  ResidualModel model = identity_model(2);
  DistanceMatrix d = distance_matrix(s);
  CHECK(mdd_gradient(model, s, d, Eigen::VectorXd::Zero(1)).norm() == 0.0);
}

TEST_CASE("mdd gradient matches finite differences across model families") {
  struct Case {
    ResidualModel model;
    int k;
  };
  std::vector<Case> cases;
  cases.push_back({linear_model(1), 2});
  cases.push_back({sin_index(), 2});
  cases.push_back({quadratic_index(), 2});
  cases.push_back({multivariate_linear(2, 2), 4});

  int id = 0;
  for (const auto& c : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      Sample s = test::random_sample(30, c.k, 1, 900 + 10 * id + trial);
      DistanceMatrix d = distance_matrix(s);
      Rng rng(31 + trial, id);
      Eigen::VectorXd theta = rng.normal_vector(c.model.d);
      Eigen::VectorXd analytic = mdd_gradient(c.model, s, d, theta);
      Eigen::VectorXd fd = test::fd_gradient(
          [&](const Eigen::VectorXd& th) { return mdd_objective(c.model, s, d, th); }, theta);
      INFO("case ", id, " trial ", trial);
      CHECK((analytic - fd).norm() / std::max(1.0, fd.norm()) < 1e-6);
    }
    ++id;
  }
}

TEST_CASE("icm objective matches the naive double sum and sees shifts") {
  Sample s = test::random_sample(15, 2, 1, 77);
  ResidualModel model = linear_model(1);
  DistanceMatrix d = distance_matrix(s);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.4);
  CHECK(test::rel_gap(icm_objective(model, s, d, theta), test::icm_brute_force(model, s, theta)) <
        1e-12);

  // all-zero residuals: exact zero
  ResidualModel zero = identity_model(1);
  Sample s0 = s;
  s0.z.col(0).setZero();
  CHECK(icm_objective(zero, s0, d, Eigen::VectorXd::Zero(1)) == 0.0);

  // a constant shift changes ICM but not MDD
  ResidualModel shifted = linear_model(1);
  auto base_eval = shifted.eval;
  shifted.eval = [base_eval](RowView z, const Eigen::VectorXd& th) {
    return Eigen::VectorXd(base_eval(z, th).array() + 1.7);
  };
  double icm_gap = std::abs(icm_objective(shifted, s, d, theta) - icm_objective(model, s, d, theta));
  double mdd_gap = std::abs(mdd_objective(shifted, s, d, theta) - mdd_objective(model, s, d, theta));
  CHECK(icm_gap > 1e-3);
  CHECK(mdd_gap < 1e-12);
}

TEST_CASE("shift invariance and nonnegativity across random draws") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    Sample s = test::random_sample(18, 2, 1, 500 + trial);
    ResidualModel model = linear_model(1);
    DistanceMatrix d = distance_matrix(s);
    Eigen::VectorXd theta = rng.normal_vector(1);
    double base = mdd_objective(model, s, d, theta);
    CHECK(base >= -1e-12);

    double shift = rng.normal() * 10.0;
    ResidualModel shifted = model;
    auto base_eval = model.eval;
    shifted.eval = [base_eval, shift](RowView z, const Eigen::VectorXd& th) {
      return Eigen::VectorXd(base_eval(z, th).array() + shift);
    };
    CHECK(test::rel_gap(mdd_objective(shifted, s, d, theta), base) < 1e-12);
  }
}

TEST_CASE("centered residual rows sum to zero") {
  Sample s = test::random_sample(40, 3, 1, 9);
  ResidualModel model = multivariate_linear(2, 1);
  Eigen::VectorXd theta(2);
  theta << 0.5, -1.5;
  Eigen::MatrixXd a = centered_residuals(model, s, theta);
  CHECK(a.colwise().sum().norm() < 1e-10);
}

TEST_CASE("argmin is invariant to rescaling the conditioning variable") {
  // Positive homogeneity: scaling X scales the objective but not the
  // minimizer of an affine model.
  Sample s = test::random_sample(40, 2, 1, 321);
  s.z.col(0) = 1.3 * s.z.col(1) + 0.2 * test::random_sample(40, 1, 1, 99).z.col(0);
  ResidualModel model = linear_model(1);
  DistanceMatrix d1 = distance_matrix(s);

  Sample scaled = s;
  scaled.x *= 7.5;
  DistanceMatrix d2 = distance_matrix(scaled);

  // quadratic objective: solve by scanning the stationarity point via the
  // gradient at two thetas (gradient is affine in theta)
  auto argmin = [&](const Sample& sample, const DistanceMatrix& dm) {
    double g0 = mdd_gradient(model, sample, dm, Eigen::VectorXd::Zero(1))[0];
    double g1 = mdd_gradient(model, sample, dm, Eigen::VectorXd::Ones(1))[0];
    return -g0 / (g1 - g0);
  };
  double t1 = argmin(s, d1);
  double t2 = argmin(scaled, d2);
  CHECK(t1 == doctest::Approx(t2).epsilon(1e-10));
  // and the objective itself scales linearly
  Eigen::VectorXd th = Eigen::VectorXd::Constant(1, t1);
  CHECK(mdd_objective(model, scaled, d2, th) ==
        doctest::Approx(7.5 * mdd_objective(model, s, d1, th)).epsilon(1e-10));
}

TEST_CASE("log_gamma against exact values and the standard library") {
  CHECK(std::abs(log_gamma(1.0)) < 1e-14);
  CHECK(std::abs(log_gamma(2.0)) < 1e-14);
  CHECK(log_gamma(0.5) == doctest::Approx(std::log(std::sqrt(std::numbers::pi))).epsilon(1e-13));
  CHECK(log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-13));
  for (double x : {0.1, 0.7, 1.5, 3.25, 10.3, 42.0}) {
    CHECK(std::abs(log_gamma(x) - std::lgamma(x)) <=
          1e-12 * std::max(1.0, std::abs(std::lgamma(x))));
  }
}

TEST_CASE("weight function constants") {
  CHECK(weight_function(1).c_q == doctest::Approx(std::numbers::pi).epsilon(1e-14));
  // c_2 = pi^{3/2} / Gamma(3/2) = 2 pi
  CHECK(weight_function(2).c_q == doctest::Approx(2.0 * std::numbers::pi).epsilon(1e-13));
  Eigen::VectorXd s1 = Eigen::VectorXd::Constant(1, 2.0);
  CHECK(weight_function(1).density(s1) ==
        doctest::Approx(1.0 / (std::numbers::pi * 4.0)).epsilon(1e-13));
}

TEST_CASE("char process modulus bound") {
  Sample s = test::random_sample(25, 2, 1, 11);
  ResidualModel model = linear_model(1);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.3);
  Eigen::MatrixXd grid(40, 1);
  for (int i = 0; i < 40; ++i) grid(i, 0) = -20.0 + i;
  CharProcessGrid g = char_process(model, s, theta, grid);

  Eigen::MatrixXd a = centered_residuals(model, s, theta);
  double bound = 2.0 * a.rowwise().norm().sum() / static_cast<double>(s.n());
  for (const auto& v : g.values) {
    CHECK(v.norm() <= bound + 1e-12);
  }
}

TEST_CASE("quadrature oracle: two-point instance equals 1") {
  Sample s;
  s.z.resize(2, 1);
  s.z << 1.0, 3.0;
  s.x.resize(2, 1);
  s.x << 0.0, 2.0;
  ResidualModel model = identity_model(1);
  CHECK(std::abs(mdd_via_quadrature(model, s, Eigen::VectorXd::Zero(1)) - 1.0) < 1e-4);
}

TEST_CASE("quadrature oracle: constant residuals integrate to zero") {
  Sample s = test::random_sample(10, 1, 1, 4);
  s.z.col(0).setConstant(2.0);
  ResidualModel model = identity_model(1);
  CHECK(std::abs(mdd_via_quadrature(model, s, Eigen::VectorXd::Zero(1))) < 1e-10);
}

TEST_CASE("quadrature oracle agrees with the double sum on random draws") {
  for (int trial = 0; trial < 5; ++trial) {
    Sample s = test::random_sample(20, 2, 1, 700 + trial);
    ResidualModel model = linear_model(1);
    DistanceMatrix d = distance_matrix(s);
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 0.2 * trial - 0.5);
    double direct = mdd_objective(model, s, d, theta);
    double integral = mdd_via_quadrature(model, s, theta);
    CHECK(std::abs(direct - integral) / std::max(1.0, std::abs(direct)) < 1e-4);
  }
}

TEST_CASE("quadrature rejects vector conditioning") {
  Sample s = test::random_sample(10, 2, 2, 5);
  ResidualModel model = linear_model(1);
  CHECK_THROWS_AS(mdd_via_quadrature(model, s, Eigen::VectorXd::Zero(1)),
                  std::invalid_argument);
}
