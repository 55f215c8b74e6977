#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mddest/builtin_models.hpp"
#include "mddest/dgp.hpp"
#include "mddest/estimators.hpp"
#include "mddest/inference.hpp"
#include "mddest/rng.hpp"

#include "test_helpers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

using namespace mddest;

namespace {

// Brute-force u(x_s) = (1/n) sum_t (jac_t - jbar) d(t, s).
std::vector<Eigen::MatrixXd> u_hat_brute(const ResidualModel& model, const Sample& sample,
                                         const Eigen::VectorXd& theta) {
  const Eigen::Index n = sample.n();
  std::vector<Eigen::MatrixXd> jacs;
  for (Eigen::Index t = 0; t < n; ++t) jacs.push_back(model.jac(sample.z.row(t), theta));
  Eigen::MatrixXd jbar = Eigen::MatrixXd::Zero(model.l, model.d);
  for (const auto& j : jacs) jbar += j;
  jbar /= static_cast<double>(n);
  std::vector<Eigen::MatrixXd> u;
  for (Eigen::Index s = 0; s < n; ++s) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(model.l, model.d);
    for (Eigen::Index t = 0; t < n; ++t) {
      acc += (jacs[static_cast<std::size_t>(t)] - jbar) *
             (sample.x.row(t) - sample.x.row(s)).norm();
    }
    u.push_back(acc / static_cast<double>(n));
  }
  return u;
}

bool psd_within(const Eigen::MatrixXd& m, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff() >= -tol;
}

}  // namespace

TEST_CASE("u_hat vanishes for constant jacobians") {
  Sample s = test::random_sample(15, 2, 1, 3);
  ResidualModel model = linear_model(1);
  model.jac = [](RowView, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, -2.5);
  };
  auto u = u_hat(model, s, distance_matrix(s), Eigen::VectorXd::Zero(1));
  for (const auto& m : u) CHECK(m.norm() == 0.0);
}

TEST_CASE("u_hat: three-point hand sum") {
  Sample s;
  s.z.resize(3, 2);
  s.z << 0.0, 1.0, 0.0, 2.0, 0.0, 4.0;
  s.x.resize(3, 1);
  s.x << 0.0, 1.0, 3.0;
  ResidualModel model = linear_model(1);  // jac_t = -z2_t
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  auto u = u_hat(model, s, distance_matrix(s), theta);
  // centered jacs: -(1, 2, 4) + 7/3 = (4/3, 1/3, -5/3)
  // u(x_1) = (1/3)[4/3*0 + 1/3*1 + (-5/3)*3] = (1/3)(1/3 - 5) = -14/9
  CHECK(u[0](0, 0) == doctest::Approx(-14.0 / 9.0).epsilon(1e-13));
  // u(x_2) = (1/3)[4/3*1 + 0 + (-5/3)*2] = (1/3)(4/3 - 10/3) = -2/3
  CHECK(u[1](0, 0) == doctest::Approx(-2.0 / 3.0).epsilon(1e-13));
  // u(x_3) = (1/3)[4/3*3 + 1/3*2 + 0] = (1/3)(14/3) = 14/9
  CHECK(u[2](0, 0) == doctest::Approx(14.0 / 9.0).epsilon(1e-13));
}

TEST_CASE("u_hat equals the brute-force double loop") {
  Sample s = test::random_sample(20, 4, 2, 12);
  ResidualModel model = multivariate_linear(2, 2);
  Eigen::VectorXd theta(4);
  theta << 0.1, -0.2, 0.3, 0.4;
  auto fast = u_hat(model, s, distance_matrix(s), theta);
  auto slow = u_hat_brute(model, s, theta);
  for (std::size_t i = 0; i < fast.size(); ++i) {
    CHECK((fast[i] - slow[i]).norm() < 1e-12);
  }
}

TEST_CASE("mdd sandwich covariance is symmetric PSD with matching errors") {
  GeneratedData data = generate({1, 150, 321, 200});
  EstimateResult res = estimate_mdd(data.model, data.sample);
  MddVcov v =
      vcov_mdd(data.model, data.sample, distance_matrix(data.sample), res.theta_hat.theta);
  CHECK((v.vcov - v.vcov.transpose()).norm() < 1e-8);
  CHECK(psd_within(v.vcov, 1e-10));
  for (int i = 0; i < v.vcov.rows(); ++i) {
    CHECK(v.std_errors[i] == doctest::Approx(std::sqrt(v.vcov(i, i))));
  }
}

TEST_CASE("mdd sandwich rejects a constant-jacobian model") {
  Sample s = test::random_sample(25, 2, 1, 8);
  ResidualModel model = linear_model(1);
  model.jac = [](RowView, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Constant(1, 1, 1.0);
  };
  CHECK_THROWS_WITH_AS(vcov_mdd(model, s, distance_matrix(s), Eigen::VectorXd::Zero(1)),
                       doctest::Contains("near-singular Omega"), std::runtime_error);
}

TEST_CASE("two-step covariance: blocks match the influence sandwich and are PSD") {
  GeneratedData data = generate({12, 120, 77, 200});
  EstimateResult res = estimate_two_step(data.model, data.sample);
  TwoStepVcov v =
      vcov_two_step(data.model, data.sample, distance_matrix(data.sample), res.theta_hat);
  const int d1 = data.model.d1, d2 = data.model.d2();
  CHECK((v.v_hat.topLeftCorner(d1, d1) - v.v1_hat).norm() < 1e-8);
  CHECK((v.v_hat.bottomRightCorner(d2, d2) - v.v2_hat).norm() < 1e-8);
  // V2 block must equal Omega2^-1 Sigma2 Omega2^-1 recomputed by hand
  Eigen::MatrixXd o2i = v.omega2_hat.inverse();
  CHECK((v.v2_hat - o2i * v.sigma2_hat * o2i).norm() < 1e-8);
  CHECK(psd_within(v.v_hat, 1e-10));
  CHECK(psd_within(v.sigma1_hat, 1e-10));
  CHECK(psd_within(v.sigma2_hat, 1e-10));
}

TEST_CASE("theta2 inference is invariant to constant shifts in m") {
  GeneratedData data = generate({11, 90, 5, 200});
  EstimateResult res = estimate_two_step(data.model, data.sample);

  ResidualModel shifted = data.model;
  auto m_eval = data.model.m_eval;
  shifted.m_eval = [m_eval](RowView z, const Eigen::VectorXd& th2) {
    return Eigen::VectorXd(m_eval(z, th2).array() + 3.25);
  };
  auto h_eval = data.model.eval;
  shifted.eval = [h_eval](RowView z, const Eigen::VectorXd& th) {
    Eigen::VectorXd h = h_eval(z, th);
    h[0] += 3.25;
    return h;
  };
  auto affine_const = data.model.affine_const;
  shifted.affine_const = [affine_const](RowView z) {
    return Eigen::VectorXd(affine_const(z).array() + 3.25);
  };
  EstimateResult res2 = estimate_two_step(shifted, data.sample);

  // theta2 and its inference identical; theta1 absorbs the shift exactly
  CHECK(std::abs(res.theta_hat.theta[1] - res2.theta_hat.theta[1]) < 1e-12);
  CHECK(std::abs((res.theta_hat.theta[0] - res2.theta_hat.theta[0]) - 3.25) < 1e-12);
  CHECK((res.vcov - res2.vcov).norm() < 1e-10);

  TwoStepVcov a =
      vcov_two_step(data.model, data.sample, distance_matrix(data.sample), res.theta_hat);
  TwoStepVcov b =
      vcov_two_step(shifted, data.sample, distance_matrix(data.sample), res2.theta_hat);
  CHECK((a.omega2_hat - b.omega2_hat).norm() < 1e-12);
  CHECK((a.sigma2_hat - b.sigma2_hat).norm() < 1e-12);
}

TEST_CASE("dl sandwich matches brute-force triple loops") {
  Sample s = test::random_sample(15, 2, 1, 14);
  ResidualModel model = linear_with_intercept(1);
  Eigen::VectorXd theta(2);
  theta << 0.2, 0.8;

  DlVcov v = vcov_dl(model, s, theta);

  const Eigen::Index n = s.n();
  auto leq = [&](Eigen::Index t, Eigen::Index j) {
    return (s.x.row(t).array() <= s.x.row(j).array()).all();
  };
  const int d = model.d;
  std::vector<Eigen::MatrixXd> hh(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(model.l, d);
    for (Eigen::Index t = 0; t < n; ++t) {
      if (leq(t, j)) acc += model.jac(s.z.row(t), theta);
    }
    hh[static_cast<std::size_t>(j)] = acc / static_cast<double>(n);
  }
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < n; ++j) {
    a += hh[static_cast<std::size_t>(j)].transpose() * hh[static_cast<std::size_t>(j)];
  }
  a /= static_cast<double>(n);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::MatrixXd vt = Eigen::MatrixXd::Zero(model.l, d);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (leq(t, j)) vt += hh[static_cast<std::size_t>(j)];
    }
    vt /= static_cast<double>(n);
    Eigen::VectorXd score = vt.transpose() * model.eval(s.z.row(t), theta);
    b += score * score.transpose();
  }
  b /= static_cast<double>(n);

  CHECK((v.a_hat - a).norm() < 1e-12);
  CHECK((v.b_hat - b).norm() < 1e-12);
  Eigen::MatrixXd expected = a.inverse() * b * a.inverse() / static_cast<double>(n);
  CHECK((v.vcov - expected).norm() < 1e-12);
}

TEST_CASE("dl sandwich rejects zero jacobians") {
  Sample s = test::random_sample(20, 2, 1, 15);
  ResidualModel model = linear_model(1);
  model.jac = [](RowView, const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(1, 1); };
  CHECK_THROWS_WITH_AS(vcov_dl(model, s, Eigen::VectorXd::Zero(1)),
                       doctest::Contains("near-singular"), std::runtime_error);
}
