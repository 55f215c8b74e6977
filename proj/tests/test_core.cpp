#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mddest/builtin_models.hpp"
#include "mddest/residual_model.hpp"
#include "mddest/types.hpp"

#include "test_helpers.hpp"

#include <stdexcept>

using namespace mddest;

TEST_CASE("validate_sample accepts a clean sample") {
  Sample s = test::random_sample(100, 2, 1, 7);
  CHECK(validate_sample(s).empty());
}

TEST_CASE("validate_sample flags a constant conditioning column") {
  Sample s = test::random_sample(50, 2, 1, 8);
  s.x.col(0).setConstant(3.0);
  auto warnings = validate_sample(s);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].message.find("degenerate conditioning variable") != std::string::npos);
}

TEST_CASE("validate_sample warns when n is below d + 2") {
  Sample s = test::random_sample(10, 2, 1, 9);
  CHECK(validate_sample(s, 9).size() == 1);
  CHECK(validate_sample(s, 8).empty());
}

TEST_CASE("validate_sample rejects shape mismatch and non-finite entries") {
  Sample s = test::random_sample(100, 2, 1, 10);
  Sample bad = s;
  bad.x.conservativeResize(99, 1);
  CHECK_THROWS_AS(validate_sample(bad), std::invalid_argument);

  bad = s;
  bad.z(3, 1) = std::nan("");
  CHECK_THROWS_AS(validate_sample(bad), std::invalid_argument);
}

TEST_CASE("linear model evaluates the textbook point") {
  ResidualModel model = linear_model(1);
  Eigen::RowVectorXd z(2);
  z << 3.0, 2.0;
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(model.eval(z, theta)[0] == doctest::Approx(1.0));
  CHECK(model.jac(z, theta)(0, 0) == doctest::Approx(-2.0));
}

TEST_CASE("sigmoid model at theta = 0") {
  ResidualModel model = sigmoid_index();
  Eigen::RowVectorXd z(2);
  z << 0.0, 5.0;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  CHECK(model.eval(z, theta)[0] == doctest::Approx(-0.5));
  CHECK(model.jac(z, theta)(0, 0) == doctest::Approx(-1.25));
}

TEST_CASE("tar model reproduces the two-regime residual by hand") {
  // p = 2, threshold 0 on y_{t-1}; canonical theta = (c, phi1, phi2,
  // delta0, psi1, psi2) and h = c + m with m defined regime by regime.
  ResidualModel model = tar_model(2, 1, 0.0);
  REQUIRE(model.d == 6);
  REQUIRE(model.d1 == 1);
  Eigen::VectorXd theta(6);
  theta << 0.4, -0.3, 0.2, 1.1, 0.05, -0.1;

  // rows: (y_t, y_{t-1}, y_{t-2})
  Eigen::MatrixXd z(5, 3);
  z << 1.0, -2.0, 0.5,    // lower regime (y_{t-1} = -2 <= 0)
      0.3, 0.0, -1.0,     // boundary: ties go to the lower regime
      -0.7, 1.5, 2.0,     // upper regime
      0.2, 0.1, -0.4,     // upper regime
      0.0, -0.1, 0.0;     // lower regime
  for (int t = 0; t < 5; ++t) {
    double y = z(t, 0), y1 = z(t, 1), y2 = z(t, 2);
    double mean = y1 > 0.0 ? (0.4 + 1.1) + 0.05 * y1 - 0.1 * y2
                           : 0.4 - 0.3 * y1 + 0.2 * y2;
    double expected = mean - y;  // h = fitted mean minus response
    CHECK(model.eval(z.row(t), theta)[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("builtin jacobians match central finite differences") {
  struct Case {
    ResidualModel model;
    int k;
  };
  std::vector<Case> cases;
  cases.push_back({linear_model(2), 3});
  cases.push_back({linear_with_intercept(1), 2});
  cases.push_back({multivariate_linear(2, 2), 4});
  cases.push_back({sin_index(), 2});
  cases.push_back({sigmoid_index(), 2});
  cases.push_back({quadratic_index(), 2});
  cases.push_back({ar_model(2, true), 3});
  cases.push_back({var_model(2, 1, true), 4});
  cases.push_back({tar_model(2, 1, 0.0), 3});

  int case_id = 0;
  for (const auto& c : cases) {
    Sample s = test::random_sample(20, c.k, 1, 100 + case_id);
    double err = max_jacobian_error(c.model, s, Eigen::VectorXd::Zero(c.model.d), 50,
                                    1234 + case_id);
    INFO("case ", case_id);
    CHECK(err < 1e-6);
    ++case_id;
  }
}

TEST_CASE("intercept models carry the shift structure") {
  // h(theta) - h((0, theta2)) must be the same constant in every row.
  for (auto* factory : {+[]() { return linear_with_intercept(1); },
                        +[]() { return ar_model(2, true); },
                        +[]() { return tar_model(1, 1, 0.0); }}) {
    ResidualModel model = factory();
    Sample s = test::random_sample(30, 3, 1, 55);
    Eigen::VectorXd theta = 0.3 * Eigen::VectorXd::LinSpaced(model.d, 1.0, 2.0);
    Eigen::VectorXd zero_theta = theta;
    zero_theta.head(model.d1).setZero();
    Eigen::VectorXd shift =
        model.eval(s.z.row(0), theta) - model.eval(s.z.row(0), zero_theta);
    for (int t = 1; t < 30; ++t) {
      Eigen::VectorXd diff = model.eval(s.z.row(t), theta) - model.eval(s.z.row(t), zero_theta);
      CHECK((diff - shift).norm() < 1e-14);
    }
    // and h = (theta1; 0) + m holds identically
    for (int t = 0; t < 30; ++t) {
      Eigen::VectorXd h = model.eval(s.z.row(t), theta);
      Eigen::VectorXd m = model.m_eval(s.z.row(t), theta.tail(model.d2()));
      Eigen::VectorXd lift = m;
      lift.head(model.d1) += theta.head(model.d1);
      CHECK((h - lift).norm() < 1e-14);
    }
  }
}

TEST_CASE("builtin_model dispatches tags and rejects unknown ones") {
  ModelSpec spec;
  spec.tag = "sigmoid-index";
  CHECK(builtin_model(spec).d == 1);
  spec.tag = "var";
  spec.dim = 2;
  spec.p = 3;
  spec.intercept = true;
  CHECK(builtin_model(spec).d == 2 + 2 * 2 * 3);
  spec.tag = "no-such-model";
  CHECK_THROWS_AS(builtin_model(spec), std::invalid_argument);
}

TEST_CASE("non-finite residuals report the offending row") {
  ResidualModel model = sin_index();
  Sample s = test::random_sample(10, 2, 1, 77);
  s.z(7, 0) = std::numeric_limits<double>::infinity();
  // validate_sample would reject this sample; eval_residuals is the deeper
  // guard used when theta itself produces the blow-up.
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
  CHECK_THROWS_WITH_AS(eval_residuals(model, s, theta),
                       doctest::Contains("row 7"), std::runtime_error);
}
