#include <doctest.h>

#include "imp/scm.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

using namespace imp;
using imp::test::max_abs_diff;
using imp::test::vec;

namespace {

bool has_violation(const std::vector<SpecIssue>& issues, SpecViolation code) {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const SpecIssue& issue) { return issue.code == code; });
}

}  // namespace

TEST_CASE("toy spec encodes the three-predictor system") {
  const ScmSpec spec = toy_scm({{"0", 0.0}, {"2", 2.0}});
  CHECK(spec.d == 3);
  CHECK(spec.pred_coef(2, 0) == 1.0);
  CHECK(spec.pred_coef.cwiseAbs().sum() == 1.0);
  CHECK(max_abs_diff(spec.child_coef, vec({0, 0, 1})) == 0.0);
  CHECK(max_abs_diff(spec.invariant_coef, vec({0, 1, 0})) == 0.0);
  REQUIRE(spec.env_coef.size() == 2);
  CHECK(spec.env_coef[0].first == "0");
  CHECK(max_abs_diff(spec.env_coef[0].second, vec({0, 0, 0})) == 0.0);
  CHECK(max_abs_diff(spec.env_coef[1].second, vec({2, 0, 0})) == 0.0);
  CHECK(max_abs_diff(spec.pred_noise_var, vec({1, 1, 1})) == 0.0);
  CHECK(spec.resp_noise_var == 1.0);
  CHECK(validate(spec).empty());

  CHECK(spec.intervened_support() == std::vector<int>{0});
  CHECK(spec.response_parents() == std::vector<int>{0, 1});
  CHECK(spec.response_children() == std::vector<int>{2});
  REQUIRE(spec.find_env("2") != nullptr);
  CHECK((*spec.find_env("2"))(0) == 2.0);
  CHECK(spec.find_env("missing") == nullptr);
}

TEST_CASE("validate flags each violation class") {
  const ScmSpec good = toy_scm({{"0", 0.0}, {"2", 2.0}});

  SUBCASE("shape mismatch") {
    ScmSpec spec = good;
    spec.child_coef = Vector::Zero(2);
    CHECK(has_violation(validate(spec), SpecViolation::shape_mismatch));
  }

  SUBCASE("nonpositive noise") {
    ScmSpec spec = good;
    spec.pred_noise_var(1) = 0.0;
    CHECK(has_violation(validate(spec), SpecViolation::nonpositive_noise));
    spec = good;
    spec.resp_noise_var = -1.0;
    CHECK(has_violation(validate(spec), SpecViolation::nonpositive_noise));
  }

  SUBCASE("predictor cycle") {
    ScmSpec spec = good;
    spec.pred_coef(0, 2) = 0.5;  // X3 -> X1 closes X1 -> X3 -> X1
    CHECK(has_violation(validate(spec), SpecViolation::acyclicity_violated));
  }

  SUBCASE("cycle through the response") {
    ScmSpec spec = good;
    spec.invariant_coef(2) = 1.0;  // Y -> X3 -> Y
    CHECK(has_violation(validate(spec), SpecViolation::acyclicity_violated));
  }

  SUBCASE("support overlap") {
    ScmSpec spec = good;
    spec.invariant_coef(0) = 0.5;
    CHECK(has_violation(validate(spec), SpecViolation::support_overlap));
  }

  SUBCASE("degenerate environment map") {
    CHECK(has_violation(validate(toy_scm({{"only", 1.0}})),
                        SpecViolation::alpha_degenerate));
    CHECK(has_violation(validate(toy_scm({{"a", 1.0}, {"b", 1.0}})),
                        SpecViolation::alpha_degenerate));
  }

  SUBCASE("violation names") {
    CHECK(std::string(violation_name(SpecViolation::shape_mismatch)) == "ShapeMismatch");
    CHECK(std::string(violation_name(SpecViolation::nonpositive_noise)) == "NonPositiveNoise");
    CHECK(std::string(violation_name(SpecViolation::acyclicity_violated)) == "AcyclicityViolated");
    CHECK(std::string(violation_name(SpecViolation::support_overlap)) == "SupportOverlap");
    CHECK(std::string(violation_name(SpecViolation::alpha_degenerate)) == "AlphaDegenerate");
  }
}

TEST_CASE("require_structural tolerates degenerate alpha but not broken structure") {
  CHECK_NOTHROW(require_structural(toy_scm({{"only", 0.0}})));

  ScmSpec cyclic = toy_scm({{"0", 0.0}, {"2", 2.0}});
  cyclic.pred_coef(0, 2) = 1.0;
  CHECK_THROWS_AS(require_structural(cyclic), error);
  try {
    require_structural(cyclic);
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_spec);
  }
}

TEST_CASE("topological order respects every edge") {
  const ScmSpec spec = toy_scm({{"0", 0.0}, {"2", 2.0}});
  const auto order = topological_order(spec);
  REQUIRE(order.has_value());
  REQUIRE(order->size() == 4);

  std::vector<int> position(4);
  for (int i = 0; i < 4; ++i) position[(*order)[static_cast<std::size_t>(i)]] = i;
  // X1 -> Y, X2 -> Y, X1 -> X3, Y -> X3
  CHECK(position[0] < position[3]);
  CHECK(position[1] < position[3]);
  CHECK(position[0] < position[2]);
  CHECK(position[3] < position[2]);

  ScmSpec cyclic = spec;
  cyclic.pred_coef(0, 2) = 1.0;
  CHECK_FALSE(topological_order(cyclic).has_value());
}

TEST_CASE("population moments match the toy closed form") {
  const ScmSpec spec = toy_scm({{"0", 0.0}, {"1", 1.0}});

  const PopulationMoments m1 = population_moments(spec, "1");
  CHECK(m1.env_label == "1");
  CHECK(m1.var_y == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(max_abs_diff(m1.cov_xy, vec({1, 1, 4})) < 1e-12);
  Matrix expected(3, 3);
  expected << 1, 0, 2,
              0, 1, 1,
              2, 1, 7;
  CHECK(max_abs_diff(m1.cov_xx, expected) < 1e-12);

  const PopulationMoments m0 = population_moments(spec, "0");
  CHECK(m0.var_y == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(max_abs_diff(m0.cov_xy, vec({0, 1, 2})) < 1e-12);
  CHECK(m0.cov_xx(2, 2) == doctest::Approx(4.0).epsilon(1e-12));

  CHECK_THROWS_AS(population_moments(spec, "7"), error);
}

TEST_CASE("edge-free spec reduces to independent noise") {
  ScmSpec spec;
  spec.d = 2;
  spec.pred_coef = Matrix::Zero(2, 2);
  spec.child_coef = Vector::Zero(2);
  spec.invariant_coef = Vector::Zero(2);
  spec.env_coef = {{"u", Vector::Zero(2)}};
  spec.pred_noise_var = vec({2.0, 3.0});
  spec.resp_noise_var = 0.5;

  const PopulationMoments m = population_moments(spec, "u");
  CHECK(max_abs_diff(m.cov_xx, Matrix(vec({2.0, 3.0}).asDiagonal())) == 0.0);
  CHECK(m.cov_xy.cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.var_y == 0.5);
}

TEST_CASE("sampling matches population moments at large n") {
  const ScmSpec spec = toy_scm({{"0", 0.0}, {"1", 1.0}});
  std::mt19937_64 engine = make_engine(7);
  const EnvDataset data = sample(spec, "1", 1000000, engine);

  CHECK(data.env_label == "1");
  CHECK(data.rows() == 1000000);
  REQUIRE(data.y.has_value());

  const double n = static_cast<double>(data.rows());
  const Vector x_mean = data.x.colwise().mean();
  CHECK(x_mean.cwiseAbs().maxCoeff() < 0.02);
  CHECK(std::abs(data.y->mean()) < 0.02);

  const Matrix centered = data.x.rowwise() - x_mean.transpose();
  const Matrix cov = centered.transpose() * centered / n;
  CHECK(cov(2, 2) == doctest::Approx(7.0).epsilon(0.01));
  CHECK(cov(0, 2) == doctest::Approx(2.0).epsilon(0.02));
  const Vector y_centered = *data.y - Vector::Constant(data.rows(), data.y->mean());
  CHECK(y_centered.squaredNorm() / n == doctest::Approx(3.0).epsilon(0.01));
  CHECK((centered.transpose() * y_centered / n)(2) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("sample rejects bad arguments") {
  const ScmSpec spec = toy_scm({{"0", 0.0}, {"1", 1.0}});
  std::mt19937_64 engine = make_engine(0);
  CHECK_THROWS_AS(sample(spec, "0", 0, engine), error);
  CHECK_THROWS_AS(sample(spec, "nope", 10, engine), error);
  try {
    sample(spec, "nope", 10, engine);
  } catch (const error& e) {
    CHECK(e.code() == errc::invalid_argument);
  }
}

TEST_CASE("random specs are valid and reproducible") {
  const std::vector<std::string> labels = {"1", "2", "3"};
  const GenConfig config;

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 engine = make_engine(seed);
    const ScmSpec spec = random_scm(6, labels, config, engine);
    CAPTURE(seed);
    CHECK(validate(spec).empty());
    CHECK(spec.d == 6);
    CHECK(spec.env_count() == 3);
    CHECK_FALSE(spec.response_parents().empty());
    CHECK_FALSE(spec.response_children().empty());

    const auto support = spec.intervened_support();
    const auto parents = spec.response_parents();
    CHECK_FALSE(support.empty());
    CHECK(std::includes(parents.begin(), parents.end(), support.begin(), support.end()));
    for (int j : support) CHECK(spec.invariant_coef(j) == 0.0);
    for (int j : parents) {
      const bool intervened = std::binary_search(support.begin(), support.end(), j);
      if (!intervened) {
        const double mag = std::abs(spec.invariant_coef(j));
        CHECK(mag >= config.coef_magnitude.lo);
        CHECK(mag <= config.coef_magnitude.hi);
      }
    }
    for (const auto& [label, alpha] : spec.env_coef) {
      for (int j = 0; j < spec.d; ++j) {
        CHECK(alpha(j) >= config.alpha_range.lo);
        CHECK(alpha(j) <= config.alpha_range.hi);
        if (!std::binary_search(support.begin(), support.end(), j)) {
          CHECK(alpha(j) == 0.0);
        }
      }
    }
  }

  std::mt19937_64 a = make_engine(11);
  std::mt19937_64 b = make_engine(11);
  const ScmSpec s1 = random_scm(8, labels, config, a);
  const ScmSpec s2 = random_scm(8, labels, config, b);
  CHECK(max_abs_diff(s1.pred_coef, s2.pred_coef) == 0.0);
  CHECK(max_abs_diff(s1.child_coef, s2.child_coef) == 0.0);
  CHECK(max_abs_diff(s1.invariant_coef, s2.invariant_coef) == 0.0);
  REQUIRE(s1.env_coef.size() == s2.env_coef.size());
  for (std::size_t i = 0; i < s1.env_coef.size(); ++i) {
    CHECK(s1.env_coef[i].first == s2.env_coef[i].first);
    CHECK(max_abs_diff(s1.env_coef[i].second, s2.env_coef[i].second) == 0.0);
  }
}

TEST_CASE("dense two-predictor graph pins the response between its neighbors") {
  GenConfig config;
  config.edge_prob = 1.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 engine = make_engine(seed);
    const ScmSpec spec = random_scm(2, {"1", "2"}, config, engine);
    CHECK(spec.response_parents().size() == 1);
    CHECK(spec.response_children().size() == 1);
    CHECK(spec.intervened_support() == spec.response_parents());
  }
}

TEST_CASE("random_scm rejects bad arguments") {
  std::mt19937_64 engine = make_engine(0);
  CHECK_THROWS_AS(random_scm(1, {"1"}, GenConfig{}, engine), error);
  CHECK_THROWS_AS(random_scm(3, {}, GenConfig{}, engine), error);
}

TEST_CASE("test specs share everything except the environment map") {
  std::mt19937_64 engine = make_engine(3);
  const ScmSpec spec = random_scm(6, {"1", "2", "3"}, GenConfig{}, engine);
  const Interval range{-10.0, 10.0};
  const ScmSpec test = derive_test_spec(spec, {"5", "6", "7", "8"}, range, engine);

  CHECK(test.d == spec.d);
  CHECK(max_abs_diff(test.pred_coef, spec.pred_coef) == 0.0);
  CHECK(max_abs_diff(test.child_coef, spec.child_coef) == 0.0);
  CHECK(max_abs_diff(test.invariant_coef, spec.invariant_coef) == 0.0);
  CHECK(max_abs_diff(test.pred_noise_var, spec.pred_noise_var) == 0.0);
  CHECK(test.resp_noise_var == spec.resp_noise_var);
  REQUIRE(test.env_count() == 4);
  CHECK(test.env_coef[0].first == "5");
  CHECK(test.env_coef[3].first == "8");

  const auto support = spec.intervened_support();
  for (const auto& [label, alpha] : test.env_coef) {
    for (int j = 0; j < test.d; ++j) {
      const bool intervened = std::binary_search(support.begin(), support.end(), j);
      if (!intervened) {
        CHECK(alpha(j) == 0.0);
      } else {
        CHECK(alpha(j) >= range.lo);
        CHECK(alpha(j) <= range.hi);
      }
    }
  }
  CHECK_NOTHROW(require_structural(test));

  const ScmSpec frozen = derive_test_spec(spec, {"t"}, Interval{0.0, 0.0}, engine);
  for (const auto& [label, alpha] : frozen.env_coef) {
    CHECK(alpha.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(frozen.intervened_support().empty());
}
