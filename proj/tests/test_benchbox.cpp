#include <doctest.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "egopt/benchbox.hpp"
#include "egopt/lhs.hpp"
#include "egopt/rng.hpp"

using namespace egopt;
using namespace egopt::bench;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("branin spot values") {
  CHECK(branin(vec({kPi, 2.275})) == doctest::Approx(0.397887).epsilon(1e-5));
  CHECK(branin(vec({-kPi, 12.275})) == doctest::Approx(0.397887).epsilon(1e-5));
  CHECK(branin(vec({0.0, 0.0})) == doctest::Approx(55.602112642270264).epsilon(1e-12));
  CHECK_THROWS_AS(branin(vec({-6.0, 1.0})), std::invalid_argument);
  CHECK_THROWS_AS(branin(vec({0.0, 16.0})), std::invalid_argument);
  CHECK_THROWS_AS(branin(vec({0.0})), std::invalid_argument);
}

TEST_CASE("branin grid oracle confirms the global minimum") {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 300; ++i) {
    for (int j = 0; j <= 300; ++j) {
      best = std::min(best, branin(vec({-5.0 + 15.0 * i / 300.0, 15.0 * j / 300.0})));
    }
  }
  CHECK(best == doctest::Approx(0.397887).epsilon(2e-3));
  CHECK(best >= 0.397887 - 1e-6);
}

TEST_CASE("sphere") {
  CHECK(sphere(vec({0.0, 0.0, 0.0})) == 0.0);
  CHECK(sphere(vec({1.0, 1.0})) == 2.0);
}

TEST_CASE("hartmann6 at its published minimizer") {
  const auto x_star = vec({0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573});
  CHECK(hartmann6(x_star) == doctest::Approx(-3.322368).epsilon(1e-5));
  CHECK_THROWS_AS(hartmann6(vec({0.5, 0.5})), std::invalid_argument);
  CHECK_THROWS_AS(hartmann6(vec({1.5, 0.5, 0.5, 0.5, 0.5, 0.5})), std::invalid_argument);
}

TEST_CASE("noise wrapper") {
  Evaluator inner = make_builtin("sphere");
  EvalRequest req;
  req.eval_id = 0;
  req.seed = 1;
  req.raw = vec({0.5, 0.5});

  const Evaluator clean = with_noise(inner, 0.0, 42);
  CHECK(clean.fn(req).value == inner.fn(req).value);

  const Evaluator noisy = with_noise(inner, 1.0, 42);
  const double base = inner.fn(req).value;
  double sum = 0.0, sum_sq = 0.0;
  const int n = 10'000;
  for (int i = 0; i < n; ++i) {
    req.eval_id = i;
    const double delta = noisy.fn(req).value - base;
    sum += delta;
    sum_sq += delta * delta;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sum_sq / n - mean * mean);
  CHECK(sd >= 0.97);
  CHECK(sd <= 1.03);

  // per-eval_id streams: the same id always gets the same noise
  req.eval_id = 7;
  CHECK(noisy.fn(req).value == noisy.fn(req).value);
  CHECK_THROWS_AS(with_noise(inner, -1.0, 0), std::invalid_argument);
}

TEST_CASE("latency wrapper reports its nominal duration") {
  const Evaluator slow = with_latency(make_builtin("sphere"), 0.1);
  EvalRequest req;
  req.eval_id = 0;
  req.seed = 0;
  req.raw = vec({1.0, 2.0});
  const auto started = std::chrono::steady_clock::now();
  const auto out = slow.fn(req);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  CHECK(out.ok);
  CHECK(out.duration_s >= 0.1);
  CHECK(elapsed >= 0.1);
  CHECK(out.value == 5.0);
}

TEST_CASE("wrappers compose in either order") {
  EvalRequest req;
  req.eval_id = 3;
  req.seed = 9;
  req.raw = vec({0.5, -0.25});

  const Evaluator a = with_latency(with_noise(make_builtin("sphere"), 0.5, 11), 0.02);
  const Evaluator b = with_noise(with_latency(make_builtin("sphere"), 0.02), 0.5, 11);
  const auto out_a = a.fn(req);
  const auto out_b = b.fn(req);
  CHECK(out_a.value == out_b.value);  // noise keyed by (seed, eval_id) only
  CHECK(out_a.duration_s == out_b.duration_s);
  CHECK(out_a.duration_s >= 0.02);
  CHECK(a.fn(req).value == out_a.value);
}

TEST_CASE("rl6 surface determinism and noise") {
  const SearchSpace space = rl6_space();
  const auto rows = design_to_raw(space, lhs_sample(6, 10, 77));
  for (const auto& raw : rows) {
    CHECK(rl_surrogate6(raw, 5) == rl_surrogate6(raw, 5));
    CHECK(rl_surrogate6(raw, 5) != rl_surrogate6(raw, 6));
    CHECK(std::abs(rl_surrogate6(raw, 5) - rl_surrogate6_mean(raw)) < 50.0);
  }
  CHECK_THROWS_AS(rl_surrogate6(vec({1.0, 64, 0.95, 1e-4, 5, 1e-3}), 0), std::domain_error);
}

TEST_CASE("rl6 reference optimum fixture") {
  std::ifstream in(std::string(EGOPT_FIXTURES_DIR) + "/rl6_oracle.json");
  REQUIRE(in);
  nlohmann::json fixture;
  in >> fixture;
  Eigen::VectorXd argmax(6);
  for (int j = 0; j < 6; ++j) argmax[j] = fixture.at("argmax_raw").at(j).get<double>();
  const double max_value = fixture.at("max_value").get<double>();

  CHECK(rl_surrogate6_mean(argmax) == doctest::Approx(max_value).epsilon(1e-12));

  // range corners stay strictly below the recorded optimum
  const SearchSpace space = rl6_space();
  Rng rng(3);
  for (int trial = 0; trial < 64; ++trial) {
    Eigen::VectorXd corner(6);
    for (int j = 0; j < 6; ++j) {
      corner[j] = rng.below(2) == 0 ? space.param(j).lower : space.param(j).upper;
    }
    CHECK(rl_surrogate6_mean(corner) < max_value);
  }

  // a seeded random search cannot beat the recorded optimum
  const auto rows = design_to_raw(space, lhs_sample(6, 5000, 99));
  for (const auto& raw : rows) {
    CHECK(rl_surrogate6_mean(raw) <= max_value);
  }
}

TEST_CASE("builtin lookup") {
  CHECK(make_builtin("branin").direction == Direction::minimize);
  CHECK(make_builtin("rl6").direction == Direction::maximize);
  CHECK_THROWS_AS(make_builtin("nope"), std::invalid_argument);
}
