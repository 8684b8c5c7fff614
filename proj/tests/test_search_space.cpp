#include <doctest.h>

#include <cmath>

#include "egopt/rng.hpp"
#include "egopt/search_space.hpp"

using namespace egopt;

namespace {

SearchSpace mixed_space() {
  return SearchSpace({
      {"horizon", 64, 600, Warp::identity, false},
      {"rate", 1e-5, 1e-3, Warp::log10, false},
      {"discount", 0.90, 0.99, Warp::logit, false},
      {"epochs", 3, 10, Warp::identity, true},
  });
}

Eigen::VectorXd vec(std::initializer_list<double> vals) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(SearchSpace({{"a", 2.0, 1.0, Warp::identity, false}}), std::invalid_argument);
  CHECK_THROWS_AS(SearchSpace({{"a", -1.0, 1.0, Warp::log10, false}}), std::invalid_argument);
  CHECK_THROWS_AS(SearchSpace({{"a", 0.5, 1.5, Warp::logit, false}}), std::invalid_argument);
  CHECK_THROWS_AS(SearchSpace({{"a", 1.0, 1.6, Warp::identity, true}}), std::invalid_argument);
  CHECK_THROWS_AS(SearchSpace({{"a", 0.0, 1.0}, {"a", 0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(SearchSpace({}), std::invalid_argument);
  CHECK_NOTHROW(mixed_space());
}

TEST_CASE("to_unit maps bounds to 0 and 1 exactly") {
  const auto space = mixed_space();
  const Eigen::VectorXd lo = space.to_unit(vec({64, 1e-5, 0.90, 3}));
  const Eigen::VectorXd hi = space.to_unit(vec({600, 1e-3, 0.99, 10}));
  for (int j = 0; j < space.dim(); ++j) {
    CHECK(lo[j] == 0.0);
    CHECK(hi[j] == 1.0);
  }
}

TEST_CASE("to_unit known values") {
  const SearchSpace horizon({{"h", 64, 600, Warp::identity, false}});
  CHECK(horizon.to_unit(vec({64}))[0] == 0.0);

  const SearchSpace rate({{"lr", 1e-5, 1e-3, Warp::log10, false}});
  CHECK(rate.to_unit(vec({1e-4}))[0] == doctest::Approx(0.5).epsilon(1e-12));

  // (logit(0.974) - logit(0.90)) / (logit(0.99) - logit(0.90)), logit = ln(p/(1-p))
  const SearchSpace discount({{"g", 0.90, 0.99, Warp::logit, false}});
  CHECK(discount.to_unit(vec({0.974}))[0] == doctest::Approx(0.5947258016070777).epsilon(1e-10));
}

TEST_CASE("to_unit names the offending parameter") {
  const auto space = mixed_space();
  try {
    space.to_unit(vec({64, 2e-3, 0.95, 5}));
    FAIL("expected domain_error");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find("rate") != std::string::npos);
  }
  CHECK_THROWS_AS(space.to_unit(vec({64, 1e-4})), std::invalid_argument);
}

TEST_CASE("from_unit known values") {
  const SearchSpace wide({{"w", 512, 2560, Warp::identity, false}});
  CHECK(wide.from_unit(vec({1.0}))[0] == 2560.0);

  const SearchSpace rate({{"lr", 1e-5, 1e-3, Warp::log10, false}});
  CHECK(rate.from_unit(vec({0.5}))[0] == doctest::Approx(1e-4).epsilon(1e-12));

  // 3 + 0.5 * 7 = 6.5 rounds half-up to 7
  const SearchSpace epochs({{"e", 3, 10, Warp::identity, true}});
  CHECK(epochs.from_unit(vec({0.5}))[0] == 7.0);

  CHECK_THROWS_AS(rate.from_unit(vec({1.2})), std::domain_error);
  CHECK_THROWS_AS(rate.from_unit(vec({-0.1})), std::domain_error);
}

TEST_CASE("round trip on named examples") {
  const SearchSpace discount({{"g", 0.90, 0.99, Warp::logit, false}});
  CHECK(discount.round_trip(vec({0.95}))[0] == doctest::Approx(0.95).epsilon(1e-10));

  const SearchSpace epochs({{"e", 3, 10, Warp::identity, true}});
  CHECK(epochs.round_trip(vec({8}))[0] == 8.0);
}

TEST_CASE("round trip property across warps") {
  const auto space = mixed_space();
  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    Eigen::VectorXd raw(4);
    raw[0] = rng.uniform(64, 600);
    raw[1] = std::pow(10.0, rng.uniform(-5.0, -3.0));
    raw[2] = rng.uniform(0.90, 0.99);
    raw[3] = std::floor(rng.uniform(3.0, 11.0));  // integral already
    const Eigen::VectorXd back = space.round_trip(raw);
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(back[j] - raw[j]) <= 1e-9);
    }
    CHECK(back[3] == raw[3]);
  }
}

TEST_CASE("to_unit is strictly monotone per coordinate") {
  const auto space = mixed_space();
  Rng rng(7);
  const double lows[4] = {64, 1e-5, 0.90, 3};
  const double highs[4] = {600, 1e-3, 0.99, 10};
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 200; ++i) {
      double a = rng.uniform(lows[j], highs[j]);
      double b = rng.uniform(lows[j], highs[j]);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      Eigen::VectorXd ra = vec({300, 1e-4, 0.95, 5});
      Eigen::VectorXd rb = ra;
      ra[j] = a;
      rb[j] = b;
      CHECK(space.to_unit(ra)[j] < space.to_unit(rb)[j]);
    }
  }
}
