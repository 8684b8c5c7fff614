#include <doctest.h>

#include <cmath>

#include "egopt/acquisition.hpp"
#include "egopt/lhs.hpp"
#include "egopt/rng.hpp"
#include "support/oracles.hpp"

using namespace egopt;
using acq::expected_improvement;

namespace {

gp::KernelParams make_params(std::initializer_list<double> theta, double nugget) {
  gp::KernelParams p;
  p.theta.resize(static_cast<Eigen::Index>(theta.size()));
  Eigen::Index i = 0;
  for (double t : theta) p.theta[i++] = t;
  p.nugget = nugget;
  return p;
}

/// 1-d model with a pronounced posterior dip between two high endpoints.
gp::GpModel valley_model() {
  Eigen::MatrixXd x(6, 1);
  x << 0.0, 0.2, 0.4, 0.6, 0.8, 1.0;
  Eigen::VectorXd y(6);
  for (int i = 0; i < 6; ++i) {
    const double u = x(i, 0);
    y[i] = (u - 0.35) * (u - 0.35) * 8.0;
  }
  return gp::GpModel::with_params(x, y, make_params({30.0}, 1e-6));
}

}  // namespace

TEST_CASE("expected improvement closed form basics") {
  CHECK(expected_improvement(0.2, 0.0, 1.0) == 0.8);
  CHECK(expected_improvement(1.5, 0.0, 1.0) == 0.0);
  // at mean == f_min with unit sd the value is phi(0); the Monte Carlo oracle
  // (1e7 draws) reproduces it well inside 3 standard errors
  const double analytic = expected_improvement(1.0, 1.0, 1.0);
  CHECK(analytic == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  const auto [mc, se] = oracle::ei_monte_carlo(1.0, 1.0, 1.0, 10'000'000, 97);
  CHECK(std::abs(analytic - mc) <= 3.0 * se);

  CHECK_THROWS_AS(expected_improvement(std::nan(""), 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(expected_improvement(0.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("expected improvement matches Monte Carlo across random triples") {
  Rng rng(2023);
  int within = 0;
  const int cases = 100;
  for (int i = 0; i < cases; ++i) {
    const double mean = rng.uniform(-3.0, 3.0);
    const double sd = rng.uniform(0.05, 2.5);
    const double f_min = rng.uniform(-3.0, 3.0);
    const double analytic = expected_improvement(mean, sd, f_min);
    const auto [mc, se] = oracle::ei_monte_carlo(mean, sd, f_min, 200'000, rng.next_u64());
    if (std::abs(analytic - mc) <= 3.0 * se + 1e-12) ++within;
  }
  CHECK(within >= 99);
}

TEST_CASE("expected improvement monotonicity") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double f_min = rng.uniform(-1.0, 1.0);
    const double sd = rng.uniform(0.1, 2.0);
    const double m1 = rng.uniform(-2.0, 2.0);
    const double m2 = m1 + rng.uniform(0.01, 1.0);
    // nonincreasing in the mean
    CHECK(expected_improvement(m1, sd, f_min) >= expected_improvement(m2, sd, f_min));
    // nondecreasing in sd when mean >= f_min
    const double mean = f_min + rng.uniform(0.0, 2.0);
    const double s1 = rng.uniform(0.05, 1.0);
    const double s2 = s1 + rng.uniform(0.01, 1.0);
    CHECK(expected_improvement(mean, s2, f_min) >= expected_improvement(mean, s1, f_min));
  }
  // vanishing when the mean sits 10 sigma above the incumbent
  CHECK(expected_improvement(10.0, 1.0, 0.0) <= 1e-6);
}

TEST_CASE("qEI with one point reproduces analytic EI") {
  const auto model = valley_model();
  Eigen::MatrixXd xq(1, 1);
  xq << 0.35;
  const auto pred = model.predict_one(xq.row(0).transpose());
  const double f_min = model.train_y().minCoeff();
  const double analytic = expected_improvement(pred.mean, std::sqrt(pred.var), f_min);

  acq::AcquisitionContext ctx;
  ctx.f_min = f_min;
  ctx.mc_samples = 200'000;
  ctx.seed = 11;
  double se = 0.0;
  const double qei = acq::q_expected_improvement(model, xq, ctx, &se);
  CHECK(std::abs(qei - analytic) <= 3.0 * se + 1e-12);
}

TEST_CASE("qEI of a duplicated row equals the single row") {
  const auto model = valley_model();
  acq::AcquisitionContext ctx;
  ctx.f_min = model.train_y().minCoeff();
  ctx.mc_samples = 100'000;
  ctx.seed = 3;

  Eigen::MatrixXd one(1, 1);
  one << 0.3;
  Eigen::MatrixXd two(2, 1);
  two << 0.3, 0.3;
  double se1 = 0.0, se2 = 0.0;
  const double a = acq::q_expected_improvement(model, one, ctx, &se1);
  const double b = acq::q_expected_improvement(model, two, ctx, &se2);
  CHECK(std::abs(a - b) <= 3.0 * (se1 + se2) + 1e-9);
}

TEST_CASE("qEI is invariant under row permutation") {
  const auto model = valley_model();
  acq::AcquisitionContext ctx;
  ctx.f_min = model.train_y().minCoeff();
  ctx.mc_samples = 20'000;
  ctx.seed = 8;

  Eigen::MatrixXd a(3, 1), b(3, 1);
  a << 0.1, 0.5, 0.9;
  b << 0.9, 0.1, 0.5;
  CHECK(acq::q_expected_improvement(model, a, ctx) == acq::q_expected_improvement(model, b, ctx));
}

TEST_CASE("qEI of two distant points dominates each individually") {
  const auto model = valley_model();
  const double f_min = model.train_y().minCoeff();
  Eigen::MatrixXd xq(2, 1);
  xq << 0.25, 0.45;
  double ei_max = 0.0;
  for (int i = 0; i < 2; ++i) {
    const auto pred = model.predict_one(xq.row(i).transpose());
    ei_max = std::max(ei_max, expected_improvement(pred.mean, std::sqrt(pred.var), f_min));
  }
  acq::AcquisitionContext ctx;
  ctx.f_min = f_min;
  ctx.mc_samples = 200'000;
  ctx.seed = 21;
  double se = 0.0;
  const double qei = acq::q_expected_improvement(model, xq, ctx, &se);
  CHECK(qei >= ei_max - 3.0 * se);
}

TEST_CASE("qEI argument checks") {
  const auto model = valley_model();
  acq::AcquisitionContext ctx;
  ctx.f_min = 0.0;
  ctx.mc_samples = 10;  // below the floor
  Eigen::MatrixXd xq(1, 1);
  xq << 0.5;
  CHECK_THROWS_AS(acq::q_expected_improvement(model, xq, ctx), std::invalid_argument);
}

TEST_CASE("propose_batch finds the EI maximizer of a 2-d model") {
  // pronounced posterior minimum away from the data
  const auto design = lhs_sample(2, 25, 31);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    const double a = design.points(i, 0) - 0.7;
    const double b = design.points(i, 1) - 0.3;
    y[i] = 10.0 * (a * a + b * b);
  }
  gp::FitConfig fit_cfg;
  fit_cfg.restarts = 6;
  fit_cfg.seed = 2;
  const auto model = gp::GpModel::fit(design.points, y, fit_cfg);

  acq::AcquisitionContext ctx;
  ctx.f_min = y.minCoeff();
  ctx.mc_samples = 2000;
  ctx.seed = 5;
  acq::SearchBudget budget;
  budget.multistarts = 32;
  budget.local_steps = 80;
  const auto batch = acq::propose_batch(model, 1, ctx, budget);
  REQUIRE(batch.q == 1);
  REQUIRE(batch.points.rows() == 1);

  // dense-grid oracle over 101 points per axis
  double best_ei = -1.0;
  Eigen::Vector2d best_point;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; j <= 100; ++j) {
      Eigen::VectorXd p(2);
      p << i / 100.0, j / 100.0;
      const auto pred = model.predict_one(p);
      const double ei = expected_improvement(pred.mean, std::sqrt(pred.var), ctx.f_min);
      if (ei > best_ei) {
        best_ei = ei;
        best_point = p;
      }
    }
  }
  CHECK((batch.points.row(0).transpose() - best_point).norm() <= 0.05);
  CHECK(batch.scores[0] >= best_ei * 0.99);
}

TEST_CASE("propose_batch returns q distinct points and is deterministic") {
  const auto model = valley_model();
  acq::AcquisitionContext ctx;
  ctx.f_min = model.train_y().minCoeff();
  ctx.mc_samples = 2000;
  ctx.seed = 77;
  acq::SearchBudget budget;
  budget.multistarts = 16;
  budget.local_steps = 60;

  const auto batch = acq::propose_batch(model, 4, ctx, budget);
  REQUIRE(batch.q == 4);
  REQUIRE(batch.points.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK((batch.points.row(i) - batch.points.row(j)).norm() >= 1e-9);
    }
  }
  const auto again = acq::propose_batch(model, 4, ctx, budget);
  CHECK((batch.points - again.points).cwiseAbs().maxCoeff() == 0.0);
  CHECK(batch.qei == again.qei);

  // the first slot dominates every start the search tried
  const Eigen::MatrixXd starts = acq::proposal_starts(1, budget, ctx, 0);
  for (int s = 0; s < budget.multistarts; ++s) {
    const auto pred = model.predict_one(starts.row(s).transpose());
    const double ei = expected_improvement(pred.mean, std::sqrt(pred.var), ctx.f_min);
    CHECK(batch.scores[0] >= ei - 1e-12);
  }
}

TEST_CASE("propose_batch flags a degenerate search") {
  // an incumbent far below anything the posterior can reach: EI underflows
  // to exactly zero everywhere, so no candidate carries information
  const auto model = valley_model();
  acq::AcquisitionContext ctx;
  ctx.f_min = -1e9;
  ctx.mc_samples = 1000;
  ctx.seed = 9;
  acq::SearchBudget budget;
  budget.multistarts = 8;
  budget.local_steps = 30;
  const auto batch = acq::propose_batch(model, 2, ctx, budget);
  CHECK(batch.degenerate);
  CHECK(batch.points.rows() == 2);
  CHECK((batch.points.row(0) - batch.points.row(1)).norm() >= 1e-9);
  CHECK(batch.scores[0] == 0.0);  // later slots see the constant-liar pseudo-point
}
