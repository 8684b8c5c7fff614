#include <doctest.h>

#include <atomic>
#include <cmath>
#include <set>

#include "egopt/driver.hpp"

using namespace egopt;

namespace {

SearchSpace square2() {
  return SearchSpace({{"x1", -2.0, 2.0}, {"x2", -2.0, 2.0}});
}

Evaluator quadratic_evaluator() {
  Evaluator ev;
  ev.name = "quadratic";
  ev.direction = Direction::minimize;
  ev.fn = [](const bench::EvalRequest& req) {
    bench::EvalOutcome out;
    out.ok = true;
    out.value = req.raw.squaredNorm();
    return out;
  };
  return ev;
}

DriverConfig small_config(std::uint64_t seed) {
  DriverConfig cfg;
  cfg.seed = seed;
  cfg.gp.restarts = 4;
  cfg.search.multistarts = 12;
  cfg.search.local_steps = 40;
  cfg.mc_samples = 1000;
  cfg.init_parallelism = 4;
  return cfg;
}

bool same_history(const RunHistory& a, const RunHistory& b) {
  if (a.observations.size() != b.observations.size()) return false;
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    const auto& oa = a.observations[i];
    const auto& ob = b.observations[i];
    if (oa.eval_id != ob.eval_id || oa.phase != ob.phase || oa.status != ob.status ||
        oa.imputed != ob.imputed || oa.response != ob.response || oa.internal != ob.internal ||
        (oa.raw - ob.raw).cwiseAbs().maxCoeff() != 0.0 ||
        (oa.u - ob.u).cwiseAbs().maxCoeff() != 0.0) {
      return false;
    }
  }
  if (a.batches.size() != b.batches.size()) return false;
  for (std::size_t i = 0; i < a.batches.size(); ++i) {
    if (a.batches[i].model_digest != b.batches[i].model_digest) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("budget plan validation") {
  CHECK_THROWS_AS((BudgetPlan{3, 10, 1}.validate(2)), std::invalid_argument);  // n_init < d+2
  CHECK_THROWS_AS((BudgetPlan{10, 2, 4}.validate(2)), std::invalid_argument);  // n_opt < q
  CHECK_THROWS_AS((BudgetPlan{10, 10, 0}.validate(2)), std::invalid_argument);
  CHECK_NOTHROW((BudgetPlan{4, 10, 1}.validate(2)));
}

TEST_CASE("quadratic run satisfies the history contract") {
  const auto history =
      run(square2(), quadratic_evaluator(), BudgetPlan{10, 10, 1}, small_config(42));

  CHECK(history.observations.size() == 20);
  // phase ordering and dense ids
  for (int i = 0; i < 20; ++i) {
    CHECK(history.observations[static_cast<std::size_t>(i)].eval_id == i);
    const Phase expected = i < 10 ? Phase::init : Phase::ego;
    CHECK(history.observations[static_cast<std::size_t>(i)].phase == expected);
  }
  // best_so_far trace is nonincreasing and ends at the minimum
  const auto trace = best_so_far(history);
  REQUIRE(trace.size() == 20);
  double prev = std::numeric_limits<double>::infinity();
  double min_internal = std::numeric_limits<double>::infinity();
  for (const auto& obs : history.observations) min_internal = std::min(min_internal, obs.internal);
  for (const auto& [id, best] : trace) {
    CHECK(best <= prev);
    prev = best;
  }
  CHECK(trace.back().second == min_internal);
  // one refit per ego batch
  CHECK(history.batches.size() == 10);
}

TEST_CASE("ego batches truncate to the budget") {
  const auto history =
      run(square2(), quadratic_evaluator(), BudgetPlan{6, 10, 4}, small_config(7));
  int n_ego = 0;
  for (const auto& obs : history.observations) {
    if (obs.phase == Phase::ego) ++n_ego;
  }
  CHECK(n_ego == 10);
  REQUIRE(history.batches.size() == 3);
  CHECK(history.batches[0].count == 4);
  CHECK(history.batches[1].count == 4);
  CHECK(history.batches[2].count == 2);
}

TEST_CASE("best_so_far known sequence") {
  RunHistory history;
  history.direction = Direction::minimize;
  const double values[3] = {3.0, 1.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    Observation obs;
    obs.eval_id = i;
    obs.phase = Phase::init;
    obs.response = values[i];
    obs.internal = values[i];
    obs.status = Status::ok;
    history.observations.push_back(obs);
  }
  const auto trace = best_so_far(history);
  REQUIRE(trace.size() == 3);
  CHECK(trace[0].second == 3.0);
  CHECK(trace[1].second == 1.0);
  CHECK(trace[2].second == 1.0);

  CHECK_THROWS_AS(best_so_far(RunHistory{}), std::invalid_argument);
}

TEST_CASE("phase summary on synthetic histories") {
  auto make = [](double init_best, double ego_best) {
    RunHistory h;
    h.direction = Direction::maximize;
    Observation a;
    a.eval_id = 0;
    a.phase = Phase::init;
    a.response = init_best;
    a.internal = -init_best;
    a.status = Status::ok;
    Observation b = a;
    b.eval_id = 1;
    b.phase = Phase::ego;
    b.response = ego_best;
    b.internal = -ego_best;
    h.observations = {a, b};
    return h;
  };

  const auto improved = phase_summary(make(1140.0, 1193.0));
  CHECK(improved.init_best == 1140.0);
  CHECK(improved.ego_best == 1193.0);
  CHECK(improved.improvement_fraction == doctest::Approx(53.0 / 1140.0).epsilon(1e-12));

  const auto flat = phase_summary(make(5.0, 4.0));  // ego adds nothing
  CHECK(flat.improvement_fraction == 0.0);

  RunHistory init_only = make(1.0, 2.0);
  init_only.observations.pop_back();
  CHECK_THROWS_AS(phase_summary(init_only), std::invalid_argument);
}

TEST_CASE("failed evaluations are retried, imputed and flagged") {
  std::atomic<int> attempts{0};
  Evaluator flaky;
  flaky.name = "flaky";
  flaky.direction = Direction::minimize;
  flaky.fn = [&attempts](const bench::EvalRequest& req) {
    bench::EvalOutcome out;
    ++attempts;
    if (req.eval_id == 3 || req.eval_id == 7) {
      out.error = "synthetic failure";
      return out;
    }
    out.ok = true;
    out.value = req.raw.squaredNorm();
    return out;
  };

  DriverConfig cfg = small_config(9);
  cfg.init_parallelism = 1;
  const auto history = run(square2(), flaky, BudgetPlan{6, 4, 2}, cfg);

  CHECK(history.observations.size() == 10);  // budget conserved: ok + failed
  int failed = 0;
  double worst_before_3 = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    worst_before_3 = std::max(worst_before_3, history.observations[static_cast<std::size_t>(i)].internal);
  }
  for (const auto& obs : history.observations) {
    if (obs.status == Status::failed) {
      ++failed;
      CHECK(obs.imputed);
      if (obs.eval_id == 3) {
        // imputed with the worst ok internal seen up to that wave
        CHECK(obs.internal >= worst_before_3);
      }
    } else {
      CHECK_FALSE(obs.imputed);
    }
  }
  CHECK(failed == 2);
  // two failures, each retried once
  CHECK(attempts.load() == 10 + 2);

  // the trace never contains failed rows
  for (const auto& [id, best] : best_so_far(history)) {
    CHECK(id != 3);
    CHECK(id != 7);
  }
}

TEST_CASE("runs are reproducible given the seed") {
  const auto a = run(square2(), quadratic_evaluator(), BudgetPlan{8, 6, 2}, small_config(1234));
  const auto b = run(square2(), quadratic_evaluator(), BudgetPlan{8, 6, 2}, small_config(1234));
  CHECK(same_history(a, b));

  const auto c = run(square2(), quadratic_evaluator(), BudgetPlan{8, 6, 2}, small_config(1235));
  CHECK_FALSE(same_history(a, c));
}

TEST_CASE("concurrent evaluation produces the same history as serial") {
  Evaluator ev = quadratic_evaluator();
  DriverConfig serial = small_config(5);
  serial.init_parallelism = 1;
  serial.max_parallel = 1;
  DriverConfig parallel = small_config(5);
  parallel.init_parallelism = 8;
  parallel.max_parallel = 4;
  const auto a = run(square2(), ev, BudgetPlan{8, 8, 4}, serial);
  const auto b = run(square2(), ev, BudgetPlan{8, 8, 4}, parallel);
  CHECK(same_history(a, b));
}

TEST_CASE("every proposal came from a model fitted on strictly earlier observations") {
  const DriverConfig cfg = small_config(31);
  const auto history = run(square2(), quadratic_evaluator(), BudgetPlan{8, 8, 4}, cfg);
  REQUIRE(history.batches.size() == 2);
  for (const auto& record : history.batches) {
    // refit on exactly the observations before the batch, with the recorded seed
    Eigen::MatrixXd x(record.first_eval_id, 2);
    Eigen::VectorXd y(record.first_eval_id);
    for (int i = 0; i < record.first_eval_id; ++i) {
      x.row(i) = history.observations[static_cast<std::size_t>(i)].u.transpose();
      y[i] = history.observations[static_cast<std::size_t>(i)].internal;
    }
    gp::FitConfig fit_cfg = cfg.gp;
    fit_cfg.seed = refit_seed(cfg.seed, record.batch_index);
    const auto model = gp::GpModel::fit(x, y, fit_cfg);
    CHECK(model.digest() == record.model_digest);
    CHECK(model.size() == record.n_train);
  }
}

TEST_CASE("resume reproduces an uninterrupted run") {
  const BudgetPlan plan{8, 8, 4};
  const DriverConfig cfg = small_config(88);
  const auto full = run(square2(), quadratic_evaluator(), plan, cfg);

  // crash after the first ego batch: keep 8 init + 4 ego rows and one record
  RunHistory partial;
  partial.direction = full.direction;
  partial.observations.assign(full.observations.begin(), full.observations.begin() + 12);
  partial.batches.assign(full.batches.begin(), full.batches.begin() + 1);
  const auto resumed = resume_run(square2(), quadratic_evaluator(), plan, cfg, partial);
  CHECK(same_history(full, resumed));

  // crash mid-batch: the dangling rows are discarded and re-proposed
  RunHistory midway;
  midway.direction = full.direction;
  midway.observations.assign(full.observations.begin(), full.observations.begin() + 14);
  midway.batches.assign(full.batches.begin(), full.batches.begin() + 1);
  const auto resumed2 = resume_run(square2(), quadratic_evaluator(), plan, cfg, midway);
  CHECK(same_history(full, resumed2));
}
