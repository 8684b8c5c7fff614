#include "egopt/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

#include "egopt/lhs.hpp"
#include "egopt/rng.hpp"

namespace egopt {

namespace {

constexpr std::uint64_t kInitDesignSalt = 0xd0e;
constexpr std::uint64_t kFitSalt = 0xf17a;
constexpr std::uint64_t kProposeSalt = 0xacb;
constexpr std::uint64_t kEvalSalt = 0xe7a1;

double to_internal(Direction dir, double response) {
  return dir == Direction::maximize ? -response : response;
}

double to_response(Direction dir, double internal) {
  return dir == Direction::maximize ? -internal : internal;
}

struct PendingEval {
  int eval_id;
  Eigen::VectorXd u;
  Eigen::VectorXd raw;
};

bench::EvalOutcome evaluate_with_retry(const Evaluator& evaluator, const bench::EvalRequest& req) {
  bench::EvalOutcome out = evaluator.fn(req);
  if (!out.ok) {
    out = evaluator.fn(req);
  }
  return out;
}

/// Runs a wave of evaluations, at most `limit` in flight, and appends the
/// resulting observations in eval_id order. Failures are retried once, then
/// imputed with the worst ok internal value seen so far.
void run_wave(const Evaluator& evaluator, const std::vector<PendingEval>& wave, int limit,
              Phase phase, std::uint64_t run_seed, RunHistory& history) {
  std::vector<bench::EvalOutcome> outcomes(wave.size());
  std::size_t next = 0;
  while (next < wave.size()) {
    const std::size_t chunk = std::min<std::size_t>(static_cast<std::size_t>(limit),
                                                    wave.size() - next);
    std::vector<std::future<bench::EvalOutcome>> futures;
    futures.reserve(chunk);
    for (std::size_t i = 0; i < chunk; ++i) {
      const PendingEval& pe = wave[next + i];
      bench::EvalRequest req;
      req.eval_id = pe.eval_id;
      req.seed = mix_seed(mix_seed(run_seed, kEvalSalt), static_cast<std::uint64_t>(pe.eval_id));
      req.raw = pe.raw;
      futures.push_back(std::async(std::launch::async, [&evaluator, req]() {
        return evaluate_with_retry(evaluator, req);
      }));
    }
    for (std::size_t i = 0; i < chunk; ++i) {
      outcomes[next + i] = futures[i].get();
    }
    next += chunk;
  }

  double worst_ok = -std::numeric_limits<double>::infinity();
  bool any_ok = false;
  for (const auto& obs : history.observations) {
    if (obs.status == Status::ok) {
      worst_ok = std::max(worst_ok, obs.internal);
      any_ok = true;
    }
  }
  for (std::size_t i = 0; i < wave.size(); ++i) {
    if (outcomes[i].ok) {
      worst_ok = std::max(worst_ok, to_internal(history.direction, outcomes[i].value));
      any_ok = true;
    }
  }

  for (std::size_t i = 0; i < wave.size(); ++i) {
    Observation obs;
    obs.eval_id = wave[i].eval_id;
    obs.phase = phase;
    obs.u = wave[i].u;
    obs.raw = wave[i].raw;
    obs.duration_s = outcomes[i].duration_s;
    if (outcomes[i].ok) {
      if (!std::isfinite(outcomes[i].value)) {
        throw std::runtime_error("evaluation " + std::to_string(obs.eval_id) +
                                 " returned a non-finite response");
      }
      obs.status = Status::ok;
      obs.response = outcomes[i].value;
      obs.internal = to_internal(history.direction, obs.response);
    } else {
      if (!any_ok) {
        throw std::runtime_error("evaluation " + std::to_string(obs.eval_id) +
                                 " failed twice and no successful observation exists to impute "
                                 "from (" + outcomes[i].error + ")");
      }
      obs.status = Status::failed;
      obs.imputed = true;
      obs.internal = worst_ok;
      obs.response = to_response(history.direction, obs.internal);
    }
    history.observations.push_back(std::move(obs));
  }
}

int count_phase(const RunHistory& history, Phase phase) {
  int n = 0;
  for (const auto& obs : history.observations) {
    if (obs.phase == phase) ++n;
  }
  return n;
}

double best_ok_internal(const RunHistory& history) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& obs : history.observations) {
    if (obs.status == Status::ok) best = std::min(best, obs.internal);
  }
  return best;
}

void continue_run(const SearchSpace& space, const Evaluator& evaluator, const BudgetPlan& plan,
                  const DriverConfig& config, RunHistory& history) {
  const int d = space.dim();
  plan.validate(d);
  if (config.init_parallelism < 1) {
    throw std::invalid_argument("init_parallelism must be >= 1");
  }

  const DesignMatrix design = initial_design(d, plan.n_init, config.seed);

  int done_init = count_phase(history, Phase::init);
  if (done_init > plan.n_init || count_phase(history, Phase::ego) > plan.n_opt) {
    throw std::invalid_argument("history contains more observations than the budget plan allows");
  }

  while (done_init < plan.n_init) {
    const int wave_size = std::min(config.init_parallelism, plan.n_init - done_init);
    std::vector<PendingEval> wave;
    wave.reserve(static_cast<std::size_t>(wave_size));
    for (int i = 0; i < wave_size; ++i) {
      PendingEval pe;
      pe.eval_id = done_init + i;
      pe.raw = space.from_unit(design.points.row(pe.eval_id).transpose());
      pe.u = space.to_unit(pe.raw);  // canonical cube coordinates (integer rounding applied)
      wave.push_back(std::move(pe));
    }
    run_wave(evaluator, wave, wave_size, Phase::init, config.seed, history);
    done_init += wave_size;
    if (config.on_progress) config.on_progress(history, wave_size, 0);
  }

  int done_ego = count_phase(history, Phase::ego);
  while (done_ego < plan.n_opt) {
    const int q_b = std::min(plan.q, plan.n_opt - done_ego);
    const int batch_index = done_ego / plan.q;

    Eigen::MatrixXd train_x(history.observations.size(), d);
    Eigen::VectorXd train_y(history.observations.size());
    for (std::size_t i = 0; i < history.observations.size(); ++i) {
      train_x.row(static_cast<Eigen::Index>(i)) = history.observations[i].u.transpose();
      train_y[static_cast<Eigen::Index>(i)] = history.observations[i].internal;
    }

    gp::FitConfig fit_cfg = config.gp;
    fit_cfg.seed = refit_seed(config.seed, batch_index);
    const gp::GpModel model = gp::GpModel::fit(train_x, train_y, fit_cfg);

    BatchRecord record;
    record.batch_index = batch_index;
    record.first_eval_id = static_cast<int>(history.observations.size());
    record.count = q_b;
    record.n_train = model.size();
    record.model_digest = model.digest();
    record.kernel = model.kernel();
    try {
      record.loo_r2 = model.loo_r_squared();
    } catch (const std::exception&) {
      record.loo_r2 = std::numeric_limits<double>::quiet_NaN();
    }

    const double f_min = best_ok_internal(history);
    if (!std::isfinite(f_min)) {
      throw std::runtime_error("no successful observation available before the EGO phase");
    }
    acq::AcquisitionContext ctx;
    ctx.f_min = f_min;
    ctx.mc_samples = config.mc_samples;
    ctx.seed = mix_seed(mix_seed(config.seed, kProposeSalt), static_cast<std::uint64_t>(batch_index));
    const acq::ProposalBatch batch = acq::propose_batch(model, q_b, ctx, config.search);

    std::vector<PendingEval> wave;
    wave.reserve(static_cast<std::size_t>(q_b));
    for (int i = 0; i < q_b; ++i) {
      PendingEval pe;
      pe.eval_id = record.first_eval_id + i;
      pe.raw = space.from_unit(batch.points.row(i).transpose());
      pe.u = space.to_unit(pe.raw);
      wave.push_back(std::move(pe));
    }
    const int limit = config.max_parallel > 0 ? std::min(config.max_parallel, q_b) : q_b;
    run_wave(evaluator, wave, limit, Phase::ego, config.seed, history);
    history.batches.push_back(std::move(record));
    done_ego += q_b;
    if (config.on_progress) config.on_progress(history, q_b, 1);
  }
}

}  // namespace

const char* phase_name(Phase p) {
  return p == Phase::init ? "init" : "ego";
}

Phase phase_from_name(const std::string& name) {
  if (name == "init") return Phase::init;
  if (name == "ego") return Phase::ego;
  throw std::invalid_argument("unknown phase '" + name + "'");
}

const char* status_name(Status s) {
  return s == Status::ok ? "ok" : "failed";
}

Status status_from_name(const std::string& name) {
  if (name == "ok") return Status::ok;
  if (name == "failed") return Status::failed;
  throw std::invalid_argument("unknown status '" + name + "'");
}

DesignMatrix initial_design(int dim, int n_init, std::uint64_t run_seed) {
  return lhs_sample(dim, n_init, mix_seed(run_seed, kInitDesignSalt));
}

std::uint64_t refit_seed(std::uint64_t run_seed, int batch_index) {
  return mix_seed(mix_seed(run_seed, kFitSalt), static_cast<std::uint64_t>(batch_index));
}

void BudgetPlan::validate(int dim) const {
  if (n_init < dim + 2) {
    throw std::invalid_argument("budget: n_init must be at least d+2 = " + std::to_string(dim + 2));
  }
  if (q < 1) {
    throw std::invalid_argument("budget: q must be >= 1");
  }
  if (n_opt < q) {
    throw std::invalid_argument("budget: n_opt must be >= q");
  }
}

RunHistory run(const SearchSpace& space, const Evaluator& evaluator, const BudgetPlan& plan,
               const DriverConfig& config) {
  RunHistory history;
  history.direction = evaluator.direction;
  continue_run(space, evaluator, plan, config, history);
  return history;
}

RunHistory trim_to_resume_point(const BudgetPlan& plan, RunHistory partial) {
  // Ego rows past the last full batch boundary are re-proposed from the same
  // model, so dropping them reproduces the uninterrupted run exactly. (The
  // final batch of a finished run may legitimately be short.)
  const int n_ego = count_phase(partial, Phase::ego);
  if (n_ego < plan.n_opt) {
    const int keep_ego = (n_ego / plan.q) * plan.q;
    while (count_phase(partial, Phase::ego) > keep_ego) {
      partial.observations.pop_back();
    }
    while (!partial.batches.empty() &&
           partial.batches.back().first_eval_id >= static_cast<int>(partial.observations.size())) {
      partial.batches.pop_back();
    }
  }
  return partial;
}

RunHistory resume_run(const SearchSpace& space, const Evaluator& evaluator, const BudgetPlan& plan,
                      const DriverConfig& config, RunHistory partial) {
  partial.direction = evaluator.direction;
  partial = trim_to_resume_point(plan, std::move(partial));

  // Observations must form a dense eval_id prefix in phase order.
  for (std::size_t i = 0; i < partial.observations.size(); ++i) {
    if (partial.observations[i].eval_id != static_cast<int>(i)) {
      throw std::invalid_argument("resume: history eval_ids are not a dense prefix");
    }
    if (partial.observations[i].phase == Phase::init &&
        i >= static_cast<std::size_t>(plan.n_init)) {
      throw std::invalid_argument("resume: init observations exceed the plan");
    }
  }

  continue_run(space, evaluator, plan, config, partial);
  return partial;
}

std::vector<std::pair<int, double>> best_so_far(const RunHistory& history) {
  if (history.observations.empty()) {
    throw std::invalid_argument("best_so_far: empty history");
  }
  std::vector<std::pair<int, double>> trace;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& obs : history.observations) {
    if (obs.status != Status::ok) continue;
    best = std::min(best, obs.internal);
    trace.emplace_back(obs.eval_id, best);
  }
  return trace;
}

PhaseSummary phase_summary(const RunHistory& history) {
  const bool maximize = history.direction == Direction::maximize;
  bool has_init = false, has_ego = false;
  double init_best = 0.0, ego_best = 0.0;
  for (const auto& obs : history.observations) {
    if (obs.status != Status::ok) continue;
    const bool better_init = !has_init || (maximize ? obs.response > init_best
                                                    : obs.response < init_best);
    const bool better_ego = !has_ego || (maximize ? obs.response > ego_best
                                                  : obs.response < ego_best);
    if (obs.phase == Phase::init) {
      if (better_init) init_best = obs.response;
      has_init = true;
    } else {
      if (better_ego) ego_best = obs.response;
      has_ego = true;
    }
  }
  if (!has_init || !has_ego) {
    throw std::invalid_argument("phase_summary: both phases must contain ok observations");
  }
  PhaseSummary summary;
  summary.init_best = init_best;
  summary.ego_best = ego_best;
  const double overall = maximize ? std::max(init_best, ego_best) : std::min(init_best, ego_best);
  const double gain = maximize ? overall - init_best : init_best - overall;
  summary.improvement_fraction =
      std::abs(init_best) > 0.0 ? gain / std::abs(init_best)
                                : std::numeric_limits<double>::quiet_NaN();
  return summary;
}

}  // namespace egopt
