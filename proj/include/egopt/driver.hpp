#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "egopt/acquisition.hpp"
#include "egopt/benchbox.hpp"
#include "egopt/gp.hpp"
#include "egopt/lhs.hpp"
#include "egopt/search_space.hpp"

namespace egopt {

using bench::Direction;
using bench::Evaluator;

enum class Phase { init, ego };
enum class Status { ok, failed };

const char* phase_name(Phase p);
Phase phase_from_name(const std::string& name);
const char* status_name(Status s);
Status status_from_name(const std::string& name);

/// One evaluated point. `response` is in the user's direction; `internal`
/// is the minimized sign used by all surrogate math. Failed evaluations
/// carry an imputed internal value and are flagged.
struct Observation {
  int eval_id = 0;
  Phase phase = Phase::init;
  Eigen::VectorXd u;    // unit-cube coordinates (canonical: to_unit(raw))
  Eigen::VectorXd raw;  // raw parameter values
  double response = 0.0;
  double internal = 0.0;
  Status status = Status::ok;
  bool imputed = false;
  double duration_s = 0.0;
};

/// Per-refit audit record: which observations the surrogate saw, its fitted
/// kernel, and its quality. The digest lets tests prove no proposal ever
/// looked ahead of its training prefix.
struct BatchRecord {
  int batch_index = 0;
  int first_eval_id = 0;
  int count = 0;
  int n_train = 0;
  std::uint64_t model_digest = 0;
  gp::KernelParams kernel;
  double loo_r2 = 0.0;  // NaN when undefined (n < 3 or constant responses)
};

/// Append-only record of a run.
struct RunHistory {
  Direction direction = Direction::minimize;
  std::uint64_t config_digest = 0;
  std::vector<Observation> observations;
  std::vector<BatchRecord> batches;
};

struct BudgetPlan {
  int n_init = 0;
  int n_opt = 0;
  int q = 1;

  void validate(int dim) const;
};

struct DriverConfig {
  std::uint64_t seed = 0;
  gp::FitConfig gp;
  acq::SearchBudget search;
  int mc_samples = 4096;
  int init_parallelism = 1;
  int max_parallel = 0;  // 0 = batch size
  /// Called after every persisted-unit of progress (init wave or ego batch).
  std::function<void(const RunHistory&, int new_observations, int new_batches)> on_progress;
};

/// The Latin hypercube design a run with this seed will evaluate during its
/// initialization phase.
DesignMatrix initial_design(int dim, int n_init, std::uint64_t run_seed);

/// The fit seed used for a given ego batch. Together with BatchRecord's
/// digest this makes the no-lookahead property auditable: refitting on the
/// observations before the batch must reproduce the recorded digest.
std::uint64_t refit_seed(std::uint64_t run_seed, int batch_index);

/// Full optimization loop: LHS initialization, then fit / propose / evaluate
/// / augment until the budget is exhausted. Deterministic given the seed and
/// a deterministic black box.
RunHistory run(const SearchSpace& space, const Evaluator& evaluator, const BudgetPlan& plan,
               const DriverConfig& config);

/// Drops trailing ego rows that do not fall on a batch boundary (they would
/// be re-proposed from the same model anyway) plus any batch records whose
/// rows were dropped. Idempotent.
RunHistory trim_to_resume_point(const BudgetPlan& plan, RunHistory partial);

/// Continues a partial history (typically parsed back from disk) to
/// completion. With a pure black box the result is identical to an
/// uninterrupted run. Trailing rows that do not fall on a batch boundary are
/// discarded and re-evaluated.
RunHistory resume_run(const SearchSpace& space, const Evaluator& evaluator, const BudgetPlan& plan,
                      const DriverConfig& config, RunHistory partial);

/// Stepwise minimum of the internal response over ok observations.
std::vector<std::pair<int, double>> best_so_far(const RunHistory& history);

struct PhaseSummary {
  double init_best = 0.0;  // user direction
  double ego_best = 0.0;
  double improvement_fraction = 0.0;
};

/// Compares the two phases in the user's direction; requires at least one
/// ok observation in each.
PhaseSummary phase_summary(const RunHistory& history);

}  // namespace egopt
