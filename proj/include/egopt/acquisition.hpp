#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "egopt/gp.hpp"

namespace egopt::acq {

struct AcquisitionContext {
  double f_min = 0.0;      // best internal (minimized) response so far
  int mc_samples = 4096;   // Monte Carlo budget for qEI
  std::uint64_t seed = 0;
};

/// Inner-maximization budget for proposals.
struct SearchBudget {
  int multistarts = 64;
  int local_steps = 100;
};

/// q candidate unit-cube points with the acquisition value each had when it
/// was selected, plus the joint qEI score of the finished batch.
struct ProposalBatch {
  Eigen::MatrixXd points;   // q x d
  Eigen::VectorXd scores;   // analytic EI at selection time
  int q = 0;
  double qei = 0.0;         // Monte Carlo qEI of the whole batch
  bool degenerate = false;  // set when candidates collapsed onto known points with zero EI
};

/// Closed-form expected improvement under N(mean, sd^2) against incumbent
/// f_min:  EI = (f_min - mean) Phi(z) + sd phi(z),  z = (f_min - mean)/sd.
/// sd == 0 degenerates to max(f_min - mean, 0).
double expected_improvement(double mean, double sd, double f_min);

/// Monte Carlo estimate of E[max_j max(f_min - Y_j, 0)] over the joint
/// posterior at the rows of xq. Rows are canonically sorted before the seeded
/// stream is drawn, so the estimate is invariant under row permutation.
/// If standard_error is non-null it receives the MC standard error.
double q_expected_improvement(const gp::GpModel& model, const Eigen::MatrixXd& xq,
                              const AcquisitionContext& ctx, double* standard_error = nullptr);

/// The LHS start points the inner EI maximization uses for a given batch
/// slot; exposed so the start-dominance guarantee is externally checkable.
Eigen::MatrixXd proposal_starts(int dim, const SearchBudget& budget,
                                const AcquisitionContext& ctx, int slot);

/// Greedy constant-liar batch construction: maximize analytic EI by
/// multistart pattern search, pin a pseudo-observation at f_min, repeat q
/// times, then rescore the finished batch once with qEI.
ProposalBatch propose_batch(const gp::GpModel& model, int q, const AcquisitionContext& ctx,
                            const SearchBudget& budget);

}  // namespace egopt::acq
