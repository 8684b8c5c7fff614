#include "egopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "egopt/lhs.hpp"
#include "egopt/numerics.hpp"
#include "egopt/rng.hpp"
#include "egopt/tolerances.hpp"

namespace egopt::acq {

namespace {

constexpr std::uint64_t kStartSalt = 0xacf0;
constexpr std::uint64_t kFillSalt = 0xacf1;

bool lex_less(const Eigen::MatrixXd& m, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    if (m(a, j) < m(b, j)) return true;
    if (m(a, j) > m(b, j)) return false;
  }
  return false;
}

/// Factorize a posterior covariance, escalating an absolute diagonal jitter.
numerics::CholeskyFactor factor_cov(Eigen::MatrixXd cov) {
  double jitter = tol::kJitterInitial;
  cov.diagonal().array() += jitter;
  while (true) {
    try {
      return numerics::cholesky(numerics::SymmetricMatrix(cov));
    } catch (const NumericalError&) {
      const double next = jitter * tol::kJitterGrowth;
      if (next > tol::kJitterMax) throw;
      cov.diagonal().array() += next - jitter;
      jitter = next;
    }
  }
}

double ei_at(const gp::GpModel& model, const Eigen::VectorXd& x, double f_min) {
  const auto pred = model.predict_one(x);
  return expected_improvement(pred.mean, std::sqrt(std::max(0.0, pred.var)), f_min);
}

struct LocalMax {
  Eigen::VectorXd point;
  double value = 0.0;
};

/// Compass pattern search maximizing EI inside the unit cube. Deterministic;
/// the returned value is never below the start's EI.
LocalMax pattern_search(const gp::GpModel& model, double f_min, Eigen::VectorXd start,
                        int max_steps) {
  const int d = static_cast<int>(start.size());
  LocalMax cur{std::move(start), 0.0};
  cur.value = ei_at(model, cur.point, f_min);
  double step = 0.25;
  for (int it = 0; it < max_steps && step >= 1e-4; ++it) {
    double best_val = cur.value;
    int best_axis = -1;
    double best_coord = 0.0;
    for (int j = 0; j < d; ++j) {
      for (const double sign : {1.0, -1.0}) {
        const double coord = std::min(1.0, std::max(0.0, cur.point[j] + sign * step));
        if (coord == cur.point[j]) continue;
        const double saved = cur.point[j];
        cur.point[j] = coord;
        const double val = ei_at(model, cur.point, f_min);
        cur.point[j] = saved;
        if (val > best_val) {
          best_val = val;
          best_axis = j;
          best_coord = coord;
        }
      }
    }
    if (best_axis >= 0) {
      cur.point[best_axis] = best_coord;
      cur.value = best_val;
    } else {
      step *= 0.5;
    }
  }
  return cur;
}

}  // namespace

double expected_improvement(double mean, double sd, double f_min) {
  if (!std::isfinite(mean) || !std::isfinite(sd) || !std::isfinite(f_min)) {
    throw std::invalid_argument("expected_improvement: non-finite input");
  }
  if (sd < 0.0) {
    throw std::invalid_argument("expected_improvement: sd must be non-negative");
  }
  const double gap = f_min - mean;
  if (sd == 0.0) {
    return std::max(gap, 0.0);
  }
  const double z = gap / sd;
  return std::max(0.0, gap * numerics::norm_cdf(z) + sd * numerics::norm_pdf(z));
}

double q_expected_improvement(const gp::GpModel& model, const Eigen::MatrixXd& xq,
                              const AcquisitionContext& ctx, double* standard_error) {
  const Eigen::Index q = xq.rows();
  if (q < 1) {
    throw std::invalid_argument("q_expected_improvement: empty batch");
  }
  if (xq.cols() != model.dim()) {
    throw std::invalid_argument("q_expected_improvement: dimension mismatch");
  }
  if (ctx.mc_samples < 1000) {
    throw std::invalid_argument("q_expected_improvement: mc_samples must be >= 1000");
  }
  if (!std::isfinite(ctx.f_min)) {
    throw std::invalid_argument("q_expected_improvement: f_min must be finite");
  }

  // Canonical row order makes the seeded stream (and hence the estimate)
  // invariant under permutations of the batch.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return lex_less(xq, a, b); });
  Eigen::MatrixXd sorted(q, xq.cols());
  for (Eigen::Index i = 0; i < q; ++i) sorted.row(i) = xq.row(order[static_cast<std::size_t>(i)]);

  const auto post = model.posterior(sorted);
  const auto factor = factor_cov(post.cov);

  Rng rng(ctx.seed);
  Eigen::VectorXd z(q);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < ctx.mc_samples; ++s) {
    for (Eigen::Index j = 0; j < q; ++j) z[j] = rng.normal();
    const Eigen::VectorXd draw = post.mean + factor.lower() * z;
    const double imp = std::max(0.0, ctx.f_min - draw.minCoeff());
    sum += imp;
    sum_sq += imp * imp;
  }
  const double n = static_cast<double>(ctx.mc_samples);
  const double mean = sum / n;
  if (standard_error != nullptr) {
    const double var = std::max(0.0, sum_sq / n - mean * mean);
    *standard_error = std::sqrt(var / n);
  }
  return mean;
}

Eigen::MatrixXd proposal_starts(int dim, const SearchBudget& budget,
                                const AcquisitionContext& ctx, int slot) {
  return lhs_sample(dim, budget.multistarts,
                    mix_seed(ctx.seed, kStartSalt + static_cast<std::uint64_t>(slot)))
      .points;
}

ProposalBatch propose_batch(const gp::GpModel& model, int q, const AcquisitionContext& ctx,
                            const SearchBudget& budget) {
  if (q < 1) {
    throw std::invalid_argument("propose_batch: q must be >= 1");
  }
  if (budget.multistarts < 1 || budget.local_steps < 1) {
    throw std::invalid_argument("propose_batch: search budget must be positive");
  }
  const int d = model.dim();

  ProposalBatch batch;
  batch.q = q;
  batch.points.resize(q, d);
  batch.scores.resize(q);

  gp::GpModel liar = model;
  for (int slot = 0; slot < q; ++slot) {
    const Eigen::MatrixXd starts = proposal_starts(d, budget, ctx, slot);
    std::vector<LocalMax> results;
    results.reserve(static_cast<std::size_t>(budget.multistarts));
    for (int s = 0; s < budget.multistarts; ++s) {
      results.push_back(
          pattern_search(liar, ctx.f_min, starts.row(s).transpose(), budget.local_steps));
    }
    std::sort(results.begin(), results.end(),
              [](const LocalMax& a, const LocalMax& b) { return a.value > b.value; });

    auto separated = [&](const Eigen::VectorXd& x) {
      for (int k = 0; k < slot; ++k) {
        if ((batch.points.row(k).transpose() - x).norm() < tol::kMinPointSeparation) return false;
      }
      return true;
    };

    bool placed = false;
    for (const auto& res : results) {
      if (separated(res.point)) {
        batch.points.row(slot) = res.point.transpose();
        batch.scores[slot] = res.value;
        if (!(res.value > 0.0)) batch.degenerate = true;
        placed = true;
        break;
      }
    }
    if (!placed) {
      // Every local maximum collapsed onto an already chosen point; fall back
      // to the best-separated filler so the batch keeps its size.
      const DesignMatrix filler =
          lhs_sample(d, budget.multistarts, mix_seed(ctx.seed, kFillSalt + static_cast<std::uint64_t>(slot)));
      for (int s = 0; s < budget.multistarts && !placed; ++s) {
        const Eigen::VectorXd x = filler.points.row(s).transpose();
        if (separated(x)) {
          batch.points.row(slot) = x.transpose();
          batch.scores[slot] = ei_at(liar, x, ctx.f_min);
          batch.degenerate = true;
          placed = true;
        }
      }
      if (!placed) {
        throw NumericalError("propose_batch: unable to place a separated candidate");
      }
    }
    if (slot + 1 < q) {
      liar = liar.augmented(batch.points.row(slot).transpose(), ctx.f_min);
    }
  }

  batch.qei = q_expected_improvement(model, batch.points, ctx);
  return batch;
}

}  // namespace egopt::acq
