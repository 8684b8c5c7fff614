#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

#include "egopt/search_space.hpp"

namespace egopt::bench {

enum class Direction { minimize, maximize };
enum class EvalKind { builtin, command };

const char* direction_name(Direction d);
Direction direction_from_name(const std::string& name);

struct EvalRequest {
  int eval_id = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd raw;
};

struct EvalOutcome {
  bool ok = false;
  double value = 0.0;
  double duration_s = 0.0;
  std::string error;
};

using EvalFn = std::function<EvalOutcome(const EvalRequest&)>;

/// A black-box response source. The callable must tolerate concurrent
/// invocation; builtins are pure functions of (raw params, seed).
struct Evaluator {
  std::string name;
  EvalKind kind = EvalKind::builtin;
  Direction direction = Direction::minimize;
  EvalFn fn;
};

// Analytic benchmark surfaces (standard definitions).
double branin(const Eigen::VectorXd& x);     // x in [-5,10] x [0,15], min ~0.397887
double sphere(const Eigen::VectorXd& x);     // any d, min 0 at the origin
double hartmann6(const Eigen::VectorXd& x);  // x in [0,1]^6, min ~-3.32237

/// Smooth multimodal 6-d reward surface over the rl6 space, with seeded
/// observation noise; stands in for an RL training run so the full pipeline
/// (warps, maximization, noise) can be exercised end to end.
double rl_surrogate6(const Eigen::VectorXd& raw, std::uint64_t seed);

/// Noise-free component of rl_surrogate6; the reference optimum recorded in
/// the test fixtures refers to this surface.
double rl_surrogate6_mean(const Eigen::VectorXd& raw);

/// The 6-parameter space the rl6 builtin is defined over (batch size, time
/// horizon, discount, learning rate, epochs, entropy coefficient).
SearchSpace rl6_space();

/// Looks up "branin" | "sphere" | "hartmann6" | "rl6".
Evaluator make_builtin(const std::string& name);

/// Adds N(0, sigma^2) noise from a stream keyed by (seed, eval_id).
Evaluator with_noise(Evaluator inner, double sigma, std::uint64_t seed);

/// Sleeps for the given duration before delegating; the reported duration is
/// the inner duration plus the nominal latency.
Evaluator with_latency(Evaluator inner, double seconds);

}  // namespace egopt::bench
