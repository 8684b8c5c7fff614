#include "egopt/benchbox.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "egopt/rng.hpp"

namespace egopt::bench {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kRl6NoiseSalt = 0xb16;

// rl6 surface: a broad basin plus one dominant peak and two decoys, all on
// the warped unit cube.
constexpr double kRl6Base = 880.0;
constexpr double kRl6BasinAmp = 70.0;
constexpr double kRl6BasinWidth = 0.8;
constexpr double kRl6PeakAmp = 240.0;
constexpr double kRl6DecoyAmp = 90.0;
constexpr double kRl6RidgeAmp = 50.0;
constexpr double kRl6NoiseSd = 5.0;
constexpr double kRl6Peak[6] = {0.74, 0.82, 0.60, 0.78, 0.18, 0.84};
constexpr double kRl6PeakWidth[6] = {4.5, 4.0, 5.0, 4.5, 6.0, 4.0};
constexpr double kRl6Decoy[6] = {0.22, 0.35, 0.78, 0.30, 0.72, 0.25};
constexpr double kRl6DecoyWidth[6] = {7.0, 8.0, 6.0, 7.0, 9.0, 8.0};
constexpr double kRl6Ridge[6] = {0.50, 0.15, 0.25, 0.60, 0.45, 0.55};
constexpr double kRl6RidgeWidth = 10.0;

double bump(const Eigen::VectorXd& u, const double* center, const double* width) {
  double s = 0.0;
  for (int j = 0; j < 6; ++j) {
    const double delta = u[j] - center[j];
    s += width[j] * delta * delta;
  }
  return std::exp(-s);
}

EvalOutcome pure_value(double v) {
  EvalOutcome out;
  out.ok = true;
  out.value = v;
  return out;
}

}  // namespace

const char* direction_name(Direction d) {
  return d == Direction::maximize ? "maximize" : "minimize";
}

Direction direction_from_name(const std::string& name) {
  if (name == "minimize") return Direction::minimize;
  if (name == "maximize") return Direction::maximize;
  throw std::invalid_argument("unknown direction '" + name + "' (expected minimize|maximize)");
}

double branin(const Eigen::VectorXd& x) {
  if (x.size() != 2) {
    throw std::invalid_argument("branin: expects 2 coordinates");
  }
  if (!(x[0] >= -5.0 && x[0] <= 10.0 && x[1] >= 0.0 && x[1] <= 15.0)) {
    throw std::invalid_argument("branin: point outside [-5,10] x [0,15]");
  }
  const double a = 1.0;
  const double b = 5.1 / (4.0 * kPi * kPi);
  const double c = 5.0 / kPi;
  const double r = 6.0;
  const double s = 10.0;
  const double t = 1.0 / (8.0 * kPi);
  const double inner = x[1] - b * x[0] * x[0] + c * x[0] - r;
  return a * inner * inner + s * (1.0 - t) * std::cos(x[0]) + s;
}

double sphere(const Eigen::VectorXd& x) {
  if (x.size() < 1) {
    throw std::invalid_argument("sphere: empty point");
  }
  return x.squaredNorm();
}

double hartmann6(const Eigen::VectorXd& x) {
  if (x.size() != 6) {
    throw std::invalid_argument("hartmann6: expects 6 coordinates");
  }
  for (int j = 0; j < 6; ++j) {
    if (!(x[j] >= 0.0 && x[j] <= 1.0)) {
      throw std::invalid_argument("hartmann6: point outside [0,1]^6");
    }
  }
  static const double alpha[4] = {1.0, 1.2, 3.0, 3.2};
  static const double a[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                 {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                 {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                 {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
  static const double p[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                 {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                 {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                 {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
  double sum = 0.0;
  for (int i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (int j = 0; j < 6; ++j) {
      const double delta = x[j] - p[i][j];
      inner += a[i][j] * delta * delta;
    }
    sum += alpha[i] * std::exp(-inner);
  }
  return -sum;
}

SearchSpace rl6_space() {
  return SearchSpace({
      {"batch_size", 512, 2560, Warp::identity, true},
      {"time_horizon", 64, 600, Warp::identity, true},
      {"discount", 0.90, 0.99, Warp::logit, false},
      {"learning_rate", 1e-5, 1e-3, Warp::log10, false},
      {"ppo_epochs", 3, 10, Warp::identity, true},
      {"entropy_beta", 1e-4, 1e-2, Warp::log10, false},
  });
}

double rl_surrogate6_mean(const Eigen::VectorXd& raw) {
  static const SearchSpace space = rl6_space();
  const Eigen::VectorXd u = space.to_unit(raw);  // also validates the ranges
  double basin = 0.0;
  for (int j = 0; j < 6; ++j) {
    const double delta = u[j] - kRl6Peak[j];
    basin += delta * delta;
  }
  static const double ridge_width[6] = {kRl6RidgeWidth, kRl6RidgeWidth, kRl6RidgeWidth,
                                        kRl6RidgeWidth, kRl6RidgeWidth, kRl6RidgeWidth};
  return kRl6Base + kRl6BasinAmp * std::exp(-kRl6BasinWidth * basin) +
         kRl6PeakAmp * bump(u, kRl6Peak, kRl6PeakWidth) +
         kRl6DecoyAmp * bump(u, kRl6Decoy, kRl6DecoyWidth) +
         kRl6RidgeAmp * bump(u, kRl6Ridge, ridge_width);
}

double rl_surrogate6(const Eigen::VectorXd& raw, std::uint64_t seed) {
  const double mean = rl_surrogate6_mean(raw);
  Rng noise(mix_seed(seed, kRl6NoiseSalt));
  return mean + kRl6NoiseSd * noise.normal();
}

Evaluator make_builtin(const std::string& name) {
  Evaluator ev;
  ev.name = name;
  ev.kind = EvalKind::builtin;
  if (name == "branin") {
    ev.direction = Direction::minimize;
    ev.fn = [](const EvalRequest& req) { return pure_value(branin(req.raw)); };
  } else if (name == "sphere") {
    ev.direction = Direction::minimize;
    ev.fn = [](const EvalRequest& req) { return pure_value(sphere(req.raw)); };
  } else if (name == "hartmann6") {
    ev.direction = Direction::minimize;
    ev.fn = [](const EvalRequest& req) { return pure_value(hartmann6(req.raw)); };
  } else if (name == "rl6") {
    ev.direction = Direction::maximize;
    ev.fn = [](const EvalRequest& req) { return pure_value(rl_surrogate6(req.raw, req.seed)); };
  } else {
    throw std::invalid_argument("unknown builtin '" + name +
                                "' (expected branin|sphere|hartmann6|rl6)");
  }
  return ev;
}

Evaluator with_noise(Evaluator inner, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) {
    throw std::invalid_argument("with_noise: sigma must be non-negative");
  }
  Evaluator ev = std::move(inner);
  ev.name += "+noise";
  ev.fn = [fn = std::move(ev.fn), sigma, seed](const EvalRequest& req) {
    EvalOutcome out = fn(req);
    if (out.ok) {
      Rng noise(mix_seed(seed, static_cast<std::uint64_t>(req.eval_id)));
      out.value += sigma * noise.normal();
    }
    return out;
  };
  return ev;
}

Evaluator with_latency(Evaluator inner, double seconds) {
  if (!(seconds >= 0.0)) {
    throw std::invalid_argument("with_latency: seconds must be non-negative");
  }
  Evaluator ev = std::move(inner);
  ev.name += "+latency";
  ev.fn = [fn = std::move(ev.fn), seconds](const EvalRequest& req) {
    std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
    EvalOutcome out = fn(req);
    out.duration_s += seconds;
    return out;
  };
  return ev;
}

}  // namespace egopt::bench
