#include "egopt/search_space.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace egopt {

namespace {

double apply_warp(Warp w, double x) {
  switch (w) {
    case Warp::identity: return x;
    case Warp::log10: return std::log10(x);
    case Warp::logit: return std::log(x / (1.0 - x));
  }
  throw std::logic_error("apply_warp: unknown warp");
}

double invert_warp(Warp w, double t) {
  switch (w) {
    case Warp::identity: return t;
    case Warp::log10: return std::pow(10.0, t);
    case Warp::logit: return 1.0 / (1.0 + std::exp(-t));
  }
  throw std::logic_error("invert_warp: unknown warp");
}

double round_half_up(double x) {
  return std::floor(x + 0.5);
}

}  // namespace

const char* warp_name(Warp w) {
  switch (w) {
    case Warp::identity: return "identity";
    case Warp::log10: return "log10";
    case Warp::logit: return "logit";
  }
  return "?";
}

Warp warp_from_name(const std::string& name) {
  if (name == "identity") return Warp::identity;
  if (name == "log10") return Warp::log10;
  if (name == "logit") return Warp::logit;
  throw std::invalid_argument("unknown warp '" + name + "' (expected identity|log10|logit)");
}

void ParameterSpec::validate() const {
  if (name.empty()) {
    throw std::invalid_argument("parameter has empty name");
  }
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw std::invalid_argument("parameter '" + name + "': requires lower < upper");
  }
  if (warp == Warp::log10 && !(lower > 0.0)) {
    throw std::invalid_argument("parameter '" + name + "': log10 warp requires lower > 0");
  }
  if (warp == Warp::logit && !(lower > 0.0 && upper < 1.0)) {
    throw std::invalid_argument("parameter '" + name + "': logit warp requires bounds in (0, 1)");
  }
  if (integer && std::floor(upper) - std::ceil(lower) < 1.0) {
    throw std::invalid_argument("parameter '" + name +
                                "': integer range must contain at least two integers");
  }
}

SearchSpace::SearchSpace(std::vector<ParameterSpec> params) : params_(std::move(params)) {
  if (params_.empty()) {
    throw std::invalid_argument("search space needs at least one parameter");
  }
  std::set<std::string> seen;
  for (const auto& p : params_) {
    p.validate();
    if (!seen.insert(p.name).second) {
      throw std::invalid_argument("duplicate parameter name '" + p.name + "'");
    }
    warped_lo_.push_back(apply_warp(p.warp, p.lower));
    warped_hi_.push_back(apply_warp(p.warp, p.upper));
  }
}

Eigen::VectorXd SearchSpace::to_unit(const Eigen::VectorXd& raw) const {
  if (raw.size() != dim()) {
    throw std::invalid_argument("to_unit: vector has " + std::to_string(raw.size()) +
                                " components, space has " + std::to_string(dim()));
  }
  Eigen::VectorXd u(dim());
  for (int j = 0; j < dim(); ++j) {
    const auto& p = params_[static_cast<std::size_t>(j)];
    if (!(raw[j] >= p.lower && raw[j] <= p.upper)) {
      throw std::domain_error("parameter '" + p.name + "': value " + std::to_string(raw[j]) +
                              " outside [" + std::to_string(p.lower) + ", " +
                              std::to_string(p.upper) + "]");
    }
    u[j] = (apply_warp(p.warp, raw[j]) - warped_lo_[static_cast<std::size_t>(j)]) /
           (warped_hi_[static_cast<std::size_t>(j)] - warped_lo_[static_cast<std::size_t>(j)]);
    // The affine map keeps in-bounds values in [0,1] up to rounding noise.
    u[j] = std::min(1.0, std::max(0.0, u[j]));
  }
  return u;
}

Eigen::VectorXd SearchSpace::from_unit(const Eigen::VectorXd& u) const {
  if (u.size() != dim()) {
    throw std::invalid_argument("from_unit: vector has " + std::to_string(u.size()) +
                                " components, space has " + std::to_string(dim()));
  }
  Eigen::VectorXd raw(dim());
  for (int j = 0; j < dim(); ++j) {
    const auto& p = params_[static_cast<std::size_t>(j)];
    if (!(u[j] >= 0.0 && u[j] <= 1.0)) {
      throw std::domain_error("parameter '" + p.name + "': unit coordinate " +
                              std::to_string(u[j]) + " outside [0, 1]");
    }
    const double w = warped_lo_[static_cast<std::size_t>(j)] +
                     u[j] * (warped_hi_[static_cast<std::size_t>(j)] -
                             warped_lo_[static_cast<std::size_t>(j)]);
    double x = invert_warp(p.warp, w);
    if (p.integer) {
      // clamp to the achievable integer range so edges stay integral even
      // with fractional bounds
      x = std::min(std::floor(p.upper), std::max(std::ceil(p.lower), round_half_up(x)));
    }
    raw[j] = std::min(p.upper, std::max(p.lower, x));
  }
  return raw;
}

Eigen::VectorXd SearchSpace::round_trip(const Eigen::VectorXd& raw) const {
  return from_unit(to_unit(raw));
}

}  // namespace egopt
