#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace egopt {

/// Monotone reparameterization applied before the affine map to [0, 1].
/// log10 and logit compress ranges whose useful resolution is multiplicative
/// (learning rates) or probability-like (discount factors).
enum class Warp { identity, log10, logit };

const char* warp_name(Warp w);
Warp warp_from_name(const std::string& name);

struct ParameterSpec {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  Warp warp = Warp::identity;
  bool integer = false;

  /// Throws std::invalid_argument on bad bounds or a warp/bounds mismatch.
  void validate() const;
};

/// Ordered hyperparameter domain plus the bijection between raw values and
/// the internal unit hypercube. All surrogate math happens on the cube;
/// raw values exist only at the evaluator and file boundaries.
class SearchSpace {
 public:
  explicit SearchSpace(std::vector<ParameterSpec> params);

  int dim() const { return static_cast<int>(params_.size()); }
  const std::vector<ParameterSpec>& params() const { return params_; }
  const ParameterSpec& param(int j) const { return params_.at(static_cast<std::size_t>(j)); }

  /// Warp each coordinate, then map the warped bounds onto [0, 1].
  /// Out-of-bounds components raise std::domain_error naming the parameter.
  Eigen::VectorXd to_unit(const Eigen::VectorXd& raw) const;

  /// Exact inverse of to_unit up to floating tolerance; integer parameters
  /// are rounded half-up after the inverse warp and clamped to their bounds.
  /// Components outside [0, 1] raise std::domain_error.
  Eigen::VectorXd from_unit(const Eigen::VectorXd& u) const;

  /// from_unit(to_unit(raw)); identity within 1e-9 on continuous parameters.
  Eigen::VectorXd round_trip(const Eigen::VectorXd& raw) const;

 private:
  std::vector<ParameterSpec> params_;
  std::vector<double> warped_lo_;
  std::vector<double> warped_hi_;
};

}  // namespace egopt
