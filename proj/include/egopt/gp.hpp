#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <vector>

#include "egopt/numerics.hpp"

namespace egopt::gp {

/// Gaussian-kernel hyperparameters: per-dimension inverse-squared widths
/// theta (unit-cube scale) and the nugget variance added to the training
/// Gram diagonal.
struct KernelParams {
  Eigen::VectorXd theta;
  double nugget = 1e-6;

  void validate(int dim) const;
};

/// Cross-covariance k(a, b) = exp(-sum_j theta_j (a_j - b_j)^2).
/// The nugget is never added here; it belongs on the square training Gram.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelParams& params);

/// Negative log marginal likelihood of (X, y) under a constant-mean GP:
///   1/2 log det(K + s^2 I) + 1/2 (y-mu)^T (K + s^2 I)^{-1} (y-mu) + n/2 log 2pi
/// evaluated through a Cholesky factorization (with the standard jitter
/// escalation if the nugget alone does not make the Gram definite).
double nlml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double mean,
            const KernelParams& params);

struct FitConfig {
  int restarts = 8;
  std::array<double, 2> theta_bounds{1e-3, 1e3};
  std::array<double, 2> nugget_bounds{1e-8, 1.0};
  std::uint64_t seed = 0;
  /// Extra candidate parameters included in the multistart set verbatim
  /// (clamped into the bounds box). Useful when a good guess is available.
  std::vector<KernelParams> extra_starts;
};

/// Joint posterior at q evaluation points.
struct Posterior {
  Eigen::VectorXd mean;  // length q
  Eigen::MatrixXd cov;   // q x q, symmetric, diagonal clamped at 0
};

struct Prediction {
  double mean = 0.0;
  double var = 0.0;
};

/// Fitted Kriging surrogate. Immutable once constructed; all queries are
/// const and safe for concurrent callers.
///
/// Responses are standardized internally (zero mean, unit variance) before
/// any kernel math; predictions are mapped back. The constant prior mean in
/// original units is the sample mean of y.
class GpModel {
 public:
  /// Minimizes the NLML over (log theta, log nugget) by multistart
  /// Nelder-Mead, start points drawn by Latin hypercube over the log box.
  /// Deterministic in cfg.seed. The achieved NLML never exceeds the NLML of
  /// any tried start point.
  static GpModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitConfig& cfg);

  /// Builds a model with the given kernel parameters (no optimization).
  static GpModel with_params(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const KernelParams& params);

  /// New model with one extra training point; kernel parameters and response
  /// normalization are frozen, only the factorization is redone.
  GpModel augmented(const Eigen::VectorXd& x, double y) const;

  /// New model with training row i dropped; kernel parameters and response
  /// normalization are frozen.
  GpModel without_row(int i) const;

  Posterior posterior(const Eigen::MatrixXd& xq) const;
  Prediction predict_one(const Eigen::VectorXd& x) const;

  /// Leave-one-out R^2 via the closed-form LOO identity (equivalent to
  /// refitting without each point with frozen kernel and mean).
  double loo_r_squared() const;

  /// The fit objective (NLML on this model's standardized responses)
  /// evaluated at arbitrary candidate parameters.
  double objective_nlml(const KernelParams& params) const;
  double fitted_nlml() const { return fitted_nlml_; }

  int dim() const { return static_cast<int>(x_.cols()); }
  int size() const { return static_cast<int>(x_.rows()); }
  const Eigen::MatrixXd& train_x() const { return x_; }
  const Eigen::VectorXd& train_y() const { return y_; }
  double mean() const { return y_mean_; }
  double response_scale() const { return y_scale_; }
  const KernelParams& kernel() const { return params_; }
  const Eigen::MatrixXd& chol_lower() const { return chol_.lower(); }
  const Eigen::VectorXd& alpha() const { return alpha_; }

  /// Order-independent checksum of the training data and kernel parameters;
  /// lets run artifacts prove which observations a proposal was based on.
  std::uint64_t digest() const;

 private:
  GpModel(Eigen::MatrixXd x, Eigen::VectorXd y, double y_mean, double y_scale,
          KernelParams params);

  Eigen::VectorXd standardized() const { return (y_.array() - y_mean_).matrix() / y_scale_; }

  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  KernelParams params_;
  numerics::CholeskyFactor chol_;
  Eigen::VectorXd alpha_;
  double fitted_nlml_ = 0.0;
};

}  // namespace egopt::gp
