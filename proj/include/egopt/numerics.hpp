#pragma once

#include <Eigen/Dense>

#include "egopt/errors.hpp"

// Shared dense linear algebra and special functions. Dense O(n^3) routines
// only; problem sizes stay in the low thousands.

namespace egopt::numerics {

/// Dense symmetric matrix, validated on construction.
class SymmetricMatrix {
 public:
  /// Throws std::invalid_argument if m is not square or deviates from
  /// symmetry by more than tol::kSymmetryAbs; tiny asymmetries are averaged
  /// away so downstream factorizations see an exactly symmetric matrix.
  explicit SymmetricMatrix(Eigen::MatrixXd m);

  const Eigen::MatrixXd& data() const { return m_; }
  Eigen::Index order() const { return m_.rows(); }

 private:
  Eigen::MatrixXd m_;
};

/// Lower-triangular Cholesky factor L with positive diagonal, L*L^T = A.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(Eigen::MatrixXd lower) : l_(std::move(lower)) {}

  const Eigen::MatrixXd& lower() const { return l_; }
  Eigen::Index order() const { return l_.rows(); }

  /// sum_i log(L_ii) = (1/2) log det A.
  double half_log_det() const;

  /// Solves A x = b via the two triangular solves.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;

  /// Solves L x = b (forward substitution only).
  Eigen::VectorXd solve_lower(const Eigen::VectorXd& b) const;
  Eigen::MatrixXd solve_lower(const Eigen::MatrixXd& b) const;

 private:
  Eigen::MatrixXd l_;
};

/// Factorizes a positive-definite matrix. Throws NumericalError naming the
/// failing pivot index if the matrix is not positive definite.
CholeskyFactor cholesky(const SymmetricMatrix& a);

/// Forward substitution with an explicit lower-triangular matrix.
Eigen::VectorXd solve_triangular(const Eigen::MatrixXd& lower, const Eigen::VectorXd& b);

/// Solves A x = b given the factor of A.
Eigen::VectorXd solve_psd(const CholeskyFactor& factor, const Eigen::VectorXd& b);
Eigen::MatrixXd solve_psd(const CholeskyFactor& factor, const Eigen::MatrixXd& b);

// Special functions. erf/norm_cdf/norm_pdf are thin wrappers over libm,
// which meets the 1e-12 absolute-error budget; the regularized incomplete
// beta is evaluated by a Lentz continued fraction.
double erf(double x);
double norm_cdf(double x);
double norm_pdf(double x);

/// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
double reg_inc_beta(double a, double b, double x);

}  // namespace egopt::numerics
