#include "egopt/numerics.hpp"

#include <cmath>
#include <string>

#include "egopt/tolerances.hpp"

namespace egopt::numerics {

SymmetricMatrix::SymmetricMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("SymmetricMatrix: matrix is " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ", expected square");
  }
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol::kSymmetryAbs) {
    throw std::invalid_argument("SymmetricMatrix: asymmetry " + std::to_string(asym) +
                                " exceeds tolerance");
  }
  m_ = 0.5 * (m + m.transpose());
}

double CholeskyFactor::half_log_det() const {
  return l_.diagonal().array().log().sum();
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::VectorXd& b) const {
  Eigen::VectorXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::MatrixXd CholeskyFactor::solve(const Eigen::MatrixXd& b) const {
  Eigen::MatrixXd y = l_.triangularView<Eigen::Lower>().solve(b);
  return l_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::VectorXd CholeskyFactor::solve_lower(const Eigen::VectorXd& b) const {
  return l_.triangularView<Eigen::Lower>().solve(b);
}

Eigen::MatrixXd CholeskyFactor::solve_lower(const Eigen::MatrixXd& b) const {
  return l_.triangularView<Eigen::Lower>().solve(b);
}

CholeskyFactor cholesky(const SymmetricMatrix& a) {
  const Eigen::MatrixXd& m = a.data();
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = m(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericalError("cholesky: matrix not positive definite at pivot " + std::to_string(j));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    const Eigen::Index rest = n - j - 1;
    if (rest > 0) {
      l.col(j).tail(rest) =
          (m.col(j).tail(rest) - l.bottomLeftCorner(rest, j) * l.row(j).head(j).transpose()) / ljj;
    }
  }
  return CholeskyFactor(std::move(l));
}

Eigen::VectorXd solve_triangular(const Eigen::MatrixXd& lower, const Eigen::VectorXd& b) {
  if (lower.rows() != lower.cols() || lower.rows() != b.size()) {
    throw std::invalid_argument("solve_triangular: shape mismatch");
  }
  return lower.triangularView<Eigen::Lower>().solve(b);
}

Eigen::VectorXd solve_psd(const CholeskyFactor& factor, const Eigen::VectorXd& b) {
  if (factor.order() != b.size()) {
    throw std::invalid_argument("solve_psd: shape mismatch");
  }
  return factor.solve(b);
}

Eigen::MatrixXd solve_psd(const CholeskyFactor& factor, const Eigen::MatrixXd& b) {
  if (factor.order() != b.rows()) {
    throw std::invalid_argument("solve_psd: shape mismatch");
  }
  return factor.solve(b);
}

double erf(double x) {
  return std::erf(x);
}

double norm_cdf(double x) {
  // erfc keeps full relative accuracy in the lower tail.
  return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

double norm_pdf(double x) {
  return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double inc_beta_cf(double a, double b, double x) {
  constexpr double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= tol::kIncBetaMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw std::domain_error("reg_inc_beta: a and b must be positive");
  }
  if (!(x >= 0.0) || !(x <= 1.0)) {
    throw std::domain_error("reg_inc_beta: x outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  // The continued fraction converges fast for x below the distribution bulk;
  // otherwise use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * inc_beta_cf(a, b, x) / a;
  }
  return 1.0 - front * inc_beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace egopt::numerics
