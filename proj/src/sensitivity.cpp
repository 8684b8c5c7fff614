#include "egopt/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "egopt/errors.hpp"
#include "egopt/numerics.hpp"
#include "egopt/tolerances.hpp"

namespace egopt::sens {

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

/// Residual sum of squares of y regressed on the first k predictor columns
/// (plus intercept).
double rss_on_prefix(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, Eigen::Index k) {
  const Eigen::MatrixXd design = with_intercept(x.leftCols(k));
  const Eigen::VectorXd coef = design.householderQr().solve(y);
  return (y - design * coef).squaredNorm();
}

}  // namespace

Eigen::VectorXd fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("fit_linear: X and y row counts differ");
  }
  if (x.rows() <= x.cols() + 1) {
    throw std::invalid_argument("fit_linear: need more rows than coefficients");
  }
  const Eigen::MatrixXd design = with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < design.cols()) {
    // Columns permuted past the numerical rank are linear combinations of
    // the ones before them.
    std::vector<int> dependent;
    const auto& perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index i = qr.rank(); i < design.cols(); ++i) {
      const int col = static_cast<int>(perm[i]) - 1;  // -1: drop the intercept column
      dependent.push_back(col);
      if (!names.empty()) names += ", ";
      names += (col < 0) ? "intercept" : ("column " + std::to_string(col));
    }
    throw SingularDesignError("fit_linear: design is rank deficient (" + names + ")",
                              std::move(dependent));
  }
  return qr.solve(y);
}

AnovaTable anova_sequential(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const std::vector<std::string>& factor_names) {
  const Eigen::Index k = x.cols();
  if (static_cast<Eigen::Index>(factor_names.size()) != k) {
    throw std::invalid_argument("anova_sequential: one name per predictor column required");
  }
  // Validates shape and rank; coefficients themselves are not needed here.
  (void)fit_linear(x, y);

  const double ybar = y.mean();
  const double total_ss = (y.array() - ybar).square().sum();

  AnovaTable table;
  table.total_ss = total_ss;
  const int resid_df = static_cast<int>(x.rows()) - static_cast<int>(k) - 1;

  std::vector<double> rss(static_cast<std::size_t>(k) + 1);
  rss[0] = total_ss;  // intercept-only model
  for (Eigen::Index i = 1; i <= k; ++i) {
    rss[static_cast<std::size_t>(i)] = rss_on_prefix(x, y, i);
  }
  const double resid_ss = std::max(0.0, rss[static_cast<std::size_t>(k)]);
  table.exact_fit = resid_ss <= tol::kExactFitRel * std::max(total_ss, 1e-300);
  const double resid_ms = resid_df > 0 ? resid_ss / resid_df : 0.0;

  for (Eigen::Index i = 0; i < k; ++i) {
    AnovaRow row;
    row.factor = factor_names[static_cast<std::size_t>(i)];
    row.df = 1;
    row.ss = std::max(0.0, rss[static_cast<std::size_t>(i)] - rss[static_cast<std::size_t>(i) + 1]);
    row.ms = row.ss / row.df;
    if (table.exact_fit) {
      row.f_value = row.ss > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
      row.p_value = row.ss > 0.0 ? 0.0 : 1.0;
    } else {
      row.f_value = row.ms / resid_ms;
      row.p_value = f_sf(row.f_value, row.df, resid_df);
    }
    table.factors.push_back(std::move(row));
  }

  table.residual.factor = "residual";
  table.residual.df = resid_df;
  table.residual.ss = resid_ss;
  table.residual.ms = resid_df > 0 ? resid_ss / resid_df : 0.0;
  table.residual.f_value = std::numeric_limits<double>::quiet_NaN();
  table.residual.p_value = std::numeric_limits<double>::quiet_NaN();
  return table;
}

std::vector<std::pair<std::string, double>> ss_percentages(const AnovaTable& table) {
  if (!(table.total_ss > 0.0)) {
    throw std::domain_error("ss_percentages: total sum of squares is zero");
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& row : table.factors) {
    out.emplace_back(row.factor, 100.0 * row.ss / table.total_ss);
  }
  out.emplace_back(table.residual.factor, 100.0 * table.residual.ss / table.total_ss);
  return out;
}

double f_sf(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1 || std::isnan(f) || f < 0.0) {
    throw std::invalid_argument("f_sf: need f >= 0 and df1, df2 >= 1");
  }
  if (std::isinf(f)) return 0.0;
  const double a = 0.5 * df2;
  const double b = 0.5 * df1;
  const double x = df2 / (df2 + df1 * f);
  return numerics::reg_inc_beta(a, b, x);
}

std::vector<std::pair<std::string, double>> ablation_delta_r2(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
    const std::vector<std::string>& factor_names) {
  const Eigen::Index k = x.cols();
  if (static_cast<Eigen::Index>(factor_names.size()) != k) {
    throw std::invalid_argument("ablation_delta_r2: one name per predictor column required");
  }
  const double ybar = y.mean();
  const double total_ss = (y.array() - ybar).square().sum();
  if (!(total_ss > 0.0)) {
    throw std::domain_error("ablation_delta_r2: responses have zero variance");
  }
  const Eigen::MatrixXd full_design = with_intercept(x);
  const Eigen::VectorXd full_coef = full_design.householderQr().solve(y);
  const double full_r2 = 1.0 - (y - full_design * full_coef).squaredNorm() / total_ss;

  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index drop = 0; drop < k; ++drop) {
    Eigen::MatrixXd reduced(x.rows(), k - 1);
    Eigen::Index c = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == drop) continue;
      reduced.col(c++) = x.col(j);
    }
    const Eigen::MatrixXd design = with_intercept(reduced);
    const Eigen::VectorXd coef = design.householderQr().solve(y);
    const double r2 = 1.0 - (y - design * coef).squaredNorm() / total_ss;
    out.emplace_back(factor_names[static_cast<std::size_t>(drop)], full_r2 - r2);
  }
  return out;
}

}  // namespace egopt::sens
