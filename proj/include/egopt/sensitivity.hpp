#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace egopt::sens {

struct AnovaRow {
  std::string factor;
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  double f_value = 0.0;  // NaN on the residual row
  double p_value = 0.0;  // NaN on the residual row
};

/// Sequential (type I) ANOVA table: one row per factor in the given order,
/// plus the residual row. Factor SS and residual SS always sum to the total.
struct AnovaTable {
  std::vector<AnovaRow> factors;
  AnovaRow residual;
  double total_ss = 0.0;
  bool exact_fit = false;  // residual SS vanished; p-values reported as 0
};

/// Ordinary least squares via Householder QR, intercept first.
/// Throws SingularDesignError (naming the dependent columns) when the
/// design, including the intercept, is rank deficient.
Eigen::VectorXd fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Type I decomposition: factor k's SS is the drop in residual SS when it
/// joins the regression after factors 1..k-1. Order matters for individual
/// rows, never for the total or the residual.
AnovaTable anova_sequential(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            const std::vector<std::string>& factor_names);

/// Share of the total sum of squares per factor, residual included; the
/// values sum to 100.
std::vector<std::pair<std::string, double>> ss_percentages(const AnovaTable& table);

/// Survival function of the F(df1, df2) distribution.
double f_sf(double f, int df1, int df2);

/// Leave-one-factor-out ablation: for each factor, the drop in the linear
/// model's R^2 when that factor is removed (all others kept).
std::vector<std::pair<std::string, double>> ablation_delta_r2(
    const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
    const std::vector<std::string>& factor_names);

}  // namespace egopt::sens
