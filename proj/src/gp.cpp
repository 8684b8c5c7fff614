#include "egopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "egopt/lhs.hpp"
#include "egopt/rng.hpp"
#include "egopt/tolerances.hpp"

namespace egopt::gp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr std::uint64_t kFitStartSalt = 0x6f70f17;

Eigen::MatrixXd kernel_gram(const Eigen::MatrixXd& x, const KernelParams& params) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double dist = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double delta = x(i, c) - x(j, c);
        dist += params.theta[c] * delta * delta;
      }
      const double v = std::exp(-dist);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

/// Gram + nugget, factorized with the escalating-jitter rescue.
numerics::CholeskyFactor factor_gram(const Eigen::MatrixXd& x, const KernelParams& params) {
  Eigen::MatrixXd gram = kernel_gram(x, params);
  gram.diagonal().array() += params.nugget;
  double jitter = 0.0;
  while (true) {
    try {
      return numerics::cholesky(numerics::SymmetricMatrix(gram));
    } catch (const NumericalError&) {
      const double next = (jitter == 0.0) ? tol::kJitterInitial : jitter * tol::kJitterGrowth;
      if (next > tol::kJitterMax) throw;
      gram.diagonal().array() += next - jitter;
      jitter = next;
    }
  }
}

double nlml_from_factor(const numerics::CholeskyFactor& factor, const Eigen::VectorXd& centered) {
  const Eigen::VectorXd v = factor.solve_lower(centered);
  return factor.half_log_det() + 0.5 * v.squaredNorm() +
         0.5 * static_cast<double>(centered.size()) * kLog2Pi;
}

struct NelderMeadResult {
  Eigen::VectorXd best_point;
  double best_value = std::numeric_limits<double>::infinity();
};

/// Nelder-Mead over a box, points projected onto the box before evaluation.
/// Tracks the best point ever evaluated, so the result can never be worse
/// than the start.
template <typename F>
NelderMeadResult nelder_mead_box(F&& objective, const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                 int max_iter) {
  const int m = static_cast<int>(start.size());
  auto clamp = [&](Eigen::VectorXd p) {
    for (int j = 0; j < m; ++j) p[j] = std::min(hi[j], std::max(lo[j], p[j]));
    return p;
  };

  NelderMeadResult result;
  auto eval = [&](const Eigen::VectorXd& p) {
    const double f = objective(p);
    if (f < result.best_value) {
      result.best_value = f;
      result.best_point = p;
    }
    return f;
  };

  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> fvals;
  simplex.push_back(clamp(start));
  fvals.push_back(eval(simplex[0]));
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd p = simplex[0];
    const double step = 0.25 * (hi[j] - lo[j]);
    p[j] += (p[j] + step <= hi[j]) ? step : -step;
    simplex.push_back(clamp(p));
    fvals.push_back(eval(simplex.back()));
  }

  std::vector<int> order(simplex.size());
  for (int it = 0; it < max_iter; ++it) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fvals[a] < fvals[b]; });
    const int best = order.front();
    const int worst = order.back();
    const int second_worst = order[order.size() - 2];

    double spread = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i) {
      spread = std::max(spread, (simplex[static_cast<std::size_t>(order[i])] -
                                 simplex[static_cast<std::size_t>(best)])
                                    .cwiseAbs()
                                    .maxCoeff());
    }
    if (spread < 1e-9 &&
        std::abs(fvals[worst] - fvals[best]) < 1e-11 * (std::abs(fvals[best]) + 1.0)) {
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(m);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      centroid += simplex[static_cast<std::size_t>(order[i])];
    }
    centroid /= static_cast<double>(m);

    const Eigen::VectorXd& xw = simplex[static_cast<std::size_t>(worst)];
    Eigen::VectorXd reflected = clamp(centroid + (centroid - xw));
    const double fr = eval(reflected);

    if (fr < fvals[best]) {
      Eigen::VectorXd expanded = clamp(centroid + 2.0 * (centroid - xw));
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[static_cast<std::size_t>(worst)] = expanded;
        fvals[static_cast<std::size_t>(worst)] = fe;
      } else {
        simplex[static_cast<std::size_t>(worst)] = reflected;
        fvals[static_cast<std::size_t>(worst)] = fr;
      }
    } else if (fr < fvals[second_worst]) {
      simplex[static_cast<std::size_t>(worst)] = reflected;
      fvals[static_cast<std::size_t>(worst)] = fr;
    } else {
      Eigen::VectorXd contracted = clamp(centroid + 0.5 * (xw - centroid));
      const double fc = eval(contracted);
      if (fc < fvals[worst]) {
        simplex[static_cast<std::size_t>(worst)] = contracted;
        fvals[static_cast<std::size_t>(worst)] = fc;
      } else {
        // shrink toward the best vertex
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (static_cast<int>(i) == best) continue;
          simplex[i] = clamp(simplex[static_cast<std::size_t>(best)] +
                             0.5 * (simplex[i] - simplex[static_cast<std::size_t>(best)]));
          fvals[i] = eval(simplex[i]);
        }
      }
    }
  }
  return result;
}

}  // namespace

void KernelParams::validate(int dim) const {
  if (theta.size() != dim) {
    throw std::invalid_argument("KernelParams: theta has " + std::to_string(theta.size()) +
                                " entries, expected " + std::to_string(dim));
  }
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    if (!(theta[j] >= tol::kThetaMin && theta[j] <= tol::kThetaMax)) {
      throw std::invalid_argument("KernelParams: theta[" + std::to_string(j) + "] out of range");
    }
  }
  if (!(nugget >= tol::kNuggetMin && nugget <= tol::kNuggetMax)) {
    throw std::invalid_argument("KernelParams: nugget out of range");
  }
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const KernelParams& params) {
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("kernel_matrix: dimension mismatch (" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.cols()) + ")");
  }
  if (params.theta.size() != a.cols()) {
    throw std::invalid_argument("kernel_matrix: theta dimension mismatch");
  }
  Eigen::MatrixXd k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      double dist = 0.0;
      for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double delta = a(i, c) - b(j, c);
        dist += params.theta[c] * delta * delta;
      }
      k(i, j) = std::exp(-dist);
    }
  }
  return k;
}

double nlml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double mean,
            const KernelParams& params) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("nlml: X and y row counts differ");
  }
  params.validate(static_cast<int>(x.cols()));
  const auto factor = factor_gram(x, params);
  return nlml_from_factor(factor, (y.array() - mean).matrix());
}

GpModel::GpModel(Eigen::MatrixXd x, Eigen::VectorXd y, double y_mean, double y_scale,
                 KernelParams params)
    : x_(std::move(x)),
      y_(std::move(y)),
      y_mean_(y_mean),
      y_scale_(y_scale),
      params_(std::move(params)),
      chol_(factor_gram(x_, params_)) {
  const Eigen::VectorXd y_std = standardized();
  alpha_ = chol_.solve(y_std);
  fitted_nlml_ = nlml_from_factor(chol_, y_std);
}

GpModel GpModel::with_params(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const KernelParams& params) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("GpModel: X and y row counts differ");
  }
  if (x.rows() < 2) {
    throw std::invalid_argument("GpModel: need at least two observations");
  }
  if (!y.allFinite()) {
    throw std::invalid_argument("GpModel: responses must be finite");
  }
  params.validate(static_cast<int>(x.cols()));
  const double mean = y.mean();
  double scale = std::sqrt((y.array() - mean).square().mean());
  if (!(scale > 0.0)) scale = 1.0;
  return GpModel(x, y, mean, scale, params);
}

GpModel GpModel::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitConfig& cfg) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument("fit: X and y row counts differ");
  }
  if (x.rows() < 2) {
    throw std::invalid_argument("fit: need at least two observations");
  }
  if (!y.allFinite()) {
    throw std::invalid_argument("fit: responses must be finite");
  }
  if (cfg.restarts < 1) {
    throw std::invalid_argument("fit: restarts must be >= 1");
  }
  const int d = static_cast<int>(x.cols());

  const double mean = y.mean();
  double scale = std::sqrt((y.array() - mean).square().mean());
  if (!(scale > 0.0)) scale = 1.0;
  const Eigen::VectorXd y_std = (y.array() - mean).matrix() / scale;

  // Optimize over z = (log theta_1..d, log nugget).
  const int m = d + 1;
  Eigen::VectorXd lo(m), hi(m);
  for (int j = 0; j < d; ++j) {
    lo[j] = std::log(cfg.theta_bounds[0]);
    hi[j] = std::log(cfg.theta_bounds[1]);
  }
  lo[d] = std::log(cfg.nugget_bounds[0]);
  hi[d] = std::log(cfg.nugget_bounds[1]);

  auto params_at = [&](const Eigen::VectorXd& z) {
    KernelParams p;
    p.theta = z.head(d).array().exp().matrix();
    p.nugget = std::exp(z[d]);
    return p;
  };
  auto objective = [&](const Eigen::VectorXd& z) {
    try {
      return nlml_from_factor(factor_gram(x, params_at(z)), y_std);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  std::vector<Eigen::VectorXd> starts;
  const DesignMatrix grid = lhs_sample(m, cfg.restarts, mix_seed(cfg.seed, kFitStartSalt));
  for (int i = 0; i < cfg.restarts; ++i) {
    Eigen::VectorXd z(m);
    for (int j = 0; j < m; ++j) z[j] = lo[j] + grid.points(i, j) * (hi[j] - lo[j]);
    starts.push_back(std::move(z));
  }
  for (const auto& extra : cfg.extra_starts) {
    extra.validate(d);
    Eigen::VectorXd z(m);
    for (int j = 0; j < d; ++j) z[j] = std::log(extra.theta[j]);
    z[d] = std::log(extra.nugget);
    for (int j = 0; j < m; ++j) z[j] = std::min(hi[j], std::max(lo[j], z[j]));
    starts.push_back(std::move(z));
  }

  Eigen::VectorXd best_z;
  double best_f = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    const auto res = nelder_mead_box(objective, start, lo, hi, 150);
    if (res.best_value < best_f) {
      best_f = res.best_value;
      best_z = res.best_point;
    }
  }
  if (!std::isfinite(best_f)) {
    throw NumericalError("fit: every candidate kernel failed to factorize");
  }
  return GpModel(x, y, mean, scale, params_at(best_z));
}

GpModel GpModel::augmented(const Eigen::VectorXd& x, double y) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("augmented: point dimension mismatch");
  }
  Eigen::MatrixXd nx(x_.rows() + 1, x_.cols());
  nx << x_, x.transpose();
  Eigen::VectorXd ny(y_.size() + 1);
  ny << y_, y;
  return GpModel(std::move(nx), std::move(ny), y_mean_, y_scale_, params_);
}

GpModel GpModel::without_row(int i) const {
  if (i < 0 || i >= size()) {
    throw std::invalid_argument("without_row: index out of range");
  }
  if (size() < 3) {
    throw std::invalid_argument("without_row: model would drop below two points");
  }
  const int n = size();
  Eigen::MatrixXd nx(n - 1, x_.cols());
  Eigen::VectorXd ny(n - 1);
  int r = 0;
  for (int k = 0; k < n; ++k) {
    if (k == i) continue;
    nx.row(r) = x_.row(k);
    ny[r] = y_[k];
    ++r;
  }
  return GpModel(std::move(nx), std::move(ny), y_mean_, y_scale_, params_);
}

Posterior GpModel::posterior(const Eigen::MatrixXd& xq) const {
  if (xq.cols() != dim()) {
    throw std::invalid_argument("posterior: query dimension mismatch");
  }
  const Eigen::MatrixXd kxq = kernel_matrix(xq, x_, params_);  // q x n
  Posterior post;
  post.mean = (y_mean_ + (y_scale_ * (kxq * alpha_).array())).matrix();
  const Eigen::MatrixXd kxq_t = kxq.transpose();
  const Eigen::MatrixXd v = chol_.solve_lower(kxq_t);  // n x q
  Eigen::MatrixXd cov = kernel_matrix(xq, xq, params_) - v.transpose() * v;
  cov = 0.5 * (cov + cov.transpose());
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) < tol::kVarClampFloor) cov(i, i) = tol::kVarClampFloor;
  }
  post.cov = (y_scale_ * y_scale_) * cov;
  return post;
}

Prediction GpModel::predict_one(const Eigen::VectorXd& x) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("predict_one: point dimension mismatch");
  }
  const int n = size();
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    double dist = 0.0;
    for (int c = 0; c < dim(); ++c) {
      const double delta = x_(i, c) - x[c];
      dist += params_.theta[c] * delta * delta;
    }
    k[i] = std::exp(-dist);
  }
  const Eigen::VectorXd v = chol_.solve_lower(k);
  Prediction out;
  out.mean = y_mean_ + y_scale_ * k.dot(alpha_);
  out.var = y_scale_ * y_scale_ * std::max(tol::kVarClampFloor, 1.0 - v.squaredNorm());
  return out;
}

double GpModel::loo_r_squared() const {
  if (size() < 3) {
    throw std::invalid_argument("loo_r_squared: need at least three observations");
  }
  const Eigen::VectorXd y_std = standardized();
  const double tss = (y_.array() - y_mean_).square().sum();
  if (!(tss > 0.0)) {
    throw std::domain_error("loo_r_squared: responses have zero variance");
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(size(), size());
  const Eigen::MatrixXd kinv = chol_.solve(identity);
  double rss = 0.0;
  for (int i = 0; i < size(); ++i) {
    const double resid = y_scale_ * alpha_[i] / kinv(i, i);
    rss += resid * resid;
  }
  return 1.0 - rss / tss;
}

double GpModel::objective_nlml(const KernelParams& params) const {
  params.validate(dim());
  return nlml_from_factor(factor_gram(x_, params), standardized());
}

std::uint64_t GpModel::digest() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t n = size(), d = dim();
  mix(&n, sizeof n);
  mix(&d, sizeof d);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < dim(); ++j) {
      const double v = x_(i, j);
      mix(&v, sizeof v);
    }
    const double yi = y_[i];
    mix(&yi, sizeof yi);
  }
  for (int j = 0; j < dim(); ++j) {
    const double t = params_.theta[j];
    mix(&t, sizeof t);
  }
  mix(&params_.nugget, sizeof params_.nugget);
  mix(&y_mean_, sizeof y_mean_);
  mix(&y_scale_, sizeof y_scale_);
  return h;
}

}  // namespace egopt::gp
