#include "egopt/lhs.hpp"

#include <numeric>
#include <stdexcept>

#include "egopt/rng.hpp"

namespace egopt {

DesignMatrix lhs_sample(int dim, int count, std::uint64_t seed) {
  if (count < 1 || dim < 1) {
    throw std::invalid_argument("lhs_sample: need count >= 1 and dim >= 1");
  }
  Rng rng(seed);
  const double width = 1.0 / count;
  Eigen::MatrixXd points(count, dim);
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int j = 0; j < dim; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    for (int i = 0; i < count; ++i) {
      points(i, j) = (strata[static_cast<std::size_t>(i)] + rng.uniform()) * width;
    }
  }
  return DesignMatrix{std::move(points), seed};
}

std::vector<Eigen::VectorXd> design_to_raw(const SearchSpace& space, const DesignMatrix& design) {
  if (design.points.cols() != space.dim()) {
    throw std::invalid_argument("design_to_raw: design has " +
                                std::to_string(design.points.cols()) + " columns, space has " +
                                std::to_string(space.dim()));
  }
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(static_cast<std::size_t>(design.points.rows()));
  for (Eigen::Index i = 0; i < design.points.rows(); ++i) {
    rows.push_back(space.from_unit(design.points.row(i).transpose()));
  }
  return rows;
}

}  // namespace egopt
