#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "egopt/search_space.hpp"

namespace egopt {

/// n x d design over the unit cube. Each column places exactly one point in
/// each of the n equal strata [k/n, (k+1)/n).
struct DesignMatrix {
  Eigen::MatrixXd points;  // n x d, entries in [0, 1)
  std::uint64_t seed = 0;
};

/// Classic Latin hypercube: per column an independent random permutation of
/// the strata, uniform position within each stratum. Deterministic in seed.
DesignMatrix lhs_sample(int dim, int count, std::uint64_t seed);

/// Maps every design row through SearchSpace::from_unit.
std::vector<Eigen::VectorXd> design_to_raw(const SearchSpace& space, const DesignMatrix& design);

}  // namespace egopt
