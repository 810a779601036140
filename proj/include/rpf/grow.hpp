#pragma once

#include <map>

#include "rpf/rng.hpp"
#include "rpf/split.hpp"
#include "rpf/types.hpp"

namespace rpf {

// A (tree, coordinate) pair eligible for splitting this iteration. `spawn`
// means the coordinate is foreign to the tree: children land in the tree over
// tree_coords + {split_coord}.
struct Combination {
  CoordSet tree_coords;
  int split_coord = -1;
  bool spawn = false;
};

// Eligible combinations given current leaf counts: (u, k in u) for every tree,
// plus (u, k not in u) when the u-tree has more than one leaf and the enlarged
// order stays within the cap. Returned in scan order (tree coords
// lexicographic, then coordinate).
std::vector<Combination> viable_combinations(const std::map<CoordSet, int>& leaf_counts,
                                             int max_interaction, int d);
std::vector<Combination> viable_combinations(const TreeFamily& family, int max_interaction,
                                             int d);

// Uniform subset of size ceil(|V| * t_try) without replacement, scan order preserved.
std::vector<Combination> sample_combinations(const std::vector<Combination>& all, double t_try,
                                             Rng& rng);

// Grows one family of planted trees on `data` for params.nsplits iterations.
TreeFamily grow_family(const Dataset& data, const FitParams& params, Rng& rng);

// Fits params.ntrees families on bootstrap resamples (per-family seeds derived
// from params.seed, so the result does not depend on thread scheduling).
ForestModel fit_forest(const Dataset& data, const FitParams& params, int threads = 1);

// Average over families of the u-component at the given grid points (one
// column per coordinate in u). Raw components; they do not satisfy the
// mean-zero identification constraint.
Eigen::VectorXd extract_component(const ForestModel& model, const CoordSet& u,
                                  const Eigen::MatrixXd& grid);

}  // namespace rpf
