#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "rpf/rng.hpp"
#include "rpf/types.hpp"

namespace rpf {

// A scored candidate: split leaf `leaf` of the tree over `tree` coords along
// `coordinate` at `point`. `score` is the total SSR after hypothetically
// applying the split; REJECT is represented by an unset score.
struct SplitCandidate {
  CoordSet tree;
  int coordinate = -1;
  int leaf = -1;
  double point = 0.0;
  std::optional<double> score;
};

struct SplitResult {
  Region region_plus;
  Region region_minus;
  double value_plus = 0.0;
  double value_minus = 0.0;
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  std::vector<int> in_plus;   // sample indices landing in the upper child
  std::vector<int> in_minus;  // sample indices landing in the lower child
};

// Means of `residuals` over the two index sets; throws EmptyChild if either is empty.
std::pair<double, double> split_means(const Eigen::VectorXd& residuals,
                                      const std::vector<int>& in_plus,
                                      const std::vector<int>& in_minus);

// Adds coordinate k to the region with an unbounded interval (new interaction case).
Region lift_region(const Region& region, int k);

// The candidate pool for (leaf, k): values x_{i,k} of the points inside the
// leaf, excluding values equal to the upper bound of the leaf's k-extent.
std::vector<double> candidate_pool(const Region& leaf, int k, const Dataset& data);

// split_try draws from the pool, uniform with replacement; empty if the pool is empty.
std::vector<double> candidate_points(const Region& leaf, int k, const Dataset& data,
                                     int split_try, Rng& rng);

// Sorted distinct pool values (exhaustive mode).
std::vector<double> distinct_candidate_points(const Region& leaf, int k, const Dataset& data);

// Total SSR over all residuals after hypothetically splitting; nullopt when a
// child is empty of data (REJECT).
std::optional<double> score_split(const Region& leaf, int k, double c, const Dataset& data,
                                  const Eigen::VectorXd& residuals);

// Splits the leaf at c along k (k must be one of the leaf's coordinates; lift
// first for the new-interaction case), mean-centering the residuals of covered
// points. Child values are leaf_value plus the respective child mean.
SplitResult apply_split(const Region& leaf, double leaf_value, int k, double c,
                        const Dataset& data, Eigen::VectorXd& residuals);

// Minimal finite score; ties go to the earliest candidate in list order.
// Throws NoValidSplit when every candidate is REJECT.
const SplitCandidate& select_best(const std::vector<SplitCandidate>& candidates);

}  // namespace rpf
