#include "rpf/grow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpf/parallel.hpp"

namespace rpf {

namespace {

struct GrowLeaf {
  Region region;
  double value = 0.0;
  std::vector<int> pts;  // sample rows inside the region
};

struct GrowTree {
  CoordSet coords;
  std::vector<GrowLeaf> leaves;
};

using GrowForest = std::map<CoordSet, GrowTree>;

double grow_predict(const GrowForest& trees, const Eigen::RowVectorXd& x) {
  double total = 0.0;
  for (const auto& [coords, tree] : trees) {
    for (const GrowLeaf& leaf : tree.leaves) {
      if (region_contains(leaf.region, x)) total += leaf.value;
    }
  }
  return total;
}

std::map<CoordSet, int> leaf_count_map(const GrowForest& trees) {
  std::map<CoordSet, int> counts;
  for (const auto& [coords, tree] : trees) counts[coords] = static_cast<int>(tree.leaves.size());
  return counts;
}

bool splittable_anywhere(const Dataset& data) {
  for (int k = 0; k < data.d(); ++k) {
    if (data.x.col(k).minCoeff() < data.x.col(k).maxCoeff()) return true;
  }
  return false;
}

struct BestSplit {
  bool found = false;
  double gain = -kInf;
  int combo = -1;
  int leaf = -1;
  double point = 0.0;
};

}  // namespace

std::vector<Combination> viable_combinations(const std::map<CoordSet, int>& leaf_counts,
                                             int max_interaction, int d) {
  const int cap = max_interaction == 0 ? d : std::min(max_interaction, d);
  std::vector<Combination> combos;
  for (const auto& [coords, count] : leaf_counts) {
    const bool may_spawn = count > 1 && static_cast<int>(coords.size()) + 1 <= cap;
    for (int k = 0; k < d; ++k) {
      const bool own = std::binary_search(coords.begin(), coords.end(), k);
      if (own)
        combos.push_back({coords, k, false});
      else if (may_spawn)
        combos.push_back({coords, k, true});
    }
  }
  return combos;
}

std::vector<Combination> viable_combinations(const TreeFamily& family, int max_interaction,
                                             int d) {
  std::map<CoordSet, int> counts;
  for (const auto& [coords, tree] : family.trees) counts[coords] = tree.leaf_count();
  return viable_combinations(counts, max_interaction, d);
}

std::vector<Combination> sample_combinations(const std::vector<Combination>& all, double t_try,
                                             Rng& rng) {
  const std::size_t total = all.size();
  const std::size_t take = static_cast<std::size_t>(
      std::ceil(static_cast<double>(total) * t_try));
  std::vector<std::size_t> index(total);
  std::iota(index.begin(), index.end(), std::size_t{0});
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.below(total - i);
    std::swap(index[i], index[j]);
  }
  index.resize(take);
  std::sort(index.begin(), index.end());
  std::vector<Combination> chosen;
  chosen.reserve(take);
  for (std::size_t i : index) chosen.push_back(all[i]);
  return chosen;
}

TreeFamily grow_family(const Dataset& data, const FitParams& params, Rng& rng) {
  const int n = data.n();
  const int d = data.d();
  Eigen::VectorXd residuals = data.y;

  GrowForest trees;
  {
    std::vector<int> all_pts(n);
    std::iota(all_pts.begin(), all_pts.end(), 0);
    for (int k = 0; k < d; ++k) {
      GrowTree tree;
      tree.coords = {k};
      tree.leaves.push_back({Region{{k}, {Interval{}}}, 0.0, all_pts});
      trees.emplace(tree.coords, std::move(tree));
    }
  }

  TreeFamily family;
  family.ssr_trajectory.push_back(residuals.squaredNorm());

  std::vector<double> pool, cands;

  for (int s = 1; s <= params.nsplits; ++s) {
    const std::vector<Combination> all =
        viable_combinations(leaf_count_map(trees), params.max_interaction, d);
    const std::vector<Combination> chosen = sample_combinations(all, params.t_try, rng);

    BestSplit best;
    for (std::size_t ci = 0; ci < chosen.size(); ++ci) {
      const Combination& combo = chosen[ci];
      const GrowTree& tree = trees.at(combo.tree_coords);
      const int k = combo.split_coord;
      int axis = -1;
      if (!combo.spawn) {
        axis = static_cast<int>(std::lower_bound(tree.coords.begin(), tree.coords.end(), k) -
                                tree.coords.begin());
      }
      for (std::size_t j = 0; j < tree.leaves.size(); ++j) {
        const GrowLeaf& leaf = tree.leaves[j];
        const double sup = combo.spawn ? kInf : leaf.region.bounds[axis].upper;
        pool.clear();
        for (int i : leaf.pts) {
          const double v = data.x(i, k);
          if (v < sup) pool.push_back(v);
        }
        if (pool.empty()) continue;
        cands.clear();
        if (params.full_candidate_pool) {
          cands = pool;
          std::sort(cands.begin(), cands.end());
          cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
        } else {
          for (int t = 0; t < params.split_try; ++t) cands.push_back(pool[rng.below(pool.size())]);
        }
        double sum_all = 0.0;
        for (int i : leaf.pts) sum_all += residuals(i);
        for (const double c : cands) {
          double sum_plus = 0.0;
          int n_plus = 0;
          for (int i : leaf.pts) {
            if (data.x(i, k) > c) {
              sum_plus += residuals(i);
              ++n_plus;
            }
          }
          const int n_minus = static_cast<int>(leaf.pts.size()) - n_plus;
          if (n_plus == 0 || n_minus == 0) continue;
          const double sum_minus = sum_all - sum_plus;
          const double gain = sum_plus * sum_plus / n_plus + sum_minus * sum_minus / n_minus;
          if (gain > best.gain) {
            best = {true, gain, static_cast<int>(ci), static_cast<int>(j), c};
          }
        }
      }
    }

    if (!best.found) {
      if (s == 1 && !splittable_anywhere(data)) throw DegenerateDataError();
      family.ssr_trajectory.push_back(residuals.squaredNorm());
      continue;
    }

    const Combination& combo = chosen[best.combo];
    GrowTree& tree = trees.at(combo.tree_coords);
    GrowLeaf& leaf = tree.leaves[best.leaf];
    const int k = combo.split_coord;
    const double c = best.point;
    const int source_leaf_count = static_cast<int>(tree.leaves.size());

    std::vector<int> in_plus, in_minus;
    double sum_plus = 0.0, sum_minus = 0.0;
    for (int i : leaf.pts) {
      if (data.x(i, k) > c) {
        in_plus.push_back(i);
        sum_plus += residuals(i);
      } else {
        in_minus.push_back(i);
        sum_minus += residuals(i);
      }
    }
    const double mu_plus = sum_plus / static_cast<double>(in_plus.size());
    const double mu_minus = sum_minus / static_cast<double>(in_minus.size());
    for (int i : in_plus) residuals(i) -= mu_plus;
    for (int i : in_minus) residuals(i) -= mu_minus;

    if (!combo.spawn) {
      const int axis = static_cast<int>(
          std::lower_bound(tree.coords.begin(), tree.coords.end(), k) - tree.coords.begin());
      GrowLeaf child_minus;
      child_minus.region = leaf.region;
      child_minus.region.bounds[axis].upper = c;
      child_minus.value = leaf.value + mu_minus;
      child_minus.pts = std::move(in_minus);
      // upper child takes the parent's slot, lower child is appended
      leaf.region.bounds[axis].lower = c;
      leaf.value += mu_plus;
      leaf.pts = std::move(in_plus);
      tree.leaves.push_back(std::move(child_minus));
    } else {
      CoordSet target_coords = combo.tree_coords;
      target_coords.insert(
          std::lower_bound(target_coords.begin(), target_coords.end(), k), k);
      auto [it, inserted] = trees.try_emplace(target_coords);
      GrowTree& target = it->second;
      if (inserted) target.coords = target_coords;
      const Region lifted = lift_region(leaf.region, k);
      const int axis = static_cast<int>(
          std::lower_bound(target_coords.begin(), target_coords.end(), k) -
          target_coords.begin());
      GrowLeaf child_plus{lifted, mu_plus, std::move(in_plus)};
      child_plus.region.bounds[axis].lower = c;
      GrowLeaf child_minus{lifted, mu_minus, std::move(in_minus)};
      child_minus.region.bounds[axis].upper = c;
      target.leaves.push_back(std::move(child_plus));
      target.leaves.push_back(std::move(child_minus));
    }

    family.split_log.push_back(
        {s, combo.tree_coords, k, best.leaf, c, combo.spawn, source_leaf_count, best.gain});
    family.ssr_trajectory.push_back(residuals.squaredNorm());

    if (params.check_invariants) {
      for (int i = 0; i < n; ++i) {
        const double drift =
            std::abs(data.y(i) - grow_predict(trees, data.x.row(i)) - residuals(i));
        if (drift > 1e-10) throw std::logic_error("residual bookkeeping drifted");
      }
    }
  }

  for (auto& [coords, tree] : trees) {
    Tree out;
    out.coords = coords;
    out.leaves.reserve(tree.leaves.size());
    for (GrowLeaf& leaf : tree.leaves) out.leaves.push_back({std::move(leaf.region), leaf.value});
    family.trees.emplace(coords, std::move(out));
  }
  family.residuals = std::move(residuals);
  return family;
}

ForestModel fit_forest(const Dataset& data, const FitParams& params, int threads) {
  data.validate();
  params.validate();

  ForestModel model;
  model.params = params;
  model.d = data.d();
  model.feature_names = data.feature_names;
  model.training_range.min = data.x.colwise().minCoeff();
  model.training_range.max = data.x.colwise().maxCoeff();
  model.families.resize(params.ntrees);

  const int n = data.n();
  parallel_for(params.ntrees, threads, [&](int b) {
    const std::uint64_t family_seed = derive_seed(params.seed, static_cast<std::uint64_t>(b));
    Rng rng(family_seed);
    std::vector<int> idx(n);
    if (params.bootstrap) {
      for (int i = 0; i < n; ++i) idx[i] = static_cast<int>(rng.below(n));
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    Dataset sample;
    sample.x.resize(n, data.d());
    sample.y.resize(n);
    for (int i = 0; i < n; ++i) {
      sample.x.row(i) = data.x.row(idx[i]);
      sample.y(i) = data.y(idx[i]);
    }
    sample.feature_names = data.feature_names;
    TreeFamily family = grow_family(sample, params, rng);
    family.rng_seed = family_seed;
    family.sample_indices = std::move(idx);
    model.families[b] = std::move(family);
  });
  return model;
}

Eigen::VectorXd extract_component(const ForestModel& model, const CoordSet& u,
                                  const Eigen::MatrixXd& grid) {
  if (u.empty() || u.size() > 2) throw UnsupportedOrderError();
  if (grid.cols() != static_cast<Eigen::Index>(u.size()))
    throw std::invalid_argument("grid column count must match |u|");
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    for (std::size_t a = 0; a < u.size(); ++a) {
      if (grid(g, a) < model.training_range.min(u[a]) ||
          grid(g, a) > model.training_range.max(u[a]))
        throw DomainError("grid point outside the training range");
    }
  }
  Eigen::VectorXd values = Eigen::VectorXd::Zero(grid.rows());
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(model.d);
  for (Eigen::Index g = 0; g < grid.rows(); ++g) {
    for (std::size_t a = 0; a < u.size(); ++a) x(u[a]) = grid(g, a);
    double total = 0.0;
    for (const TreeFamily& family : model.families) {
      const auto it = family.trees.find(u);
      if (it != family.trees.end()) total += tree_component_value(it->second, x);
    }
    values(g) = total / static_cast<double>(model.families.size());
  }
  return values;
}

}  // namespace rpf
