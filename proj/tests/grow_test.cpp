#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "rpf/grow.hpp"

#include "oracle.hpp"

using namespace rpf;

namespace {

Dataset line_data() {
  Dataset d;
  d.x.resize(4, 1);
  d.x << 0.1, 0.2, 0.6, 0.9;
  d.y.resize(4);
  d.y << 1.0, 1.0, 3.0, 3.0;
  return d;
}

Dataset make_random(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) data.x(i, k) = rng.uniform01();
    data.y(i) = std::sin(6.0 * data.x(i, 0)) + rng.normal();
  }
  return data;
}

bool same_combo(const Combination& a, const CoordSet& tree, int k, bool spawn) {
  return a.tree_coords == tree && a.split_coord == k && a.spawn == spawn;
}

}  // namespace

TEST_CASE("viable combinations for fresh singleton trees") {
  std::map<CoordSet, int> counts{{{0}, 1}, {{1}, 1}, {{2}, 1}};
  const auto v = viable_combinations(counts, 1, 3);
  REQUIRE(v.size() == 3);
  CHECK(same_combo(v[0], {0}, 0, false));
  CHECK(same_combo(v[1], {1}, 1, false));
  CHECK(same_combo(v[2], {2}, 2, false));
}

TEST_CASE("split trees unlock spawning, capped by the interaction order") {
  std::map<CoordSet, int> counts{{{0}, 2}, {{1}, 1}, {{2}, 1}};

  const auto capped = viable_combinations(counts, 1, 3);
  CHECK(capped.size() == 3);  // cap 1 forbids every spawn

  const auto open = viable_combinations(counts, 2, 3);
  REQUIRE(open.size() == 5);
  CHECK(same_combo(open[0], {0}, 0, false));
  CHECK(same_combo(open[1], {0}, 1, true));
  CHECK(same_combo(open[2], {0}, 2, true));
  CHECK(same_combo(open[3], {1}, 1, false));
  CHECK(same_combo(open[4], {2}, 2, false));

  // an interaction tree splits along both own coordinates and can spawn deeper
  std::map<CoordSet, int> deep{{{0}, 2}, {{1}, 1}, {{2}, 1}, {{0, 1}, 2}};
  const auto v3 = viable_combinations(deep, 0, 3);
  REQUIRE(v3.size() == 8);
  CHECK(same_combo(v3[0], {0}, 0, false));
  CHECK(same_combo(v3[1], {0}, 1, true));
  CHECK(same_combo(v3[2], {0}, 2, true));
  CHECK(same_combo(v3[3], {0, 1}, 0, false));
  CHECK(same_combo(v3[4], {0, 1}, 1, false));
  CHECK(same_combo(v3[5], {0, 1}, 2, true));
  CHECK(same_combo(v3[6], {1}, 1, false));
  CHECK(same_combo(v3[7], {2}, 2, false));
}

TEST_CASE("sampling keeps ceil(t_try * |V|) combinations in scan order") {
  std::map<CoordSet, int> counts{{{0}, 2}, {{1}, 2}, {{2}, 2}};
  const auto all = viable_combinations(counts, 0, 3);
  REQUIRE(all.size() == 9);

  Rng rng(5);
  for (const double t : {0.3, 0.5, 0.75, 1.0}) {
    const auto picked = sample_combinations(all, t, rng);
    CHECK(picked.size() == static_cast<std::size_t>(std::ceil(t * 9)));
    // order preserved and every pick is a member
    std::size_t cursor = 0;
    for (const Combination& c : picked) {
      while (cursor < all.size() &&
             !same_combo(all[cursor], c.tree_coords, c.split_coord, c.spawn))
        ++cursor;
      CHECK(cursor < all.size());
      ++cursor;
    }
  }
  CHECK(sample_combinations(all, 1.0, rng).size() == 9);
}

TEST_CASE("one perfect split on the line example") {
  FitParams params;
  params.ntrees = 1;
  params.nsplits = 1;
  params.t_try = 1.0;
  params.full_candidate_pool = true;
  params.bootstrap = false;

  Rng rng(1);
  const TreeFamily family = grow_family(line_data(), params, rng);

  REQUIRE(family.trees.count({0}) == 1);
  const Tree& tree = family.trees.at({0});
  REQUIRE(tree.leaf_count() == 2);
  // the upper child replaces the parent slot, the lower child is appended
  CHECK(tree.leaves[0].region.bounds[0].lower == 0.2);
  CHECK(tree.leaves[0].value == 3.0);
  CHECK(tree.leaves[1].region.bounds[0].upper == 0.2);
  CHECK(tree.leaves[1].value == 1.0);

  CHECK(family.residuals.cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(family.ssr_trajectory.size() == 2);
  CHECK(family.ssr_trajectory[0] == 20.0);
  CHECK(family.ssr_trajectory[1] == 0.0);

  REQUIRE(family.split_log.size() == 1);
  const SplitRecord& rec = family.split_log[0];
  CHECK(rec.iteration == 1);
  CHECK(rec.tree == CoordSet{0});
  CHECK(rec.coordinate == 0);
  CHECK(rec.point == 0.2);
  CHECK(!rec.spawned);
  CHECK(rec.gain == doctest::Approx(20.0));
}

TEST_CASE("iterations without a valid candidate still count") {
  Dataset d;
  d.x.resize(2, 1);
  d.x << 0.1, 0.9;
  d.y.resize(2);
  d.y << 0.0, 2.0;

  FitParams params;
  params.ntrees = 1;
  params.nsplits = 5;
  params.t_try = 1.0;
  params.full_candidate_pool = true;
  params.bootstrap = false;

  Rng rng(1);
  const TreeFamily family = grow_family(d, params, rng);
  CHECK(family.split_log.size() == 1);  // only the first iteration can split
  CHECK(family.ssr_trajectory.size() == 6);
  CHECK(family.ssr_trajectory.back() == 0.0);
  CHECK(family.trees.at({0}).leaf_count() == 2);
}

TEST_CASE("all-tied predictors are degenerate") {
  Dataset d;
  d.x = Eigen::MatrixXd::Constant(5, 2, 0.7);
  d.y.resize(5);
  d.y << 1, 2, 3, 4, 5;
  FitParams params;
  params.ntrees = 1;
  params.bootstrap = false;
  CHECK_THROWS_AS(fit_forest(d, params), DegenerateDataError);

  // one varying coordinate is enough to avoid the degenerate case
  d.x(0, 1) = 0.1;
  CHECK_NOTHROW(fit_forest(d, params));
}

TEST_CASE("residual bookkeeping and monotone SSR on random growth") {
  const Dataset data = make_random(60, 3, 31);
  FitParams params;
  params.ntrees = 4;
  params.nsplits = 40;
  params.max_interaction = 0;
  params.split_try = 5;
  params.check_invariants = true;  // re-derives residuals every iteration
  const ForestModel model = fit_forest(data, params, 2);

  for (const TreeFamily& family : model.families) {
    REQUIRE(family.ssr_trajectory.size() == 41);
    for (std::size_t s = 1; s < family.ssr_trajectory.size(); ++s)
      CHECK(family.ssr_trajectory[s] <= family.ssr_trajectory[s - 1] + 1e-9);

    // final residuals agree with the family prediction on its own sample
    double worst = 0.0;
    for (int i = 0; i < data.n(); ++i) {
      const Eigen::RowVectorXd row = data.x.row(family.sample_indices[i]);
      const double pred = family_predict(family, row);
      worst = std::max(worst,
                       std::abs(data.y(family.sample_indices[i]) - pred - family.residuals(i)));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("spawns append child pairs to the enlarged tree") {
  const Dataset data = make_random(80, 3, 7);
  FitParams params;
  params.ntrees = 3;
  params.nsplits = 30;
  params.max_interaction = 0;
  const ForestModel model = fit_forest(data, params);

  for (const TreeFamily& family : model.families) {
    std::map<CoordSet, int> spawns, in_tree;
    for (const SplitRecord& rec : family.split_log) {
      if (rec.spawned) {
        CoordSet target = rec.tree;
        target.insert(std::lower_bound(target.begin(), target.end(), rec.coordinate),
                      rec.coordinate);
        spawns[target] += 1;
        CHECK(rec.source_leaf_count > 1);  // only split trees may spawn
      } else {
        in_tree[rec.tree] += 1;
      }
    }
    for (const auto& [coords, tree] : family.trees) {
      if (coords.size() == 1) {
        CHECK(tree.leaf_count() == 1 + in_tree[coords]);
      } else {
        CHECK(spawns[coords] > 0);  // interaction trees only exist via spawning
        CHECK(tree.leaf_count() == 2 * spawns[coords] + in_tree[coords]);
      }
    }
  }
}

TEST_CASE("interaction order respects the cap") {
  const Dataset data = make_random(100, 4, 13);
  for (const int cap : {1, 2, 3}) {
    FitParams params;
    params.ntrees = 2;
    params.nsplits = 50;
    params.max_interaction = cap;
    const ForestModel model = fit_forest(data, params);
    int widest = 0;
    for (const TreeFamily& family : model.families)
      for (const auto& [coords, tree] : family.trees)
        widest = std::max(widest, static_cast<int>(coords.size()));
    CHECK(widest <= cap);
  }
}

TEST_CASE("one-coordinate trees partition the line") {
  const Dataset data = make_random(50, 2, 17);
  FitParams params;
  params.ntrees = 2;
  params.nsplits = 25;
  params.max_interaction = 1;
  const ForestModel model = fit_forest(data, params);

  Rng probe_rng(99);
  for (const TreeFamily& family : model.families) {
    for (const auto& [coords, tree] : family.trees) {
      REQUIRE(coords.size() == 1);
      for (int trial = 0; trial < 200; ++trial) {
        Eigen::RowVectorXd x(2);
        x << probe_rng.uniform01() * 2.0 - 0.5, probe_rng.uniform01() * 2.0 - 0.5;
        int containing = 0;
        for (const Leaf& leaf : tree.leaves)
          if (region_contains(leaf.region, x)) ++containing;
        CHECK(containing == 1);
      }
    }
  }
}

TEST_CASE("forest metadata and prediction averaging") {
  const Dataset data = make_random(40, 2, 23);
  FitParams params;
  params.ntrees = 3;
  params.nsplits = 10;
  const ForestModel model = fit_forest(data, params);

  CHECK(model.d == 2);
  CHECK(model.families.size() == 3);
  CHECK(model.training_range.min(0) == data.x.col(0).minCoeff());
  CHECK(model.training_range.max(1) == data.x.col(1).maxCoeff());

  Eigen::RowVectorXd x = data.x.row(0);
  double sum = 0.0;
  for (const TreeFamily& family : model.families) sum += family_predict(family, x);
  CHECK(forest_predict(model, x) == doctest::Approx(sum / 3.0).epsilon(1e-15));

  const Eigen::VectorXd batch = forest_predict(model, data.x);
  CHECK(batch.size() == 40);
  CHECK(batch(0) == forest_predict(model, x));
}

TEST_CASE("component extraction on the line example") {
  FitParams params;
  params.ntrees = 1;
  params.nsplits = 1;
  params.t_try = 1.0;
  params.full_candidate_pool = true;
  params.bootstrap = false;
  const ForestModel model = fit_forest(line_data(), params);

  Eigen::MatrixXd grid(2, 1);
  grid << 0.15, 0.5;
  const Eigen::VectorXd vals = extract_component(model, {0}, grid);
  CHECK(vals(0) == 1.0);
  CHECK(vals(1) == 3.0);

  Eigen::MatrixXd outside(1, 1);
  outside << 0.05;  // below the training minimum
  CHECK_THROWS_AS(extract_component(model, {0}, outside), DomainError);
  CHECK_THROWS_AS(extract_component(model, {0, 1, 2}, grid), UnsupportedOrderError);
  CHECK_THROWS_AS(extract_component(model, {0, 1}, grid), std::invalid_argument);
}

TEST_CASE("the first split decision matches an exhaustive reference") {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(26));
    const int d = 1 + static_cast<int>(rng.below(3));
    Dataset data;
    data.x.resize(n, d);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < d; ++k) {
        const double v = rng.uniform01();
        // every other column is discretized so duplicate values and exact
        // score ties actually occur
        data.x(i, k) = k % 2 == 0 ? v : std::floor(v * 4.0) / 4.0;
      }
      data.y(i) = rng.normal();
    }
    const oracle::FirstSplit expected = oracle::first_split(data);
    if (!expected.found) continue;

    FitParams params;
    params.ntrees = 1;
    params.nsplits = 1;
    params.t_try = 1.0;
    params.full_candidate_pool = true;
    params.bootstrap = false;
    Rng grow_rng(1);
    const TreeFamily family = grow_family(data, params, grow_rng);
    REQUIRE(family.split_log.size() == 1);
    const SplitRecord& rec = family.split_log[0];
    CHECK(rec.tree == CoordSet{expected.coordinate});
    CHECK(rec.coordinate == expected.coordinate);
    CHECK(rec.point == expected.point);
    CHECK(rec.gain == expected.gain);
    CHECK(rec.leaf == 0);
    CHECK(!rec.spawned);
  }
}

TEST_CASE("nonpositive parameters are rejected before fitting") {
  const Dataset data = make_random(20, 2, 3);
  FitParams params;
  params.ntrees = 0;
  CHECK_THROWS_AS(fit_forest(data, params), std::invalid_argument);
}
