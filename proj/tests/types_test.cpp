#include <doctest.h>

#include "rpf/types.hpp"

using namespace rpf;

namespace {

Dataset two_column_data() {
  Dataset d;
  d.x.resize(3, 2);
  d.x << 0.0, 1.0, 0.5, 2.0, 1.0, 3.0;
  d.y.resize(3);
  d.y << 1.0, 2.0, 3.0;
  return d;
}

}  // namespace

TEST_CASE("interval is open below and closed above") {
  const Interval iv{0.2, 0.9};
  CHECK(!iv.contains(0.2));
  CHECK(iv.contains(0.9));
  CHECK(iv.contains(0.5));
  CHECK(!iv.contains(1.0));
  const Interval whole;
  CHECK(whole.contains(-1e300));
  CHECK(whole.contains(1e300));
}

TEST_CASE("region membership checks only its own coordinates") {
  Region r;
  r.coords = {0, 2};
  r.bounds = {Interval{-kInf, 0.5}, Interval{0.0, kInf}};
  Eigen::RowVectorXd x(3);
  x << 0.5, 123.0, 0.1;
  CHECK(region_contains(r, x));
  x(0) = 0.6;
  CHECK(!region_contains(r, x));
  x(0) = 0.5;
  x(2) = 0.0;
  CHECK(!region_contains(r, x));
}

TEST_CASE("overlapping leaves sum in a component") {
  Tree tree;
  tree.coords = {0};
  Leaf wide, narrow;
  wide.region.coords = {0};
  wide.region.bounds = {Interval{}};
  wide.value = 1.0;
  narrow.region.coords = {0};
  narrow.region.bounds = {Interval{0.0, kInf}};
  narrow.value = 2.5;
  tree.leaves = {wide, narrow};
  Eigen::RowVectorXd x(1);
  x << 1.0;
  CHECK(tree_component_value(tree, x) == 3.5);
  x << -1.0;
  CHECK(tree_component_value(tree, x) == 1.0);
}

TEST_CASE("family prediction sums its trees") {
  TreeFamily family;
  Tree a;
  a.coords = {0};
  Leaf la;
  la.region.coords = {0};
  la.region.bounds = {Interval{}};
  la.value = 2.0;
  a.leaves = {la};
  Tree b = a;
  b.coords = {1};
  b.leaves[0].region.coords = {1};
  b.leaves[0].value = -0.5;
  family.trees[{0}] = a;
  family.trees[{1}] = b;
  Eigen::RowVectorXd x(2);
  x << 0.0, 0.0;
  CHECK(family_predict(family, x) == 1.5);
}

TEST_CASE("dataset validation rejects malformed input") {
  CHECK_NOTHROW(two_column_data().validate());

  Dataset too_small = two_column_data();
  too_small.x = too_small.x.topRows(1);
  too_small.y = too_small.y.head(1);
  CHECK_THROWS_AS(too_small.validate(), std::invalid_argument);

  Dataset bad_len = two_column_data();
  bad_len.y = bad_len.y.head(2);
  CHECK_THROWS_AS(bad_len.validate(), std::invalid_argument);

  Dataset nonfinite = two_column_data();
  nonfinite.x(0, 0) = kInf;
  CHECK_THROWS_AS(nonfinite.validate(), std::invalid_argument);

  Dataset bad_y = two_column_data();
  bad_y.y(1) = std::nan("");
  CHECK_THROWS_AS(bad_y.validate(), std::invalid_argument);

  Dataset bad_names = two_column_data();
  bad_names.feature_names = {"only_one"};
  CHECK_THROWS_AS(bad_names.validate(), std::invalid_argument);
}

TEST_CASE("fit parameter validation") {
  FitParams p;
  CHECK_NOTHROW(p.validate());
  FitParams bad = p;
  bad.ntrees = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.nsplits = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.t_try = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.t_try = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.split_try = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = p;
  bad.max_interaction = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("interaction cap") {
  FitParams p;
  p.max_interaction = 0;
  CHECK(p.interaction_cap(5) == 5);
  p.max_interaction = 2;
  CHECK(p.interaction_cap(5) == 2);
  CHECK(p.interaction_cap(1) == 1);
}

TEST_CASE("labels fall back to positional names") {
  CHECK(feature_label({}, 2) == "x3");
  CHECK(feature_label({"age", "height"}, 1) == "height");
  CHECK(coord_set_label({"a", "b", "c"}, {0, 2}) == "a:c");
  CHECK(coord_set_label({}, {0, 1}) == "x1:x2");
}
