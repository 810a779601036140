#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rpf/split.hpp"

using namespace rpf;

namespace {

// four points on a line whose residuals split perfectly at 0.2
Dataset line_data() {
  Dataset d;
  d.x.resize(4, 1);
  d.x << 0.1, 0.2, 0.6, 0.9;
  d.y.resize(4);
  d.y << 1.0, 1.0, 3.0, 3.0;
  return d;
}

Region whole_line() {
  Region r;
  r.coords = {0};
  r.bounds = {Interval{}};
  return r;
}

}  // namespace

TEST_CASE("split means of the worked example") {
  const Dataset d = line_data();
  const auto [mu_plus, mu_minus] = split_means(d.y, {2, 3}, {0, 1});
  CHECK(mu_plus == 3.0);
  CHECK(mu_minus == 1.0);
  CHECK_THROWS_AS(split_means(d.y, {}, {0, 1}), EmptyChildError);
  CHECK_THROWS_AS(split_means(d.y, {2, 3}, {}), EmptyChildError);
}

TEST_CASE("candidate pool excludes the upper extent") {
  const Dataset d = line_data();
  CHECK(candidate_pool(whole_line(), 0, d) == std::vector<double>{0.1, 0.2, 0.6, 0.9});

  Region lower = whole_line();
  lower.bounds[0].upper = 0.2;
  CHECK(candidate_pool(lower, 0, d) == std::vector<double>{0.1});

  // unbounded above: the sup of the extent is +inf, so every inside value stays
  Region upper = whole_line();
  upper.bounds[0].lower = 0.2;
  CHECK(candidate_pool(upper, 0, d) == std::vector<double>{0.6, 0.9});
  CHECK(distinct_candidate_points(upper, 0, d) == std::vector<double>{0.6, 0.9});

  // bounded above at 0.9: the value equal to the sup falls out
  Region capped = upper;
  capped.bounds[0].upper = 0.9;
  CHECK(candidate_pool(capped, 0, d) == std::vector<double>{0.6});
}

TEST_CASE("candidate points draw from the pool with replacement") {
  const Dataset d = line_data();
  Rng rng(4);
  const std::vector<double> pts = candidate_points(whole_line(), 0, d, 10, rng);
  CHECK(pts.size() == 10);
  const std::vector<double> pool{0.1, 0.2, 0.6, 0.9};
  for (const double p : pts) CHECK(std::count(pool.begin(), pool.end(), p) == 1);

  Region empty_pool = whole_line();
  empty_pool.bounds[0].upper = 0.1;
  CHECK(candidate_points(empty_pool, 0, d, 10, rng).empty());
}

TEST_CASE("scores of the worked example") {
  const Dataset d = line_data();
  const Region leaf = whole_line();

  const auto perfect = score_split(leaf, 0, 0.2, d, d.y);
  REQUIRE(perfect.has_value());
  CHECK(*perfect == doctest::Approx(0.0).epsilon(1e-15));

  const auto uneven = score_split(leaf, 0, 0.1, d, d.y);
  REQUIRE(uneven.has_value());
  CHECK(*uneven == doctest::Approx(24.0 / 9.0));

  CHECK(!score_split(leaf, 0, 0.9, d, d.y).has_value());   // empty upper child
  CHECK(!score_split(leaf, 0, 0.95, d, d.y).has_value());  // no data beyond
}

TEST_CASE("scores match a from-scratch recomputation on random data") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(16));
    Dataset d;
    d.x.resize(n, 2);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      d.x(i, 0) = rng.uniform01();
      d.x(i, 1) = rng.uniform01();
      d.y(i) = rng.normal();
    }
    Region leaf;
    leaf.coords = {0, 1};
    leaf.bounds = {Interval{0.2, kInf}, Interval{}};
    const int k = static_cast<int>(rng.below(2));
    const double c = rng.uniform01();

    const auto got = score_split(leaf, k, c, d, d.y);

    double sum_plus = 0, sum_minus = 0;
    int n_plus = 0, n_minus = 0;
    for (int i = 0; i < n; ++i) {
      if (!region_contains(leaf, d.x.row(i))) continue;
      if (d.x(i, k) > c) {
        sum_plus += d.y(i);
        ++n_plus;
      } else {
        sum_minus += d.y(i);
        ++n_minus;
      }
    }
    if (n_plus == 0 || n_minus == 0) {
      CHECK(!got.has_value());
      continue;
    }
    REQUIRE(got.has_value());
    Eigen::VectorXd r = d.y;
    for (int i = 0; i < n; ++i) {
      if (!region_contains(leaf, d.x.row(i))) continue;
      r(i) -= d.x(i, k) > c ? sum_plus / n_plus : sum_minus / n_minus;
    }
    CHECK(*got == doctest::Approx(r.squaredNorm()).epsilon(1e-12));
  }
}

TEST_CASE("applying the perfect split zeroes the residuals") {
  const Dataset d = line_data();
  Eigen::VectorXd residuals = d.y;
  const SplitResult res = apply_split(whole_line(), 0.0, 0, 0.2, d, residuals);

  CHECK(res.mu_plus == 3.0);
  CHECK(res.mu_minus == 1.0);
  CHECK(res.value_plus == 3.0);
  CHECK(res.value_minus == 1.0);
  CHECK(res.in_plus == std::vector<int>{2, 3});
  CHECK(res.in_minus == std::vector<int>{0, 1});
  CHECK(res.region_plus.bounds[0].lower == 0.2);
  CHECK(res.region_plus.bounds[0].upper == kInf);
  CHECK(res.region_minus.bounds[0].upper == 0.2);
  CHECK(res.region_minus.bounds[0].lower == -kInf);
  CHECK(residuals.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("child values offset a nonzero parent value") {
  const Dataset d = line_data();
  Eigen::VectorXd residuals = d.y;
  const SplitResult res = apply_split(whole_line(), 10.0, 0, 0.2, d, residuals);
  CHECK(res.value_plus == 13.0);
  CHECK(res.value_minus == 11.0);
}

TEST_CASE("split point must respect the leaf extent") {
  const Dataset d = line_data();
  Eigen::VectorXd residuals = d.y;

  Region lower = whole_line();
  lower.bounds[0].upper = 0.2;
  CHECK_THROWS_AS(apply_split(lower, 0.0, 0, 0.5, d, residuals), InvalidSplitPointError);
  CHECK_THROWS_AS(apply_split(lower, 0.0, 0, 0.2, d, residuals), InvalidSplitPointError);

  Region upper = whole_line();
  upper.bounds[0].lower = 0.2;
  // at the infimum: allowed by the interval rule, but the lower child is empty
  CHECK_THROWS_AS(apply_split(upper, 0.0, 0, 0.2, d, residuals), EmptyChildError);
}

TEST_CASE("lifting adds an unbounded axis in sorted position") {
  Region r;
  r.coords = {0, 3};
  r.bounds = {Interval{-kInf, 1.0}, Interval{2.0, kInf}};
  const Region lifted = lift_region(r, 2);
  CHECK(lifted.coords == CoordSet{0, 2, 3});
  CHECK(lifted.bounds[0].upper == 1.0);
  CHECK(lifted.bounds[1].lower == -kInf);
  CHECK(lifted.bounds[1].upper == kInf);
  CHECK(lifted.bounds[2].lower == 2.0);
}

TEST_CASE("best candidate selection prefers the earliest tie") {
  std::vector<SplitCandidate> cands(3);
  cands[0].point = 0.1;
  cands[0].score = 5.0;
  cands[1].point = 0.2;
  cands[1].score = 5.0;
  cands[2].point = 0.3;
  cands[2].score = 7.0;
  CHECK(&select_best(cands) == &cands[0]);

  cands[2].score = 4.0;
  CHECK(&select_best(cands) == &cands[2]);

  cands[0].score.reset();
  cands[1].score.reset();
  cands[2].score.reset();
  CHECK_THROWS_AS(select_best(cands), NoValidSplitError);
}
