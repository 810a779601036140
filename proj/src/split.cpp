#include "rpf/split.hpp"

#include <algorithm>

namespace rpf {

namespace {

int coord_index(const Region& region, int k) {
  const auto it = std::find(region.coords.begin(), region.coords.end(), k);
  return it == region.coords.end() ? -1 : static_cast<int>(it - region.coords.begin());
}

}  // namespace

std::pair<double, double> split_means(const Eigen::VectorXd& residuals,
                                      const std::vector<int>& in_plus,
                                      const std::vector<int>& in_minus) {
  if (in_plus.empty() || in_minus.empty()) throw EmptyChildError();
  double sum_plus = 0.0, sum_minus = 0.0;
  for (int i : in_plus) sum_plus += residuals(i);
  for (int i : in_minus) sum_minus += residuals(i);
  return {sum_plus / static_cast<double>(in_plus.size()),
          sum_minus / static_cast<double>(in_minus.size())};
}

Region lift_region(const Region& region, int k) {
  Region lifted;
  lifted.coords.reserve(region.coords.size() + 1);
  lifted.bounds.reserve(region.coords.size() + 1);
  std::size_t a = 0;
  for (; a < region.coords.size() && region.coords[a] < k; ++a) {
    lifted.coords.push_back(region.coords[a]);
    lifted.bounds.push_back(region.bounds[a]);
  }
  lifted.coords.push_back(k);
  lifted.bounds.push_back(Interval{});
  for (; a < region.coords.size(); ++a) {
    lifted.coords.push_back(region.coords[a]);
    lifted.bounds.push_back(region.bounds[a]);
  }
  return lifted;
}

std::vector<double> candidate_pool(const Region& leaf, int k, const Dataset& data) {
  const int a = coord_index(leaf, k);
  const double sup = a < 0 ? kInf : leaf.bounds[a].upper;
  std::vector<double> pool;
  for (int i = 0; i < data.n(); ++i) {
    if (!region_contains(leaf, data.x.row(i))) continue;
    const double v = data.x(i, k);
    if (v < sup) pool.push_back(v);
  }
  return pool;
}

std::vector<double> candidate_points(const Region& leaf, int k, const Dataset& data,
                                     int split_try, Rng& rng) {
  const std::vector<double> pool = candidate_pool(leaf, k, data);
  std::vector<double> points;
  if (pool.empty()) return points;
  points.reserve(split_try);
  for (int t = 0; t < split_try; ++t) points.push_back(pool[rng.below(pool.size())]);
  return points;
}

std::vector<double> distinct_candidate_points(const Region& leaf, int k, const Dataset& data) {
  std::vector<double> pool = candidate_pool(leaf, k, data);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

std::optional<double> score_split(const Region& leaf, int k, double c, const Dataset& data,
                                  const Eigen::VectorXd& residuals) {
  double sum_plus = 0.0, sum_minus = 0.0;
  int n_plus = 0, n_minus = 0;
  for (int i = 0; i < data.n(); ++i) {
    if (!region_contains(leaf, data.x.row(i))) continue;
    if (data.x(i, k) > c) {
      sum_plus += residuals(i);
      ++n_plus;
    } else {
      sum_minus += residuals(i);
      ++n_minus;
    }
  }
  if (n_plus == 0 || n_minus == 0) return std::nullopt;
  const double mu_plus = sum_plus / n_plus;
  const double mu_minus = sum_minus / n_minus;
  double ssr = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    double r = residuals(i);
    if (region_contains(leaf, data.x.row(i)))
      r -= data.x(i, k) > c ? mu_plus : mu_minus;
    ssr += r * r;
  }
  return ssr;
}

SplitResult apply_split(const Region& leaf, double leaf_value, int k, double c,
                        const Dataset& data, Eigen::VectorXd& residuals) {
  const int a = coord_index(leaf, k);
  if (a < 0) throw InvalidSplitPointError();
  const Interval extent = leaf.bounds[a];
  if (!(c >= extent.lower && c < extent.upper)) throw InvalidSplitPointError();

  SplitResult result;
  result.region_plus = leaf;
  result.region_plus.bounds[a].lower = c;
  result.region_minus = leaf;
  result.region_minus.bounds[a].upper = c;

  for (int i = 0; i < data.n(); ++i) {
    if (!region_contains(leaf, data.x.row(i))) continue;
    if (data.x(i, k) > c)
      result.in_plus.push_back(i);
    else
      result.in_minus.push_back(i);
  }
  std::tie(result.mu_plus, result.mu_minus) = split_means(residuals, result.in_plus, result.in_minus);
  result.value_plus = leaf_value + result.mu_plus;
  result.value_minus = leaf_value + result.mu_minus;
  for (int i : result.in_plus) residuals(i) -= result.mu_plus;
  for (int i : result.in_minus) residuals(i) -= result.mu_minus;
  return result;
}

const SplitCandidate& select_best(const std::vector<SplitCandidate>& candidates) {
  const SplitCandidate* best = nullptr;
  for (const SplitCandidate& cand : candidates) {
    if (!cand.score) continue;
    if (best == nullptr || *cand.score < *best->score) best = &cand;
  }
  if (best == nullptr) throw NoValidSplitError();
  return *best;
}

}  // namespace rpf
