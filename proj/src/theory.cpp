#include "rpf/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "rpf/parallel.hpp"

namespace rpf {

namespace {

double uniform_draw(Rng& rng) { return rng.uniform01(); }

int cell_of(const std::vector<double>& endpoints, double v) {
  const int cells = static_cast<int>(endpoints.size()) - 1;
  const int j =
      static_cast<int>(std::upper_bound(endpoints.begin(), endpoints.end(), v) - endpoints.begin()) - 1;
  return std::clamp(j, 0, cells - 1);
}

struct TreeFit {
  std::vector<std::vector<double>> endpoints;  // per coordinate, size M + 1
  std::vector<std::vector<double>> values;     // per coordinate, size M
  double resample_mean = 0.0;                  // mean response this tree saw
  std::vector<double> own_means;               // per coordinate: mean of the fit over its rows
};

TreeFit run_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TheoryParams& params,
                 const std::vector<double>& cum_q, bool bootstrap, std::uint64_t tree_seed) {
  Rng rng(tree_seed);
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  const int M = params.M;

  TreeFit fit;
  // partitions precede the resample draws; the identity hook consumes nothing,
  // keeping the update stream aligned with the plain fit
  fit.endpoints.reserve(d);
  for (int k = 0; k < d; ++k) {
    const auto& g = params.g.empty() ? std::function<double(Rng&)>(uniform_draw) : params.g[k];
    fit.endpoints.push_back(random_partition(M, g, rng));
  }

  std::vector<int> rows(n);
  if (bootstrap && !params.identity_resample) {
    for (int i = 0; i < n; ++i) rows[i] = static_cast<int>(rng.below(n));
  } else {
    std::iota(rows.begin(), rows.end(), 0);
  }

  std::vector<double> yy(n);
  for (int i = 0; i < n; ++i) yy[i] = y(rows[i]);
  fit.resample_mean = std::accumulate(yy.begin(), yy.end(), 0.0) / n;

  std::vector<std::vector<std::vector<int>>> members(
      d, std::vector<std::vector<int>>(M));
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < n; ++i) members[k][cell_of(fit.endpoints[k], x(rows[i], k))].push_back(i);

  fit.values.assign(d, std::vector<double>(M, 0.0));
  std::vector<double> pred(n, 0.0);

  for (int s = 0; s < params.S; ++s) {
    const double u = rng.uniform01();
    int idx = static_cast<int>(std::upper_bound(cum_q.begin(), cum_q.end(), u) - cum_q.begin());
    idx = std::min(idx, d * M - 1);
    const int K = idx / M, J = idx % M;
    const std::vector<int>& mem = members[K][J];
    if (mem.empty()) continue;
    double acc = 0.0;
    for (const int i : mem) acc += yy[i] - pred[i];
    const double delta = acc / static_cast<double>(mem.size());
    fit.values[K][J] += delta;
    for (const int i : mem) pred[i] += delta;
  }

  fit.own_means.assign(d, 0.0);
  for (int k = 0; k < d; ++k) {
    double acc = 0.0;
    for (int j = 0; j < M; ++j) acc += fit.values[k][j] * static_cast<double>(members[k][j].size());
    fit.own_means[k] = acc / n;
  }
  return fit;
}

AdditiveFit aggregate(const std::vector<TreeFit>& trees, int d) {
  const double L = static_cast<double>(trees.size());
  AdditiveFit out;
  out.components.resize(d);
  for (int k = 0; k < d; ++k) {
    std::vector<double> merged;
    for (const TreeFit& t : trees) merged.insert(merged.end(), t.endpoints[k].begin(), t.endpoints[k].end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    StepFunction f;
    f.breaks = merged;
    f.values.assign(merged.size() - 1, 0.0);
    for (std::size_t c = 0; c + 1 < merged.size(); ++c) {
      double acc = 0.0;
      for (const TreeFit& t : trees) acc += t.values[k][cell_of(t.endpoints[k], merged[c])];
      f.values[c] = acc / L;
    }
    double center = 0.0;
    for (const TreeFit& t : trees) center += t.own_means[k];
    center /= L;
    for (double& v : f.values) v -= center;
    out.components[k] = std::move(f);
  }
  double m0 = 0.0;
  for (const TreeFit& t : trees) m0 += t.resample_mean;
  out.m0 = m0 / L;
  return out;
}

AdditiveFit fit_impl(const Dataset& data, const TheoryParams& params, bool bootstrap,
                     int threads) {
  data.validate();
  params.validate(data.d());
  if ((data.x.array() < 0.0).any() || (data.x.array() > 1.0).any())
    throw DomainError("predictors must lie in [0,1]");

  const int d = data.d(), M = params.M;
  std::vector<double> cum(static_cast<std::size_t>(d) * M);
  double running = 0.0;
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < M; ++j) {
      running += params.q.size() ? params.q(k, j) : 1.0 / (d * M);
      cum[static_cast<std::size_t>(k) * M + j] = running;
    }
  }

  std::vector<TreeFit> trees(params.L);
  parallel_for(params.L, threads, [&](int l) {
    trees[l] = run_tree(data.x, data.y, params, cum, bootstrap,
                        derive_seed(params.seed, static_cast<std::uint64_t>(l)));
  });
  return aggregate(trees, d);
}

}  // namespace

void TheoryParams::validate(int d) const {
  if (L < 1) throw std::invalid_argument("L must be at least 1");
  if (S < 0) throw std::invalid_argument("S must be nonnegative");
  if (M < 1) throw std::invalid_argument("M must be at least 1");
  if (q.size()) {
    if (q.rows() != d || q.cols() != M)
      throw std::invalid_argument("q must have one row per coordinate and one column per interval");
    if ((q.array() <= 0.0).any()) throw std::invalid_argument("q entries must be positive");
    if (std::abs(q.sum() - 1.0) > 1e-12) throw std::invalid_argument("q must sum to 1");
  }
  if (!g.empty() && static_cast<int>(g.size()) != d)
    throw std::invalid_argument("g must provide one sampler per coordinate");
}

double StepFunction::operator()(double x) const {
  const int j =
      static_cast<int>(std::upper_bound(breaks.begin(), breaks.end(), x) - breaks.begin()) - 1;
  return values[std::clamp(j, 0, static_cast<int>(values.size()) - 1)];
}

double AdditiveFit::predict(const Eigen::RowVectorXd& x) const {
  double total = m0;
  for (std::size_t k = 0; k < components.size(); ++k) total += components[k](x(k));
  return total;
}

std::vector<double> random_partition(int M, const std::function<double(Rng&)>& g, Rng& rng) {
  if (M < 1) throw std::invalid_argument("M must be at least 1");
  std::vector<double> z(M - 1);
  for (double& v : z) {
    v = g(rng);
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("split sampler produced a value outside [0,1]");
  }
  std::sort(z.begin(), z.end());
  std::vector<double> endpoints(M + 1);
  endpoints[0] = 0.0;
  for (int j = 1; j < M; ++j) endpoints[j] = 0.5 * z[j - 1] + j / (2.0 * M);
  endpoints[M] = 1.0;
  return endpoints;
}

AdditiveFit fit_theoretical(const Dataset& data, const TheoryParams& params, int threads) {
  return fit_impl(data, params, false, threads);
}

AdditiveFit fit_theoretical_bootstrap(const Dataset& data, const TheoryParams& params,
                                      int threads) {
  return fit_impl(data, params, true, threads);
}

double convergence_truth(int coord, double x) {
  return 2.0 * std::sin(2.0 * std::numbers::pi * x + coord * std::numbers::pi / 3.0);
}

ConvergenceResult convergence_experiment(const std::vector<int>& n_list, int reps, int d,
                                         std::uint64_t seed, int threads) {
  if (n_list.size() < 3) throw std::invalid_argument("need at least three sample sizes");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("sample sizes must increase");
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  if (d < 1) throw std::invalid_argument("d must be at least 1");

  ConvergenceResult out;
  out.n_list = n_list;
  out.rows.resize(n_list.size() * reps);

  parallel_for(static_cast<int>(out.rows.size()), threads, [&](int task) {
    const int ni = task / reps, rep = task % reps;
    const int n = n_list[ni];
    const std::uint64_t task_seed = derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)),
                                                static_cast<std::uint64_t>(rep));
    Rng rng(derive_seed(task_seed, 0));

    Dataset data;
    data.x.resize(n, d);
    data.y.resize(n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < d; ++k) data.x(i, k) = rng.uniform01();
    for (int i = 0; i < n; ++i) {
      double m = 1.0;
      for (int k = 0; k < d; ++k) m += convergence_truth(k, data.x(i, k));
      data.y(i) = m + rng.normal();
    }

    TheoryParams params;
    params.M = std::max(2, static_cast<int>(std::ceil(2.0 * std::pow(n, 0.2))));
    params.L = static_cast<int>(std::ceil(std::pow(n, 0.4)));
    params.S = static_cast<int>(std::ceil(30.0 * d * params.M * std::log(n)));
    params.seed = derive_seed(task_seed, 1);

    const AdditiveFit fit = fit_theoretical(data, params, 1);

    double sup_full = 0.0, sup_interior = 0.0;
    for (int k = 0; k < d; ++k) {
      for (int gpt = 0; gpt <= 2000; ++gpt) {
        const double x = gpt / 2000.0;
        const double err = std::abs(fit.components[k](x) - convergence_truth(k, x));
        sup_full = std::max(sup_full, err);
        if (x >= 0.1 && x <= 0.9) sup_interior = std::max(sup_interior, err);
      }
    }
    out.rows[task] = {n, rep, sup_interior, sup_full};
  });

  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    std::vector<double> interior, full;
    for (int rep = 0; rep < reps; ++rep) {
      interior.push_back(out.rows[ni * reps + rep].sup_interior);
      full.push_back(out.rows[ni * reps + rep].sup_full);
    }
    out.median_interior.push_back(median_of(interior));
    out.median_full.push_back(median_of(full));
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double cnt = static_cast<double>(n_list.size());
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const double lx = std::log(static_cast<double>(n_list[ni]));
    const double ly = std::log(out.median_interior[ni]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  out.slope = (sxy - sx * sy / cnt) / (sxx - sx * sx / cnt);
  return out;
}

}  // namespace rpf
