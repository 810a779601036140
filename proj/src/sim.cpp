#include "rpf/sim.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "rpf/csv.hpp"
#include "rpf/parallel.hpp"

namespace rpf {

namespace {

// k is 1-based to keep the alternating signs aligned with the usual tables
double component_1d(SimShape shape, int k, double v) {
  const double base = (k % 2 == 0 ? 2.0 : -2.0) * std::sin(std::numbers::pi * v);
  if (shape == SimShape::smooth) return base;
  return v >= 0.0 ? base - 2.0 : base + 2.0;
}

double component_2d(SimShape shape, int k, double a, double b) {
  return component_1d(shape, k, a * b);
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

void SimModelSpec::validate() const {
  if (d < 3) throw std::invalid_argument("simulation models need at least 3 predictors");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be nonnegative");
}

SimModelSpec parse_sim_model(const std::string& id, int d) {
  static const std::pair<const char*, SimStructure> structures[] = {
      {"additive", SimStructure::additive},
      {"hierarchical", SimStructure::hierarchical},
      {"pure-interaction", SimStructure::pure_interaction},
  };
  static const std::pair<const char*, bool> densities[] = {{"sparse", false}, {"dense", true}};
  static const std::pair<const char*, SimShape> shapes[] = {{"smooth", SimShape::smooth},
                                                            {"jump", SimShape::jump}};
  for (const auto& [sname, structure] : structures) {
    for (const auto& [dname, dense] : densities) {
      for (const auto& [hname, shape] : shapes) {
        if (id == std::string(sname) + "-" + dname + "-" + hname) {
          SimModelSpec spec;
          spec.structure = structure;
          spec.dense = dense;
          spec.shape = shape;
          spec.d = d;
          spec.validate();
          return spec;
        }
      }
    }
  }
  throw std::invalid_argument("unknown model id: " + id);
}

std::string sim_model_id(const SimModelSpec& spec) {
  std::string s;
  switch (spec.structure) {
    case SimStructure::additive: s = "additive"; break;
    case SimStructure::hierarchical: s = "hierarchical"; break;
    case SimStructure::pure_interaction: s = "pure-interaction"; break;
  }
  s += spec.dense ? "-dense" : "-sparse";
  s += spec.shape == SimShape::smooth ? "-smooth" : "-jump";
  return s;
}

Eigen::MatrixXd sample_predictors(int n, int d, double rho, Rng& rng) {
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("rho must lie in [0,1)");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(d, d, rho);
  sigma.diagonal().setOnes();
  const Eigen::MatrixXd chol = sigma.llt().matrixL();
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXd z(d);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) z(k) = rng.normal();
    x.row(i) = (chol * z).transpose();
  }
  return (2.5 / std::numbers::pi) * x.array().atan().matrix();
}

double true_function(const SimModelSpec& spec, const Eigen::RowVectorXd& x) {
  const SimShape shape = spec.shape;
  double m = 0.0;
  if (spec.dense) {
    if (spec.structure != SimStructure::pure_interaction)
      for (int k = 1; k <= spec.d; ++k) m += component_1d(shape, k, x(k - 1));
    if (spec.structure != SimStructure::additive)
      for (int k = 1; k <= spec.d - 1; ++k) m += component_2d(shape, k, x(k - 1), x(k));
  } else {
    switch (spec.structure) {
      case SimStructure::additive:
        m = component_1d(shape, 1, x(0)) + component_1d(shape, 2, x(1));
        break;
      case SimStructure::hierarchical:
        m = component_1d(shape, 1, x(0)) + component_1d(shape, 2, x(1)) +
            component_1d(shape, 3, x(2)) + component_2d(shape, 1, x(0), x(1)) +
            component_2d(shape, 2, x(1), x(2));
        break;
      case SimStructure::pure_interaction:
        m = component_2d(shape, 1, x(0), x(1)) + component_2d(shape, 2, x(1), x(2));
        break;
    }
  }
  return m;
}

SimData generate_dataset(const SimModelSpec& spec, int n, Rng& rng) {
  spec.validate();
  SimData out;
  out.data.x = sample_predictors(n, spec.d, spec.rho, rng);
  out.truth.resize(n);
  out.data.y.resize(n);
  for (int i = 0; i < n; ++i) out.truth(i) = true_function(spec, out.data.x.row(i));
  for (int i = 0; i < n; ++i) out.data.y(i) = out.truth(i) + spec.noise_sd * rng.normal();
  return out;
}

SimData generate_dataset(const SimModelSpec& spec, int n, std::uint64_t seed) {
  Rng rng(seed);
  return generate_dataset(spec, n, rng);
}

double sample_mse(const Eigen::VectorXd& truth, const Eigen::VectorXd& predictions) {
  if (truth.size() != predictions.size()) throw LengthMismatchError();
  return (truth - predictions).squaredNorm() / static_cast<double>(truth.size());
}

int variant_max_interaction(const std::string& variant) {
  if (variant == "additive") return 1;
  if (variant == "interaction2") return 2;
  if (variant == "interaction-unbounded") return 0;
  throw std::invalid_argument("unknown variant: " + variant +
                              " (use additive, interaction2 or interaction-unbounded)");
}

std::vector<FitParams> parameter_grid(const std::string& preset, const SimModelSpec& spec,
                                      int max_interaction, int ntrees) {
  std::vector<double> t_trys;
  std::vector<int> split_trys;
  std::vector<int> nsplits_list;
  if (preset == "full") {
    t_trys = {0.25, 0.5, 0.75};
    split_trys = {2, 5, 10, 20};
    nsplits_list = spec.dense ? std::vector<int>{10, 15, 20, 25, 30, 50, 60, 80, 100}
                              : std::vector<int>{10, 15, 20, 25, 30, 40, 50, 60, 80, 100};
  } else if (preset == "small") {
    t_trys = {0.5, 0.75};
    split_trys = {2, 5, 10};
    nsplits_list = {15, 20, 30, 50};
  } else {
    throw std::invalid_argument("unknown grid preset: " + preset);
  }
  if (spec.dense)
    for (int& v : nsplits_list) v = v * spec.d / 2;

  std::vector<FitParams> grid;
  for (const double t : t_trys) {
    for (const int s : split_trys) {
      for (const int ns : nsplits_list) {
        FitParams p;
        p.ntrees = ntrees;
        p.t_try = t;
        p.split_try = s;
        p.nsplits = ns;
        p.max_interaction = max_interaction;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

GridSearchResult grid_search(const SimModelSpec& spec, int n, const std::vector<FitParams>& grid,
                             int tune_reps, std::uint64_t seed, int threads) {
  if (grid.empty()) throw std::invalid_argument("parameter grid is empty");
  if (tune_reps < 1) throw std::invalid_argument("tune_reps must be at least 1");

  std::vector<SimData> datasets(tune_reps);
  for (int s = 0; s < tune_reps; ++s)
    datasets[s] = generate_dataset(spec, n, derive_seed(derive_seed(seed, 17), s));

  const int cells = static_cast<int>(grid.size());
  std::vector<double> mse(static_cast<std::size_t>(cells) * tune_reps);
  parallel_for(cells * tune_reps, threads, [&](int job) {
    const int g = job / tune_reps, s = job % tune_reps;
    FitParams p = grid[g];
    p.seed = derive_seed(derive_seed(seed, 23), static_cast<std::uint64_t>(s));
    const ForestModel model = fit_forest(datasets[s].data, p, 1);
    mse[job] = sample_mse(datasets[s].truth, forest_predict(model, datasets[s].data.x));
  });

  GridSearchResult out;
  out.mean_mse.resize(cells);
  int best = 0;
  for (int g = 0; g < cells; ++g) {
    double acc = 0.0;
    for (int s = 0; s < tune_reps; ++s) acc += mse[static_cast<std::size_t>(g) * tune_reps + s];
    out.mean_mse[g] = acc / tune_reps;
    if (out.mean_mse[g] < out.mean_mse[best]) best = g;
  }
  out.best = grid[best];
  return out;
}

CrossValidationResult cross_validate(const Dataset& data, const std::vector<FitParams>& grid,
                                     int folds, std::uint64_t seed, int threads) {
  data.validate();
  if (grid.empty()) throw std::invalid_argument("parameter grid is empty");
  const int n = data.n();
  if (folds < 2 || folds > n) throw std::invalid_argument("folds must lie in [2, n]");

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(derive_seed(seed, 11));
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1))]);

  const int cells = static_cast<int>(grid.size());
  std::vector<double> sse(static_cast<std::size_t>(cells) * folds);
  parallel_for(cells * folds, threads, [&](int job) {
    const int g = job / folds, f = job % folds;
    const int lo = f * n / folds, hi = (f + 1) * n / folds;
    Dataset train;
    train.feature_names = data.feature_names;
    train.x.resize(n - (hi - lo), data.d());
    train.y.resize(n - (hi - lo));
    int r = 0;
    for (int i = 0; i < n; ++i) {
      if (i >= lo && i < hi) continue;
      train.x.row(r) = data.x.row(perm[i]);
      train.y(r) = data.y(perm[i]);
      ++r;
    }
    FitParams p = grid[g];
    p.seed = derive_seed(derive_seed(seed, 29), static_cast<std::uint64_t>(f));
    const ForestModel model = fit_forest(train, p, 1);
    double acc = 0.0;
    for (int i = lo; i < hi; ++i) {
      const Eigen::RowVectorXd row = data.x.row(perm[i]);
      const double e = data.y(perm[i]) - forest_predict(model, row);
      acc += e * e;
    }
    sse[job] = acc;
  });

  CrossValidationResult out;
  out.cv_error.resize(cells);
  int best = 0;
  for (int g = 0; g < cells; ++g) {
    double acc = 0.0;
    for (int f = 0; f < folds; ++f) acc += sse[static_cast<std::size_t>(g) * folds + f];
    out.cv_error[g] = acc / n;
    if (out.cv_error[g] < out.cv_error[best]) best = g;
  }
  out.best = grid[best];
  return out;
}

SimReport run_simulation(const SimModelSpec& spec, int n, int reps, const std::string& variant,
                         const std::string& grid_preset, int tune_reps, bool use_cv,
                         std::uint64_t seed, int threads) {
  spec.validate();
  if (n < 2) throw std::invalid_argument("n must be at least 2");
  if (reps < 1) throw std::invalid_argument("reps must be at least 1");
  const int max_interaction = variant_max_interaction(variant);
  const std::vector<FitParams> grid = parameter_grid(grid_preset, spec, max_interaction, 50);

  SimReport report;
  report.spec = spec;
  report.n = n;
  report.variant = variant;
  if (use_cv) {
    const SimData cv_data = generate_dataset(spec, n, derive_seed(seed, 3));
    report.chosen = cross_validate(cv_data.data, grid, 10, derive_seed(seed, 7), threads).best;
  } else {
    report.chosen = grid_search(spec, n, grid, tune_reps, derive_seed(seed, 13), threads).best;
  }

  report.rows.resize(reps);
  parallel_for(reps, threads, [&](int r) {
    const SimData sim = generate_dataset(spec, n, derive_seed(derive_seed(seed, 2), r));
    FitParams p = report.chosen;
    p.seed = derive_seed(derive_seed(seed, 4), static_cast<std::uint64_t>(r));
    const ForestModel model = fit_forest(sim.data, p, 1);
    report.rows[r] = {r, sample_mse(sim.truth, forest_predict(model, sim.data.x))};
  });

  std::vector<double> mses;
  for (const SimReportRow& row : report.rows) mses.push_back(row.mse);
  report.mean_mse = mean_of(mses);
  double var = 0.0;
  for (const double m : mses) var += (m - report.mean_mse) * (m - report.mean_mse);
  report.sd_mse = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;
  return report;
}

std::vector<std::string> sim_report_header() {
  return {"model", "d",        "n",      "variant", "t_try", "split_try",
          "nsplits", "max_interaction", "ntrees", "rep",     "mse"};
}

std::vector<std::vector<std::string>> sim_report_rows(const SimReport& report) {
  std::vector<std::vector<std::string>> rows;
  const std::vector<std::string> prefix{
      sim_model_id(report.spec),          std::to_string(report.spec.d),
      std::to_string(report.n),           report.variant,
      format_double(report.chosen.t_try), std::to_string(report.chosen.split_try),
      std::to_string(report.chosen.nsplits), std::to_string(report.chosen.max_interaction),
      std::to_string(report.chosen.ntrees)};
  for (const SimReportRow& row : report.rows) {
    std::vector<std::string> r = prefix;
    r.push_back(std::to_string(row.rep));
    r.push_back(format_double(row.mse));
    rows.push_back(std::move(r));
  }
  for (const char* tag : {"mean", "sd"}) {
    std::vector<std::string> r = prefix;
    r.push_back(tag);
    r.push_back(format_double(tag == std::string("mean") ? report.mean_mse : report.sd_mse));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace rpf
