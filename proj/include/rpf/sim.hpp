#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpf/grow.hpp"
#include "rpf/rng.hpp"
#include "rpf/types.hpp"

namespace rpf {

enum class SimStructure { additive, hierarchical, pure_interaction };
enum class SimShape { smooth, jump };

struct SimModelSpec {
  SimStructure structure = SimStructure::additive;
  bool dense = false;
  SimShape shape = SimShape::smooth;
  int d = 4;
  double rho = 0.3;
  double noise_sd = 1.0;

  void validate() const;  // d >= 3, rho in [0,1), noise_sd >= 0
};

// ids: {additive,hierarchical,pure-interaction}-{sparse,dense}-{smooth,jump}
SimModelSpec parse_sim_model(const std::string& id, int d);
std::string sim_model_id(const SimModelSpec& spec);

// Latent N(0, (1-rho) I + rho 11') rows pushed through 2.5/pi * atan, giving
// values in (-1.25, 1.25) with pairwise correlation close to rho.
Eigen::MatrixXd sample_predictors(int n, int d, double rho, Rng& rng);

double true_function(const SimModelSpec& spec, const Eigen::RowVectorXd& x);

struct SimData {
  Dataset data;
  Eigen::VectorXd truth;  // m(X_i), noise-free
};

SimData generate_dataset(const SimModelSpec& spec, int n, Rng& rng);
SimData generate_dataset(const SimModelSpec& spec, int n, std::uint64_t seed);

// Mean squared difference against the noise-free truth.
double sample_mse(const Eigen::VectorXd& truth, const Eigen::VectorXd& predictions);

// Fitting variants reported in the benchmark tables.
// additive -> 1, interaction2 -> 2, interaction-unbounded -> 0 (no cap)
int variant_max_interaction(const std::string& variant);

// Parameter grids. "full" is the broad benchmark range: t_try
// {0.25,0.5,0.75}, split_try {2,5,10,20}, nsplits {10..100} (dense models
// scale nsplits by d/2). "small" is a reduced grid for desk-scale tuning.
std::vector<FitParams> parameter_grid(const std::string& preset, const SimModelSpec& spec,
                                      int max_interaction, int ntrees);

struct GridSearchResult {
  FitParams best;
  std::vector<double> mean_mse;  // aligned with the grid
};

// Oracle tuning: average sample MSE over tune_reps fresh datasets (shared
// across grid cells); ties break to the first grid entry.
GridSearchResult grid_search(const SimModelSpec& spec, int n, const std::vector<FitParams>& grid,
                             int tune_reps, std::uint64_t seed, int threads = 1);

struct CrossValidationResult {
  FitParams best;
  std::vector<double> cv_error;  // mean held-out squared error per grid cell
};

// Standard k-fold on observed responses only; ties break to the first entry.
CrossValidationResult cross_validate(const Dataset& data, const std::vector<FitParams>& grid,
                                     int folds, std::uint64_t seed, int threads = 1);

struct SimReportRow {
  int rep = 0;
  double mse = 0.0;
};

struct SimReport {
  SimModelSpec spec;
  int n = 0;
  std::string variant;
  FitParams chosen;
  std::vector<SimReportRow> rows;
  double mean_mse = 0.0;
  double sd_mse = 0.0;
};

// Tunes (grid search against the truth, or 10-fold CV on one dataset when
// use_cv), then measures sample MSE on `reps` fresh datasets.
SimReport run_simulation(const SimModelSpec& spec, int n, int reps, const std::string& variant,
                         const std::string& grid_preset, int tune_reps, bool use_cv,
                         std::uint64_t seed, int threads = 1);

std::vector<std::string> sim_report_header();
std::vector<std::vector<std::string>> sim_report_rows(const SimReport& report);

}  // namespace rpf
