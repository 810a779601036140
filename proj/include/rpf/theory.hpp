#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "rpf/rng.hpp"
#include "rpf/types.hpp"

namespace rpf {

// Data-independent variant of the additive forest: per tree, each coordinate
// of [0,1]^d gets a random interval partition, then S randomly chosen
// intervals are refit to the mean working residual. Averaging the trees gives
// step functions whose sup error obeys a known rate.
struct TheoryParams {
  int L = 1;     // trees
  int S = 100;   // updates per tree
  int M = 2;     // intervals per coordinate
  // Selection probabilities over (coordinate, interval), d rows and M columns,
  // all positive, summing to 1. Empty = uniform.
  Eigen::MatrixXd q;
  // Per-coordinate split-point samplers on [0,1]. Empty = uniform.
  std::vector<std::function<double(Rng&)>> g;
  std::uint64_t seed = 0;
  // Test hook: the bootstrap variant keeps the original rows instead of
  // resampling, consuming no rng draws for the resample.
  bool identity_resample = false;

  void validate(int d) const;
};

// Piecewise-constant function on [0,1]: cell j covers [breaks[j], breaks[j+1]),
// the last cell also contains 1. Lookups clamp outside [0,1].
struct StepFunction {
  std::vector<double> breaks;
  std::vector<double> values;

  double operator()(double x) const;
};

struct AdditiveFit {
  double m0 = 0.0;
  std::vector<StepFunction> components;  // one per coordinate, empirical mean 0

  double predict(const Eigen::RowVectorXd& x) const;
};

// Interval endpoints for one coordinate: M - 1 sorted draws from g mixed
// halfway with the uniform grid j/M, capped by 0 and 1. Every interval length
// lies in [1/(2M), 1/2 + 1/(2M)].
std::vector<double> random_partition(int M, const std::function<double(Rng&)>& g, Rng& rng);

// Fits L trees on the data itself; per tree, updates set the chosen
// coordinate's interval value to the mean of (y - other components) over the
// points inside, skipping empty intervals. Trees are averaged on the merged
// breaks, each component is centered to empirical mean 0 and m0 = mean(y).
AdditiveFit fit_theoretical(const Dataset& data, const TheoryParams& params, int threads = 1);

// Same, but every tree fits its own with-replacement resample; components are
// centered by the average over trees of the tree's mean over its own resample,
// and m0 averages the resampled responses.
AdditiveFit fit_theoretical_bootstrap(const Dataset& data, const TheoryParams& params,
                                      int threads = 1);

struct ConvergenceRow {
  int n = 0;
  int rep = 0;
  double sup_interior = 0.0;  // sup over coordinates and x in [0.1, 0.9]
  double sup_full = 0.0;      // sup over [0, 1]
};

struct ConvergenceResult {
  std::vector<int> n_list;
  std::vector<ConvergenceRow> rows;
  std::vector<double> median_interior;  // aligned with n_list
  std::vector<double> median_full;
  double slope = 0.0;  // least-squares slope of log median_interior vs log n
};

// Smooth additive ground truth used by the rate experiment; every component
// integrates to 0 over [0,1].
double convergence_truth(int coord, double x);

// For each n: draw X ~ U[0,1]^d, y = 1 + sum_k truth_k + N(0,1), fit with
// M ~ n^(1/5), L ~ n^(2/5), and record sup errors against the truth on a
// 2001-point grid. Reports per-rep rows, medians, and the fitted rate.
ConvergenceResult convergence_experiment(const std::vector<int>& n_list, int reps, int d,
                                         std::uint64_t seed, int threads = 1);

}  // namespace rpf
