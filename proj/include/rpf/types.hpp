#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rpf {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- errors ---------------------------------------------------------------

struct EmptyChildError : std::runtime_error {
  EmptyChildError() : std::runtime_error("split produces a child with no data") {}
};
struct InvalidSplitPointError : std::runtime_error {
  InvalidSplitPointError() : std::runtime_error("split point outside the leaf interval") {}
};
struct NoValidSplitError : std::runtime_error {
  NoValidSplitError() : std::runtime_error("no valid split candidate") {}
};
struct DegenerateDataError : std::runtime_error {
  DegenerateDataError() : std::runtime_error("data admits no valid split (all predictor values tied)") {}
};
struct NonConvergenceError : std::runtime_error {
  explicit NonConvergenceError(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedOrderError : std::runtime_error {
  UnsupportedOrderError() : std::runtime_error("component order not supported") {}
};
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};
struct LengthMismatchError : std::runtime_error {
  LengthMismatchError() : std::runtime_error("vector lengths differ") {}
};

// ---- data -----------------------------------------------------------------

struct Dataset {
  Eigen::MatrixXd x;  // n rows, d columns
  Eigen::VectorXd y;  // n responses
  std::vector<std::string> feature_names;  // empty or one label per column

  int n() const { return static_cast<int>(x.rows()); }
  int d() const { return static_cast<int>(x.cols()); }
  void validate() const;
};

// ---- regions and trees ------------------------------------------------------

// Half-open interval (lower, upper]; unbounded sides use +-inf.
struct Interval {
  double lower = -kInf;
  double upper = kInf;
  bool contains(double v) const { return v > lower && v <= upper; }
};

// Coordinate subset, strictly increasing, 0-based.
using CoordSet = std::vector<int>;

// Axis-aligned cell over the coordinates in `coords`; unlisted coordinates are free.
struct Region {
  CoordSet coords;
  std::vector<Interval> bounds;  // aligned with coords
};

bool region_contains(const Region& region, const Eigen::RowVectorXd& x);

struct Leaf {
  Region region;
  double value = 0.0;
};

struct Tree {
  CoordSet coords;
  std::vector<Leaf> leaves;

  int leaf_count() const { return static_cast<int>(leaves.size()); }
};

// Interaction trees hold overlapping leaves; the component value at a point is
// the sum over every leaf containing it. 1-D trees partition the line, so
// exactly one leaf contributes.
double tree_component_value(const Tree& tree, const Eigen::RowVectorXd& x);

// One accepted split. `spawned` marks splits whose children landed in the
// tree over `tree` coords plus `coordinate`.
struct SplitRecord {
  int iteration = 0;  // 1-based fitting iteration
  CoordSet tree;
  int coordinate = -1;
  int leaf = -1;
  double point = 0.0;
  bool spawned = false;
  int source_leaf_count = 0;  // leaf count of the source tree before this split
  double gain = 0.0;          // SSR decrease
};

struct TreeFamily {
  std::map<CoordSet, Tree> trees;
  Eigen::VectorXd residuals;          // over the family's training sample
  std::uint64_t rng_seed = 0;
  std::vector<int> sample_indices;    // rows of the original data this family saw
  std::vector<SplitRecord> split_log;
  std::vector<double> ssr_trajectory;  // entry s = training SSR after iteration s
};

double family_predict(const TreeFamily& family, const Eigen::RowVectorXd& x);

// ---- forest -----------------------------------------------------------------

struct FitParams {
  int ntrees = 50;
  int nsplits = 30;
  double t_try = 0.5;
  int split_try = 10;
  int max_interaction = 1;  // 0 = unbounded
  std::uint64_t seed = 0;
  bool bootstrap = true;
  // Enumerate every distinct pool value instead of split_try random draws.
  bool full_candidate_pool = false;
  // Re-derive residuals from scratch after every iteration and compare.
  bool check_invariants = false;

  int interaction_cap(int d) const {
    return max_interaction == 0 ? d : std::min(max_interaction, d);
  }
  void validate() const;
};

struct FeatureRange {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

struct ForestModel {
  FitParams params;
  int d = 0;
  std::vector<std::string> feature_names;
  FeatureRange training_range;
  std::vector<TreeFamily> families;
};

double forest_predict(const ForestModel& model, const Eigen::RowVectorXd& x);
Eigen::VectorXd forest_predict(const ForestModel& model, const Eigen::MatrixXd& x);

std::string feature_label(const std::vector<std::string>& names, int coord);
std::string coord_set_label(const std::vector<std::string>& names, const CoordSet& u);

}  // namespace rpf
