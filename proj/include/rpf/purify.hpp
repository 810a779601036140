#pragma once

#include <map>

#include "rpf/types.hpp"

namespace rpf {

// Piecewise-constant function on a rectangular grid over the coordinates in
// `coords`. Values are stored row-major with the last axis fastest.
struct GridComponent {
  CoordSet coords;
  std::vector<std::vector<double>> breaks;  // per axis, ascending; endpoints = range
  std::vector<double> values;

  int axes() const { return static_cast<int>(coords.size()); }
  int cells(int axis) const { return static_cast<int>(breaks[axis].size()) - 1; }
  std::size_t cell_count() const;
  // Cell index along an axis for position v; positions at or below the lowest
  // break clamp into the first cell, above the highest into the last.
  int axis_cell(int axis, double v) const;
  double value_at(const std::vector<double>& pos) const;
};

struct PurifiedModel {
  double constant = 0.0;
  std::map<CoordSet, GridComponent> components;
  FeatureRange range;
  std::vector<std::string> feature_names;
};

// Projects the model's overlapping leaves onto per-component grids over the
// given range (default: training range). Component u appears when some family
// grew a u-tree, or u is a subset of a grown tree's coordinates (those start
// as zero grids and receive mass during purification). Axis-k breaks of
// component u collect the coordinate-k split points of every tree whose
// coordinate set contains u, so purification always moves mass onto a grid
// that can represent it exactly.
PurifiedModel flatten(const ForestModel& model);
PurifiedModel flatten(const ForestModel& model, const FeatureRange& range);

// Iterative mass-moving: per component from highest order downward, subtract
// the cell-width-weighted mean along each axis and add it to the component
// without that axis (or to the constant). Stops when the largest extracted
// mean of a full sweep is below 1e-12; throws NonConvergence after 10000
// sweeps. The pointwise sum constant + sum_u component_u is unchanged.
void purify(PurifiedModel& model);

double purified_predict(const PurifiedModel& model, const Eigen::RowVectorXd& x);

// Largest absolute cell-width-weighted mean over all components, axes and
// slices; ~0 after purify.
double max_axis_mean(const PurifiedModel& model);

// CSV export of components up to max_order (1 or 2) plus the constant row.
// grid_size 0 keeps native cells; a positive value resamples each axis to that
// many equal-width cells, averaging exactly (cell-overlap weighted), which
// preserves the zero-mean constraint.
std::vector<std::string> component_csv_header();
std::vector<std::vector<std::string>> component_csv_rows(const PurifiedModel& model,
                                                         int max_order, int grid_size);

}  // namespace rpf
