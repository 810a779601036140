#include "rpf/types.hpp"

namespace rpf {

void Dataset::validate() const {
  if (x.rows() < 2) throw std::invalid_argument("need at least 2 observations");
  if (x.cols() < 1) throw std::invalid_argument("need at least 1 predictor");
  if (y.size() != x.rows()) throw std::invalid_argument("y length does not match x rows");
  if (!y.allFinite() || !x.allFinite()) throw std::invalid_argument("non-finite entries in data");
  if (!feature_names.empty() && static_cast<int>(feature_names.size()) != d())
    throw std::invalid_argument("feature_names size does not match column count");
}

void FitParams::validate() const {
  if (ntrees < 1) throw std::invalid_argument("ntrees must be >= 1");
  if (nsplits < 1) throw std::invalid_argument("nsplits must be >= 1");
  if (!(t_try > 0.0 && t_try <= 1.0)) throw std::invalid_argument("t_try must be in (0, 1]");
  if (split_try < 1) throw std::invalid_argument("split_try must be >= 1");
  if (max_interaction < 0) throw std::invalid_argument("max_interaction must be >= 0 (0 = unbounded)");
}

bool region_contains(const Region& region, const Eigen::RowVectorXd& x) {
  for (std::size_t a = 0; a < region.coords.size(); ++a) {
    if (!region.bounds[a].contains(x(region.coords[a]))) return false;
  }
  return true;
}

double tree_component_value(const Tree& tree, const Eigen::RowVectorXd& x) {
  double total = 0.0;
  for (const Leaf& leaf : tree.leaves) {
    if (region_contains(leaf.region, x)) total += leaf.value;
  }
  return total;
}

double family_predict(const TreeFamily& family, const Eigen::RowVectorXd& x) {
  double total = 0.0;
  for (const auto& [coords, tree] : family.trees) total += tree_component_value(tree, x);
  return total;
}

double forest_predict(const ForestModel& model, const Eigen::RowVectorXd& x) {
  double total = 0.0;
  for (const TreeFamily& family : model.families) total += family_predict(family, x);
  return total / static_cast<double>(model.families.size());
}

Eigen::VectorXd forest_predict(const ForestModel& model, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::RowVectorXd row = x.row(i);
    out(i) = forest_predict(model, row);
  }
  return out;
}

std::string feature_label(const std::vector<std::string>& names, int coord) {
  if (coord >= 0 && coord < static_cast<int>(names.size()) && !names[coord].empty())
    return names[coord];
  return "x" + std::to_string(coord + 1);
}

std::string coord_set_label(const std::vector<std::string>& names, const CoordSet& u) {
  std::string label;
  for (std::size_t a = 0; a < u.size(); ++a) {
    if (a > 0) label += ":";
    label += feature_label(names, u[a]);
  }
  return label;
}

}  // namespace rpf
