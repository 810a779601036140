#include "rpf/purify.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rpf/csv.hpp"

namespace rpf {

namespace {

std::vector<std::size_t> strides_of(const GridComponent& comp) {
  const int na = comp.axes();
  std::vector<std::size_t> stride(na);
  std::size_t s = 1;
  for (int a = na - 1; a >= 0; --a) {
    stride[a] = s;
    s *= comp.cells(a);
  }
  return stride;
}

int break_index(const std::vector<double>& breaks, double v) {
  return static_cast<int>(std::lower_bound(breaks.begin(), breaks.end(), v) - breaks.begin());
}

// One mean-extraction direction of one component: axis `axis` of component
// `u`, draining into `target` (u minus that axis' coordinate) or the constant.
// cell_maps[j] maps a source cell on the j-th remaining axis to the half-open
// target cell range it covers (target grids are at least as fine).
struct ExtractPlan {
  CoordSet u;
  int axis = 0;
  std::vector<double> widths;
  double total_width = 0.0;
  bool to_constant = false;
  CoordSet target;
  std::vector<std::vector<std::pair<int, int>>> cell_maps;
};

std::vector<ExtractPlan> make_plans(const PurifiedModel& model) {
  // highest interaction order first, lexicographic within an order
  std::vector<CoordSet> order;
  for (const auto& [u, comp] : model.components) order.push_back(u);
  std::sort(order.begin(), order.end(), [](const CoordSet& a, const CoordSet& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });

  std::vector<ExtractPlan> plans;
  for (const CoordSet& u : order) {
    const GridComponent& comp = model.components.at(u);
    for (int a = 0; a < comp.axes(); ++a) {
      ExtractPlan plan;
      plan.u = u;
      plan.axis = a;
      const auto& bk = comp.breaks[a];
      plan.widths.resize(comp.cells(a));
      for (int i = 0; i < comp.cells(a); ++i) plan.widths[i] = bk[i + 1] - bk[i];
      plan.total_width = bk.back() - bk.front();
      if (comp.axes() == 1) {
        plan.to_constant = true;
      } else {
        plan.target = u;
        plan.target.erase(plan.target.begin() + a);
        const GridComponent& target = model.components.at(plan.target);
        for (int j = 0; j < comp.axes(); ++j) {
          if (j == a) continue;
          const int tj = j < a ? j : j - 1;
          std::vector<std::pair<int, int>> map(comp.cells(j));
          for (int i = 0; i < comp.cells(j); ++i) {
            map[i] = {break_index(target.breaks[tj], comp.breaks[j][i]),
                      break_index(target.breaks[tj], comp.breaks[j][i + 1])};
          }
          plan.cell_maps.push_back(std::move(map));
        }
      }
      plans.push_back(std::move(plan));
    }
  }
  return plans;
}

// Applies one extraction pass; when mutate is false only measures the means.
double run_plan(PurifiedModel& model, const ExtractPlan& plan, bool mutate) {
  GridComponent& comp = model.components.at(plan.u);
  const int na = comp.axes();
  const int a = plan.axis;
  const std::vector<std::size_t> stride = strides_of(comp);
  const int ca = comp.cells(a);

  GridComponent* target = nullptr;
  std::vector<std::size_t> target_stride;
  if (!plan.to_constant) {
    target = &model.components.at(plan.target);
    target_stride = strides_of(*target);
  }

  std::vector<int> idx(na, 0);  // idx[a] stays 0; odometer over the other axes
  double max_mu = 0.0;
  for (;;) {
    std::size_t base = 0;
    for (int j = 0; j < na; ++j)
      if (j != a) base += static_cast<std::size_t>(idx[j]) * stride[j];

    double acc = 0.0;
    for (int i = 0; i < ca; ++i) acc += plan.widths[i] * comp.values[base + i * stride[a]];
    const double mu = acc / plan.total_width;
    max_mu = std::max(max_mu, std::abs(mu));

    if (mutate && mu != 0.0) {
      for (int i = 0; i < ca; ++i) comp.values[base + i * stride[a]] -= mu;
      if (plan.to_constant) {
        model.constant += mu;
      } else {
        // add mu over the target cells covered by this slice's footprint
        std::vector<std::pair<int, int>> ranges;
        ranges.reserve(plan.cell_maps.size());
        int m = 0;
        for (int j = 0; j < na; ++j) {
          if (j == a) continue;
          ranges.push_back(plan.cell_maps[m][idx[j]]);
          ++m;
        }
        std::vector<int> t(ranges.size());
        for (std::size_t j = 0; j < ranges.size(); ++j) t[j] = ranges[j].first;
        for (;;) {
          std::size_t off = 0;
          for (std::size_t j = 0; j < t.size(); ++j)
            off += static_cast<std::size_t>(t[j]) * target_stride[j];
          target->values[off] += mu;
          std::size_t j = t.size();
          while (j > 0) {
            --j;
            if (++t[j] < ranges[j].second) break;
            t[j] = ranges[j].first;
            if (j == 0) {
              j = t.size() + 1;  // signal done
              break;
            }
          }
          if (j == t.size() + 1 || t.empty()) break;
        }
      }
    }

    // advance the slice odometer
    int j = na - 1;
    for (; j >= 0; --j) {
      if (j == a) continue;
      if (++idx[j] < comp.cells(j)) break;
      idx[j] = 0;
    }
    if (j < 0) break;
  }
  return max_mu;
}

}  // namespace

std::size_t GridComponent::cell_count() const {
  std::size_t total = 1;
  for (int a = 0; a < axes(); ++a) total *= static_cast<std::size_t>(cells(a));
  return total;
}

int GridComponent::axis_cell(int axis, double v) const {
  const auto& b = breaks[axis];
  const int idx = break_index(b, v) - 1;
  return std::clamp(idx, 0, cells(axis) - 1);
}

double GridComponent::value_at(const std::vector<double>& pos) const {
  const std::vector<std::size_t> stride = strides_of(*this);
  std::size_t off = 0;
  for (int a = 0; a < axes(); ++a)
    off += static_cast<std::size_t>(axis_cell(a, pos[a])) * stride[a];
  return values[off];
}

PurifiedModel flatten(const ForestModel& model) { return flatten(model, model.training_range); }

PurifiedModel flatten(const ForestModel& model, const FeatureRange& range) {
  PurifiedModel out;
  out.range = range;
  out.feature_names = model.feature_names;

  // split points per grown tree set and coordinate, clipped strictly inside the range
  std::map<CoordSet, std::map<int, std::set<double>>> tree_breaks;
  for (const TreeFamily& family : model.families) {
    for (const auto& [coords, tree] : family.trees) {
      auto& per_coord = tree_breaks[coords];
      for (int k : coords) per_coord[k];
      for (const Leaf& leaf : tree.leaves) {
        for (std::size_t a = 0; a < coords.size(); ++a) {
          const int k = coords[a];
          for (const double b : {leaf.region.bounds[a].lower, leaf.region.bounds[a].upper}) {
            if (std::isfinite(b) && b > range.min(k) && b < range.max(k)) per_coord[k].insert(b);
          }
        }
      }
    }
  }

  std::set<CoordSet> comp_sets;
  for (const auto& [coords, per_coord] : tree_breaks) {
    comp_sets.insert(coords);
    if (coords.size() > 1) {  // nonempty proper subsets receive purification mass
      const int m = static_cast<int>(coords.size());
      for (int mask = 1; mask < (1 << m) - 1; ++mask) {
        CoordSet sub;
        for (int a = 0; a < m; ++a)
          if (mask & (1 << a)) sub.push_back(coords[a]);
        comp_sets.insert(std::move(sub));
      }
    }
  }

  for (const CoordSet& u : comp_sets) {
    GridComponent comp;
    comp.coords = u;
    for (const int k : u) {
      std::set<double> pts;
      for (const auto& [w, per_coord] : tree_breaks) {
        if (!std::includes(w.begin(), w.end(), u.begin(), u.end())) continue;
        const auto it = per_coord.find(k);
        if (it != per_coord.end()) pts.insert(it->second.begin(), it->second.end());
      }
      std::vector<double> axis;
      axis.push_back(range.min(k));
      axis.insert(axis.end(), pts.begin(), pts.end());
      // a constant feature has zero observed width; give its single cell unit
      // width so weighted means stay defined
      axis.push_back(range.max(k) > range.min(k) ? range.max(k) : range.min(k) + 1.0);
      comp.breaks.push_back(std::move(axis));
    }
    comp.values.assign(comp.cell_count(), 0.0);
    out.components.emplace(u, std::move(comp));
  }

  // rasterize the overlapping leaves onto the grids
  for (auto& [u, comp] : out.components) {
    const std::vector<std::size_t> stride = strides_of(comp);
    const int na = comp.axes();
    for (const TreeFamily& family : model.families) {
      const auto it = family.trees.find(u);
      if (it == family.trees.end()) continue;
      for (const Leaf& leaf : it->second.leaves) {
        std::vector<std::pair<int, int>> span(na);
        bool empty = false;
        for (int a = 0; a < na && !empty; ++a) {
          const auto& bk = comp.breaks[a];
          const int ncells = comp.cells(a);
          const int i0 = std::clamp(break_index(bk, leaf.region.bounds[a].lower), 0, ncells);
          const int i1 = std::clamp(break_index(bk, leaf.region.bounds[a].upper), 0, ncells);
          if (i0 >= i1) empty = true;
          span[a] = {i0, i1};
        }
        if (empty) continue;
        std::vector<int> idx(na);
        for (int a = 0; a < na; ++a) idx[a] = span[a].first;
        for (;;) {
          std::size_t off = 0;
          for (int a = 0; a < na; ++a) off += static_cast<std::size_t>(idx[a]) * stride[a];
          comp.values[off] += leaf.value;
          int a = na - 1;
          for (; a >= 0; --a) {
            if (++idx[a] < span[a].second) break;
            idx[a] = span[a].first;
          }
          if (a < 0) break;
        }
      }
    }
    const double scale = 1.0 / static_cast<double>(model.families.size());
    for (double& v : comp.values) v *= scale;
  }
  return out;
}

void purify(PurifiedModel& model) {
  const std::vector<ExtractPlan> plans = make_plans(model);
  for (int sweep = 0; sweep < 10000; ++sweep) {
    double max_mu = 0.0;
    for (const ExtractPlan& plan : plans)
      max_mu = std::max(max_mu, run_plan(model, plan, true));
    if (max_mu < 1e-12) return;
  }
  throw NonConvergenceError("purification did not converge within 10000 sweeps");
}

double purified_predict(const PurifiedModel& model, const Eigen::RowVectorXd& x) {
  double total = model.constant;
  std::vector<double> pos;
  for (const auto& [u, comp] : model.components) {
    pos.clear();
    for (const int k : u) pos.push_back(x(k));
    total += comp.value_at(pos);
  }
  return total;
}

double max_axis_mean(const PurifiedModel& model) {
  PurifiedModel& mutable_model = const_cast<PurifiedModel&>(model);
  double max_mu = 0.0;
  for (const ExtractPlan& plan : make_plans(model))
    max_mu = std::max(max_mu, run_plan(mutable_model, plan, false));
  return max_mu;
}

std::vector<std::string> component_csv_header() {
  return {"component", "axis1_lower", "axis1_upper", "axis2_lower", "axis2_upper", "value"};
}

namespace {

// Exact average of a component over [lo, hi) per axis, from cell overlaps.
double component_average(const GridComponent& comp, const std::vector<std::pair<double, double>>& box) {
  const std::vector<std::size_t> stride = strides_of(comp);
  const int na = comp.axes();
  // per axis: overlapping source cells and overlap widths
  std::vector<std::vector<std::pair<int, double>>> overlaps(na);
  double volume = 1.0;
  for (int a = 0; a < na; ++a) {
    const auto& bk = comp.breaks[a];
    volume *= box[a].second - box[a].first;
    for (int i = 0; i < comp.cells(a); ++i) {
      const double w =
          std::min(bk[i + 1], box[a].second) - std::max(bk[i], box[a].first);
      if (w > 0) overlaps[a].push_back({i, w});
    }
    if (overlaps[a].empty()) return 0.0;
  }
  double acc = 0.0;
  std::vector<std::size_t> pick(na, 0);
  for (;;) {
    double weight = 1.0;
    std::size_t off = 0;
    for (int a = 0; a < na; ++a) {
      weight *= overlaps[a][pick[a]].second;
      off += static_cast<std::size_t>(overlaps[a][pick[a]].first) * stride[a];
    }
    acc += weight * comp.values[off];
    int a = na - 1;
    for (; a >= 0; --a) {
      if (++pick[a] < overlaps[a].size()) break;
      pick[a] = 0;
    }
    if (a < 0) break;
  }
  return acc / volume;
}

}  // namespace

std::vector<std::vector<std::string>> component_csv_rows(const PurifiedModel& model,
                                                         int max_order, int grid_size) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"intercept", "", "", "", "", format_double(model.constant)});
  for (const auto& [u, comp] : model.components) {
    if (static_cast<int>(u.size()) > max_order) continue;
    const std::string label = coord_set_label(model.feature_names, u);
    const int na = comp.axes();

    std::vector<std::vector<double>> axis_breaks;
    if (grid_size <= 0) {
      for (int a = 0; a < na; ++a) axis_breaks.push_back(comp.breaks[a]);
    } else {
      for (int a = 0; a < na; ++a) {
        const double lo = comp.breaks[a].front(), hi = comp.breaks[a].back();
        std::vector<double> bk(grid_size + 1);
        for (int i = 0; i <= grid_size; ++i)
          bk[i] = lo + (hi - lo) * static_cast<double>(i) / grid_size;
        axis_breaks.push_back(std::move(bk));
      }
    }

    std::vector<int> idx(na, 0);
    for (;;) {
      std::vector<std::pair<double, double>> box(na);
      for (int a = 0; a < na; ++a) box[a] = {axis_breaks[a][idx[a]], axis_breaks[a][idx[a] + 1]};
      double value;
      if (grid_size <= 0) {
        std::size_t off = 0;
        const std::vector<std::size_t> stride = strides_of(comp);
        for (int a = 0; a < na; ++a) off += static_cast<std::size_t>(idx[a]) * stride[a];
        value = comp.values[off];
      } else {
        value = component_average(comp, box);
      }
      std::vector<std::string> row{label,
                                   format_double(box[0].first),
                                   format_double(box[0].second),
                                   na > 1 ? format_double(box[1].first) : "",
                                   na > 1 ? format_double(box[1].second) : "",
                                   format_double(value)};
      rows.push_back(std::move(row));
      int a = na - 1;
      for (; a >= 0; --a) {
        if (++idx[a] < static_cast<int>(axis_breaks[a].size()) - 1) break;
        idx[a] = 0;
      }
      if (a < 0) break;
    }
  }
  return rows;
}

}  // namespace rpf
