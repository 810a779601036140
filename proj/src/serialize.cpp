#include "rpf/serialize.hpp"

#include <fstream>

namespace rpf {

using nlohmann::json;

namespace {

json bound_to_json(double b) {
  if (b == kInf) return json("inf");
  if (b == -kInf) return json("-inf");
  return json(b);
}

double bound_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    throw std::invalid_argument("bad interval bound: " + s);
  }
  return j.get<double>();
}

json coords_to_json(const CoordSet& u) {
  json arr = json::array();
  for (int k : u) arr.push_back(k + 1);  // 1-based on disk
  return arr;
}

CoordSet coords_from_json(const json& arr) {
  CoordSet u;
  for (const auto& v : arr) u.push_back(v.get<int>() - 1);
  return u;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& e : arr) v(i++) = e.get<double>();
  return v;
}

}  // namespace

json model_to_json(const ForestModel& model) {
  json j;
  j["version"] = 1;
  j["d"] = model.d;
  j["params"] = {{"ntrees", model.params.ntrees},
                 {"nsplits", model.params.nsplits},
                 {"t_try", model.params.t_try},
                 {"split_try", model.params.split_try},
                 {"max_interaction", model.params.max_interaction},
                 {"seed", model.params.seed},
                 {"bootstrap", model.params.bootstrap},
                 {"full_candidate_pool", model.params.full_candidate_pool}};
  j["feature_names"] = model.feature_names;
  j["training_range"] = {{"min", vector_to_json(model.training_range.min)},
                         {"max", vector_to_json(model.training_range.max)}};
  json families = json::array();
  for (const TreeFamily& family : model.families) {
    json trees = json::array();
    for (const auto& [coords, tree] : family.trees) {
      json leaves = json::array();
      for (const Leaf& leaf : tree.leaves) {
        json lower = json::array(), upper = json::array();
        for (const Interval& b : leaf.region.bounds) {
          lower.push_back(bound_to_json(b.lower));
          upper.push_back(bound_to_json(b.upper));
        }
        leaves.push_back({{"lower", lower}, {"upper", upper}, {"value", leaf.value}});
      }
      trees.push_back({{"coords", coords_to_json(coords)}, {"leaves", leaves}});
    }
    families.push_back({{"seed", family.rng_seed}, {"trees", trees}});
  }
  j["families"] = families;
  return j;
}

namespace {

ForestModel model_from_json_checked(const json& j) {
  if (j.at("version").get<int>() != 1) throw std::invalid_argument("unsupported model version");
  ForestModel model;
  model.d = j.at("d").get<int>();
  const json& p = j.at("params");
  model.params.ntrees = p.at("ntrees").get<int>();
  model.params.nsplits = p.at("nsplits").get<int>();
  model.params.t_try = p.at("t_try").get<double>();
  model.params.split_try = p.at("split_try").get<int>();
  model.params.max_interaction = p.at("max_interaction").get<int>();
  model.params.seed = p.at("seed").get<std::uint64_t>();
  model.params.bootstrap = p.at("bootstrap").get<bool>();
  model.params.full_candidate_pool = p.at("full_candidate_pool").get<bool>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.training_range.min = vector_from_json(j.at("training_range").at("min"));
  model.training_range.max = vector_from_json(j.at("training_range").at("max"));
  for (const json& fj : j.at("families")) {
    TreeFamily family;
    family.rng_seed = fj.at("seed").get<std::uint64_t>();
    for (const json& tj : fj.at("trees")) {
      Tree tree;
      tree.coords = coords_from_json(tj.at("coords"));
      for (const json& lj : tj.at("leaves")) {
        Leaf leaf;
        leaf.region.coords = tree.coords;
        const json& lower = lj.at("lower");
        const json& upper = lj.at("upper");
        if (lower.size() != tree.coords.size() || upper.size() != tree.coords.size())
          throw std::invalid_argument("leaf bound arity does not match tree coords");
        for (std::size_t a = 0; a < tree.coords.size(); ++a)
          leaf.region.bounds.push_back({bound_from_json(lower[a]), bound_from_json(upper[a])});
        leaf.value = lj.at("value").get<double>();
        tree.leaves.push_back(std::move(leaf));
      }
      family.trees.emplace(tree.coords, std::move(tree));
    }
    model.families.push_back(std::move(family));
  }
  return model;
}

}  // namespace

ForestModel model_from_json(const json& j) {
  try {
    return model_from_json_checked(j);
  } catch (const json::exception& e) {
    // missing keys / wrong types are a caller input problem, not an internal one
    throw std::invalid_argument(std::string("bad model json: ") + e.what());
  }
}

std::string model_to_string(const ForestModel& model) { return model_to_json(model).dump(); }

ForestModel model_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad model json: ") + e.what());
  }
  return model_from_json(j);
}

void save_model(const ForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot open " + path + " for writing");
  out << model_to_string(model) << "\n";
}

ForestModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace rpf
