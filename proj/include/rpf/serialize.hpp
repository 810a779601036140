#pragma once

#include <json.hpp>
#include <string>

#include "rpf/types.hpp"

namespace rpf {

nlohmann::json model_to_json(const ForestModel& model);
ForestModel model_from_json(const nlohmann::json& j);

std::string model_to_string(const ForestModel& model);
ForestModel model_from_string(const std::string& text);

void save_model(const ForestModel& model, const std::string& path);
ForestModel load_model(const std::string& path);

}  // namespace rpf
