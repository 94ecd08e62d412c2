#pragma once

#include "tsattack/config.hpp"

#include "json.hpp"

namespace tsattack::detail {

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_as_json(const ExperimentConfig& cfg);

}  // namespace tsattack::detail
