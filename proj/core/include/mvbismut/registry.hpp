#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvbismut/model.hpp"

namespace mvb {

/// Names accepted by make_model.
const std::vector<std::string>& model_names();

/// Builds a registered model from its JSON parameter object. Missing
/// parameters take documented defaults; unknown keys or bad values raise
/// ConfigError with a path rooted at `path` (e.g. "model.params.alpha").
CoefficientSet make_model(const std::string& id, const nlohmann::json& params,
                          const std::string& path = "model.params");

/// The parameter object with every default filled in (canonical form).
nlohmann::json canonical_model_params(const std::string& id, const nlohmann::json& params,
                                      const std::string& path = "model.params");

}  // namespace mvb
