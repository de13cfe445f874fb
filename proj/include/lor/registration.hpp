#pragma once

#include <filesystem>

#include <json.hpp>

#include "lor/objective.hpp"
#include "lor/optimizer.hpp"
#include "lor/transform.hpp"

namespace lor {

struct RegistrationResult {
  Transform transform;
  OptimizationTrace trace;
  double final_value = 0.0;  // minimisation orientation
};

/// Quasi-Newton registration of `moving` onto `fixed` starting at `init`.
RegistrationResult register_images(const ObjectiveConfig& config, const ImageGrid& moving,
                                   const ImageGrid& fixed, const Transform& init,
                                   const OptimizerOptions& options = {});

/// Same, reusing an existing objective.
RegistrationResult register_images(const Objective& objective, const Transform& init,
                                   const OptimizerOptions& options = {});

nlohmann::json to_json(const ObjectiveConfig& config);
ObjectiveConfig objective_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptimizerOptions& options);
OptimizerOptions optimizer_options_from_json(const nlohmann::json& j);

/// Transform kind, parameters, config echo and a trace summary.
nlohmann::json to_json(const RegistrationResult& result, const ObjectiveConfig& config);

}  // namespace lor
