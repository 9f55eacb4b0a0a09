#pragma once

#include <json.hpp>

#include "fusion/checkpoint.hpp"
#include "fusion/model.hpp"

namespace fusion {

using Json = nlohmann::json;

void to_json(Json& j, const ArchitectureConfig& cfg);
void from_json(const Json& j, ArchitectureConfig& cfg);

void to_json(Json& j, const TrainingMetadata& m);
void from_json(const Json& j, TrainingMetadata& m);

/// Compact dump with sorted keys; identical values give identical bytes.
inline std::string canonical(const Json& j) { return j.dump(); }

}  // namespace fusion
