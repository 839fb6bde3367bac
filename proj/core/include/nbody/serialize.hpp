#pragma once

#include <utility>

#include "json.hpp"
#include "nbody/central_config.hpp"
#include "nbody/harmonics.hpp"
#include "nbody/mechanics.hpp"
#include "nbody/variational.hpp"

namespace nbody::io {

using json = nlohmann::json;

// {"masses":[...], "dim":d, "positions":[[...],...]} — the shared snapshot
// schema. All parsers throw std::invalid_argument on malformed input.
json systemToJson(const MassVector& m, const Configuration& q);
std::pair<MassVector, Configuration> systemFromJson(const json& j);

MassVector massesFromJson(const json& j);
int dimFromJson(const json& j, int fallback);

// {"masses":[...], "dim":d, "T":..., "a":[[...]], "b":[[...]]}
json toJson(const harmonics::TrigLoop& loop);
harmonics::TrigLoop trigLoopFromJson(const json& j);

// {"masses":[...], "T":..., "order":M, "cos":[[[x,y],...]], "sin":[[[x,y],...]]}
// with cos[i][h] the order-(h+1) cosine vector of body i.
json toJson(const variational::FourierLoop& loop);
variational::FourierLoop fourierLoopFromJson(const json& j);

json toJson(const central::CentralConfigResult& result);
json toJson(const variational::ActionReport& report);
json toJson(const harmonics::RigidityReport& report);
json toJson(const harmonics::RigidityCertificate& cert);

}  // namespace nbody::io
