#pragma once

#include "routh/bubbles.hpp"
#include "routh/constants.hpp"
#include "routh/critical_points.hpp"
#include "routh/hamiltonian.hpp"
#include "routh/model.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace routh {

using json = nlohmann::ordered_json;

// JSON views of the core structures.  Matrices are stored row-major as flat
// arrays alongside their dimensions; vectors as plain arrays.
json to_json(const CurvatureModel& model);
json to_json(const Configuration& cfg);
json to_json(const CriticalPointReport& report);
json to_json(const UniversalConstants& constants);
json to_json(const Bubble& b);
json to_json(const BubbleEnsemble& ens);
json to_json(const MEpsEntry& entry);
json to_json(const MEpsReport& report);

CurvatureModel model_from_json(const json& j);
Configuration configuration_from_json(const json& j);
CriticalPointReport critical_point_from_json(const json& j);
BubbleEnsemble ensemble_from_json(const json& j);

// Serializes with every number printed to 17 significant digits (round-trip
// exact for IEEE doubles), so repeated runs compare byte-for-byte.
std::string dump_g17(const json& j, int indent = 2);

// One numeric cell, %.17g.  Strings pass through unchanged (they never
// contain commas here).
std::string csv_cell(double x);

// Joins cells with commas and a trailing newline.
std::string csv_row(const std::vector<std::string>& cells);

} // namespace routh
