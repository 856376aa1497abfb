#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "mmot/measures.hpp"
#include "mmot/mmot.hpp"
#include "mmot/structure.hpp"
#include "mmot/transforms.hpp"

namespace mmot {

using json = nlohmann::ordered_json;

// Measures serialize as arrays of [position, weight] pairs; plans as
// {dim, x_grid, y_grid, entries: [[xi, yi, w]]}; component intervals carry
// null for unbounded endpoints. Coordinate indices are 0-based throughout.

json measure_to_json(const DiscreteMeasure& m);
DiscreteMeasure measure_from_json(const json& j);

json plan_to_json(const JointPlan& plan);
JointPlan plan_from_json(const json& j);

json decomposition_to_json(const Decomposition& dec);

json cost_to_json(const CostSpec& cost, int x_size, int y_size);
CostSpec cost_from_json(const json& j);

json problem_to_json(const MmotProblem& problem);
MmotProblem problem_from_json(const json& j);

json dual_to_json(const DualTriple& dual);
DualTriple dual_from_json(const json& j);

json load_json_file(const std::string& path);  // parse errors carry byte location
void write_json_file(const std::string& path, const json& j);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace mmot
