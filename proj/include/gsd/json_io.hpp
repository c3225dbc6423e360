#pragma once

#include <string>

#include "json.hpp"

#include "gsd/arap.hpp"
#include "gsd/deform_graph.hpp"
#include "gsd/render.hpp"

namespace gsd {

// File schemas:
//   graph:   {node_indices, rest_positions, neighbors, weights, k, seed}
//   handles: {indices: [...], targets: [[x,y,z], ...]}
//   result:  {positions, rotations (row-major 3x3), energy_trace, status}
//   camera:  {fx, fy, cx, cy, width, height, rotation (row-major 3x3), translation}
// Decoding throws FormatError naming the offending field.

nlohmann::json graph_to_json(const ControlGraph& graph);
ControlGraph graph_from_json(const nlohmann::json& j);

nlohmann::json handles_to_json(const HandleSet& handles);
HandleSet handles_from_json(const nlohmann::json& j);

nlohmann::json result_to_json(const DeformResult& result);

nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace gsd
