#include "gsd/json_io.hpp"

#include <fstream>

#include "gsd/errors.hpp"

namespace gsd {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* name) {
  if (!j.is_object()) throw FormatError("expected a JSON object");
  auto it = j.find(name);
  if (it == j.end()) throw FormatError(std::string("missing field '") + name + "'");
  return *it;
}

template <typename T>
T get_as(const json& j, const std::string& path) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw FormatError("field '" + path + "' has the wrong type");
  }
}

json vec_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw FormatError("field '" + path + "' must be [x, y, z]");
  Eigen::Vector3d v;
  for (int a = 0; a < 3; ++a) v[a] = get_as<double>(j[a], path + "[" + std::to_string(a) + "]");
  return v;
}

Positions positions_from_json(const json& j, const std::string& path) {
  if (!j.is_array()) throw FormatError("field '" + path + "' must be an array");
  Positions out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec_from_json(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

json mat_to_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
  return rows;
}

Eigen::Matrix3d mat_from_json(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw FormatError("field '" + path + "' must be a 3x3 array");
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r) m.row(r) = vec_from_json(j[r], path + "[" + std::to_string(r) + "]").transpose();
  return m;
}

}  // namespace

json graph_to_json(const ControlGraph& graph) {
  json positions = json::array();
  for (const auto& p : graph.rest_positions) positions.push_back(vec_to_json(p));
  return {{"node_indices", graph.node_indices},
          {"rest_positions", positions},
          {"neighbors", graph.neighbors},
          {"weights", graph.weights},
          {"k", graph.k},
          {"seed", graph.seed}};
}

ControlGraph graph_from_json(const json& j) {
  ControlGraph g;
  g.node_indices = get_as<std::vector<std::size_t>>(field(j, "node_indices"), "node_indices");
  g.rest_positions = positions_from_json(field(j, "rest_positions"), "rest_positions");
  g.neighbors = get_as<std::vector<std::vector<std::size_t>>>(field(j, "neighbors"), "neighbors");
  g.weights = get_as<std::vector<std::vector<double>>>(field(j, "weights"), "weights");
  g.k = get_as<std::size_t>(field(j, "k"), "k");
  g.seed = get_as<std::uint64_t>(field(j, "seed"), "seed");
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid graph: ") + e.what());
  }
  return g;
}

json handles_to_json(const HandleSet& handles) {
  json targets = json::array();
  for (const auto& t : handles.targets) targets.push_back(vec_to_json(t));
  return {{"indices", handles.indices}, {"targets", targets}};
}

HandleSet handles_from_json(const json& j) {
  HandleSet h;
  h.indices = get_as<std::vector<std::size_t>>(field(j, "indices"), "indices");
  h.targets = positions_from_json(field(j, "targets"), "targets");
  if (h.indices.size() != h.targets.size())
    throw FormatError("'indices' and 'targets' have different lengths");
  return h;
}

json result_to_json(const DeformResult& result) {
  json positions = json::array(), rotations = json::array();
  for (const auto& p : result.positions) positions.push_back(vec_to_json(p));
  for (const auto& r : result.rotations) rotations.push_back(mat_to_json(r));
  return {{"positions", positions},
          {"rotations", rotations},
          {"energy_trace", result.energy_trace},
          {"status", result.status == SolveStatus::Ok ? "ok" : "no_handles"}};
}

json camera_to_json(const Camera& c) {
  return {{"fx", c.fx},         {"fy", c.fy},
          {"cx", c.cx},         {"cy", c.cy},
          {"width", c.width},   {"height", c.height},
          {"rotation", mat_to_json(c.rotation)},
          {"translation", vec_to_json(c.translation)}};
}

Camera camera_from_json(const json& j) {
  Camera c;
  c.fx = get_as<double>(field(j, "fx"), "fx");
  c.fy = get_as<double>(field(j, "fy"), "fy");
  c.cx = get_as<double>(field(j, "cx"), "cx");
  c.cy = get_as<double>(field(j, "cy"), "cy");
  c.width = get_as<int>(field(j, "width"), "width");
  c.height = get_as<int>(field(j, "height"), "height");
  c.rotation = mat_from_json(field(j, "rotation"), "rotation");
  c.translation = vec_from_json(field(j, "translation"), "translation");
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw FormatError(std::string("invalid camera: ") + e.what());
  }
  return c;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << j.dump(1) << "\n";
}

}  // namespace gsd
