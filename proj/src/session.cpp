#include "gsd/session.hpp"

#include <algorithm>

#include "gsd/config.hpp"
#include "gsd/errors.hpp"
#include "gsd/update_frame.hpp"

namespace gsd::service {
namespace {

using nlohmann::json;

class PayloadError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

template <typename T>
T read_field(const json& msg, const std::string& type, const char* name) {
  const std::string path = type + "." + name;
  auto it = msg.find(name);
  if (it == msg.end()) throw PayloadError(path + ": missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw PayloadError(path + ": wrong type");
  }
}

template <typename T>
T read_field_or(const json& msg, const std::string& type, const char* name, T fallback) {
  return msg.contains(name) ? read_field<T>(msg, type, name) : fallback;
}

Positions read_points(const json& msg, const std::string& type, const char* name) {
  const std::string path = type + "." + name;
  auto it = msg.find(name);
  if (it == msg.end()) throw PayloadError(path + ": missing");
  if (!it->is_array()) throw PayloadError(path + ": expected an array");
  Positions out;
  out.reserve(it->size());
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& p = (*it)[i];
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!p.is_array() || p.size() != 3) throw PayloadError(at + ": expected [x, y, z]");
    Eigen::Vector3d v;
    for (int a = 0; a < 3; ++a) {
      if (!p[a].is_number()) throw PayloadError(at + "[" + std::to_string(a) + "]: expected a number");
      v[a] = p[a].get<double>();
    }
    if (!v.allFinite()) throw PayloadError(at + ": non-finite coordinate");
    out.push_back(v);
  }
  return out;
}

json points_json(const Positions& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

std::vector<Reply> single(json reply) {
  std::vector<Reply> out;
  out.emplace_back(std::move(reply));
  return out;
}

}  // namespace

json error_reply(std::string_view code, std::string_view detail) {
  return {{"type", "error"}, {"code", code}, {"detail", detail}};
}

void coalesce_drags(std::deque<json>& queue) {
  const auto is_drag = [](const json& m) {
    return m.is_object() && m.contains("type") && m["type"] == "drag";
  };
  std::deque<json> kept;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    if (is_drag(queue[i]) && i + 1 < queue.size() && is_drag(queue[i + 1])) continue;
    kept.push_back(std::move(queue[i]));
  }
  queue.swap(kept);
}

std::vector<Reply> Session::handle_text(std::string_view text) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error& e) {
    return single(error_reply("parse", std::string("invalid JSON: ") + e.what()));
  }
  return handle_message(msg);
}

std::vector<Reply> Session::handle_message(const json& msg) {
  if (!msg.is_object()) return single(error_reply("parse", "message: expected a JSON object"));
  auto type_it = msg.find("type");
  if (type_it == msg.end() || !type_it->is_string())
    return single(error_reply("parse", "message.type: missing or not a string"));
  const std::string type = *type_it;
  try {
    if (type == "hello") return single({{"type", "hello_ack"}, {"protocol", kProtocolVersion}});
    if (type == "load") return on_load(msg);
    if (type == "sample") return on_sample(msg);
    if (type == "set_handles") return on_set_handles(msg);
    if (type == "drag") return on_drag(msg);
    if (type == "save") return on_save(msg);
    return single(error_reply("protocol", "unknown message type '" + type + "'"));
  } catch (const PayloadError& e) {
    return single(error_reply("parse", e.what()));
  } catch (const StateError& e) {
    return single(error_reply("bad_state", e.what()));
  } catch (const FormatError& e) {
    return single(error_reply("format", e.what()));
  } catch (const EmptyCloudError& e) {
    return single(error_reply("format", e.what()));
  } catch (const ValidationError& e) {
    return single(error_reply("format", e.what()));
  } catch (const ArgumentError& e) {
    return single(error_reply("argument", e.what()));
  } catch (const PreconditionError& e) {
    return single(error_reply("argument", e.what()));
  } catch (const NumericError& e) {
    return single(error_reply("numeric", e.what()));
  } catch (const Error& e) {
    return single(error_reply("io", e.what()));
  }
}

std::vector<Reply> Session::on_load(const json& msg) {
  const auto path = read_field<std::string>(msg, "load", "path");
  PlyOptions opts;
  opts.activated = read_field_or<bool>(msg, "load", "activated", false);
  GaussianCloud loaded = load_ply_file(path, opts);

  *this = Session{};
  cloud_ = std::move(loaded);
  deformed_ = cloud_;
  stage_ = Stage::Loaded;
  return single({{"type", "loaded"}, {"count", cloud_.size()}});
}

std::vector<Reply> Session::on_sample(const json& msg) {
  if (stage_ == Stage::Empty) throw StateError("sample before load");
  GraphOptions opts;
  opts.control_count = read_field_or<std::size_t>(msg, "sample", "n", defaults::kControlCount);
  opts.neighbors = read_field_or<std::size_t>(msg, "sample", "k", defaults::kGraphNeighbors);
  opts.seed = read_field_or<std::uint64_t>(msg, "sample", "seed", 0);
  ControlGraph graph = build_control_graph(cloud_, opts);
  SkinBinding binding = bind(cloud_, graph);

  graph_ = std::move(graph);
  binding_ = std::move(binding);
  handles_ = {};
  system_ = {};
  result_ = {};
  result_.positions = graph_.rest_positions;
  result_.rotations.assign(graph_.size(), Eigen::Matrix3d::Identity());
  deformed_ = cloud_;
  stage_ = Stage::Sampled;
  return single({{"type", "sampled"},
                 {"count", graph_.size()},
                 {"k", graph_.k},
                 {"controls", points_json(graph_.rest_positions)}});
}

std::vector<Reply> Session::on_set_handles(const json& msg) {
  if (stage_ == Stage::Empty || stage_ == Stage::Loaded) throw StateError("set_handles before sample");
  HandleSet handles;
  handles.indices = read_field<std::vector<std::size_t>>(msg, "set_handles", "indices");
  for (std::size_t idx : handles.indices) {
    if (idx >= graph_.size())
      throw PayloadError("set_handles.indices: node " + std::to_string(idx) + " out of range");
    handles.targets.push_back(result_.positions[idx]);
  }
  FactorizedSystem system = assemble_system(graph_, handles);

  handles_ = std::move(handles);
  system_ = std::move(system);
  stage_ = Stage::Ready;
  json reply = {{"type", "handles_set"},
                {"count", handles_.size()},
                {"targets", points_json(handles_.targets)}};
  if (system_.status() == SolveStatus::NoHandles) reply["status"] = "no_handles";
  return single(std::move(reply));
}

std::vector<Reply> Session::on_drag(const json& msg) {
  if (stage_ != Stage::Ready) throw StateError("drag before load, sample and set_handles");
  const auto seq = read_field<std::uint64_t>(msg, "drag", "seq");
  Positions targets = read_points(msg, "drag", "targets");
  if (targets.size() != handles_.size())
    throw PayloadError("drag.targets: expected " + std::to_string(handles_.size()) + " entries, got " +
                       std::to_string(targets.size()));

  // Unchanged targets keep the previous solution as is.
  if (targets != handles_.targets) {
    HandleSet next = handles_;
    next.targets = std::move(targets);
    DeformResult result = deform(system_, graph_, next, result_.positions);
    deformed_ = apply_lbs(cloud_, binding_, graph_, result);
    handles_ = std::move(next);
    result_ = std::move(result);
  } else if (revision_ == 0) {
    deformed_ = apply_lbs(cloud_, binding_, graph_, result_);
  }
  ++revision_;

  double residual = 0.0;
  for (std::size_t h = 0; h < handles_.size(); ++h)
    residual = std::max(residual, (result_.positions[handles_.indices[h]] - handles_.targets[h]).cwiseAbs().maxCoeff());

  std::vector<Reply> replies;
  replies.emplace_back(json{{"type", "update"},
                            {"seq", seq},
                            {"revision", revision_},
                            {"handle_residual", residual},
                            {"energy", result_.energy_trace.empty() ? 0.0 : result_.energy_trace.back()},
                            {"controls", points_json(result_.positions)}});
  replies.emplace_back(encode_update_frame(revision_, deformed_));
  return replies;
}

std::vector<Reply> Session::on_save(const json& msg) {
  if (stage_ == Stage::Empty) throw StateError("save before load");
  const auto path = read_field<std::string>(msg, "save", "path");
  save_ply_file(path, deformed_);
  return single({{"type", "saved"}, {"path", path}, {"count", deformed_.size()}});
}

}  // namespace gsd::service
