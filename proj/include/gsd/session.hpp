#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

#include "gsd/arap.hpp"
#include "gsd/deform_graph.hpp"
#include "gsd/skinning.hpp"
#include "gsd/splat_io.hpp"

namespace gsd::service {

inline constexpr int kProtocolVersion = 1;

/// One outgoing message: a JSON control message or a binary update frame.
using Reply = std::variant<nlohmann::json, std::vector<std::uint8_t>>;

/// Editing state behind one client connection.
///
/// Messages advance a state machine load -> sample -> set_handles -> drag*.
/// Every reply to a message that cannot be applied is a single
/// {"type":"error","code":...,"detail":...} and leaves the state untouched.
/// Error codes: bad_state, protocol, parse, io, format, argument, numeric.
class Session {
 public:
  enum class Stage { Empty, Loaded, Sampled, Ready };

  std::vector<Reply> handle_message(const nlohmann::json& msg);
  /// Parses `text` as JSON first; invalid JSON yields a parse error reply.
  std::vector<Reply> handle_text(std::string_view text);

  Stage stage() const { return stage_; }
  std::uint64_t revision() const { return revision_; }
  const GaussianCloud& cloud() const { return cloud_; }
  const GaussianCloud& deformed() const { return deformed_; }
  const ControlGraph& graph() const { return graph_; }
  const SkinBinding& binding() const { return binding_; }
  const HandleSet& handles() const { return handles_; }
  const DeformResult& last_result() const { return result_; }

 private:
  std::vector<Reply> on_load(const nlohmann::json& msg);
  std::vector<Reply> on_sample(const nlohmann::json& msg);
  std::vector<Reply> on_set_handles(const nlohmann::json& msg);
  std::vector<Reply> on_drag(const nlohmann::json& msg);
  std::vector<Reply> on_save(const nlohmann::json& msg);

  Stage stage_ = Stage::Empty;
  std::uint64_t revision_ = 0;
  GaussianCloud cloud_;
  GaussianCloud deformed_;
  ControlGraph graph_;
  SkinBinding binding_;
  HandleSet handles_;
  FactorizedSystem system_;
  DeformResult result_;
};

nlohmann::json error_reply(std::string_view code, std::string_view detail);

/// Of every run of consecutive queued drags only the last is kept, so a
/// backlog is answered with the newest sequence number.
void coalesce_drags(std::deque<nlohmann::json>& queue);

}  // namespace gsd::service
