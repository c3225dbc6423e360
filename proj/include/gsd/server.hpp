#pragma once

#include <cstdint>
#include <memory>
#include <string>

namespace gsd::service {

/// WebSocket transport for Session: one session per connection. Text frames
/// carry JSON control messages, binary frames carry update frames. Each
/// connection handles messages serially on its own worker and drops drags
/// superseded by a newer queued drag.
class Server {
 public:
  /// Binds immediately; port 0 picks a free port.
  Server(const std::string& address, std::uint16_t port);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const;
  /// Serves until stop() is called.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace gsd::service
