#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "hrcplan/session.hpp"

namespace hrc {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::string static_dir;      // UI bundle served under /; empty disables static hosting
  ManagerOptions manager;
};

/// HTTP + WebSocket front end of the session manager. One thread per
/// connection; the WebSocket stream at /sessions/{id}/stream[?from=seq] pushes
/// every frame with seq >= from, in order, and closes after the terminal frame.
class SandboxServer {
 public:
  explicit SandboxServer(ServerOptions opts);
  ~SandboxServer();
  SandboxServer(const SandboxServer&) = delete;
  SandboxServer& operator=(const SandboxServer&) = delete;

  /// Bound port (valid after construction).
  unsigned short port() const noexcept;
  SessionManager& manager() noexcept;
  /// Accepts connections until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hrc
