#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "giml/document.hpp"
#include "giml/session.hpp"

namespace giml {

struct ServeOptions {
  std::string bind = "127.0.0.1:7420";  // host:port; port 0 picks a free one
  RunOptions run;
  std::optional<std::filesystem::path> out_dir;  // CSV logs are written here on stop
  std::function<void(unsigned short port)> on_listening;
  const std::atomic<bool>* cancel = nullptr;  // checked between ticks and while waiting for a client
  CallbackRegistry callbacks;
};

/// Runs one live session: accepts a single player at a time, streams hello,
/// document_summary, frames and events, and consumes input/key/control
/// messages. Connections whose first bytes are "GET " are upgraded to
/// WebSocket text frames; others use 4-byte big-endian length prefixes.
/// While no client is connected the engine clock does not advance.
/// Returns 0 after a stop (control, Escape or cancel), 2 when binding fails.
int serve(const GimlDocument& doc, const ServeOptions& options);

/// Minimal length-prefixed client for tests and tools.
class ProtocolClient {
 public:
  ProtocolClient() = default;
  ~ProtocolClient();
  ProtocolClient(const ProtocolClient&) = delete;
  ProtocolClient& operator=(const ProtocolClient&) = delete;

  bool connect(const std::string& host, unsigned short port, std::chrono::milliseconds timeout);
  bool send(std::string_view message);
  /// Next message, or nullopt on timeout or closed connection.
  std::optional<std::string> receive(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

namespace ws {
/// Sec-WebSocket-Accept value for a client key.
std::string accept_key(std::string_view client_key);
}  // namespace ws

}  // namespace giml
