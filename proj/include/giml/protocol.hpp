#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "giml/document.hpp"
#include "giml/engine.hpp"

namespace giml::protocol {

inline constexpr int kVersion = 1;

/// Every message is one JSON object {"type": ..., "seq": n, "body": {...}}.
/// Server to client: hello, document_summary, frame, event, error, bye.
/// Client to server: input, key, control.

std::string frame_json(const RenderFrame& f);
std::string event_json(const EngineEvent& e);

std::string hello(std::uint64_t seq, const Engine& engine);
std::string document_summary(std::uint64_t seq, const Engine& engine, const GimlDocument& doc);
std::string frame(std::uint64_t seq, const RenderFrame& f);
std::string event(std::uint64_t seq, const EngineEvent& e);
std::string error(std::uint64_t seq, std::string_view message, std::optional<std::uint64_t> in_reply_to = {});
std::string bye(std::uint64_t seq, std::string_view reason);

struct ClientMessage {
  enum class Type : std::uint8_t { input, key, control, invalid };
  Type type = Type::invalid;
  std::uint64_t seq = 0;
  std::optional<long long> client_t_ms;
  GazePoint gaze;
  std::optional<double> pupil;
  std::string key;
  std::string action;  // control: pause, stop
  std::string error;   // set when type is invalid
  std::string raw_type;
};

ClientMessage parse_client(std::string_view text);

/// Client-side builders, used by tests and tools.
std::string input(std::uint64_t seq, long long client_t_ms, double x, double y, bool valid = true);
std::string key(std::uint64_t seq, std::string_view key);
std::string control(std::uint64_t seq, std::string_view action);

}  // namespace giml::protocol
