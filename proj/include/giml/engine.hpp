#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "giml/document.hpp"
#include "giml/values.hpp"

namespace giml {

enum class RegionState : std::uint8_t { normal, activated, reacting };
std::string_view to_string(RegionState s);

enum class EventKind : std::uint8_t {
  scene_entered,
  scene_left,
  region_activated,
  reaction_started,
  reaction_finished,
  returned_to_normal,
  region_enabled,
  region_disabled,
  tag_emitted,
  delayed_tag_emitted,
  list_switched_over,
  list_exhausted,
  callback_invoked,
  blackout_on,
  blackout_off,
  move_completed,
  engine_stopped,
  warning
};
/// CamelCase names used in logs and on the wire ("SceneEntered", ...).
std::string_view to_string(EventKind k);
std::optional<EventKind> parse_event_kind(std::string_view s);

struct EngineEvent {
  long long t_ms = 0;
  EventKind kind = EventKind::warning;
  std::string scene;
  std::string region;
  std::string payload;
  bool operator==(const EngineEvent&) const = default;
};

struct GazePoint {
  double x = 0;
  double y = 0;
  bool valid = true;
  bool operator==(const GazePoint&) const = default;
};

struct InputTick {
  long long t_ms = 0;
  std::optional<GazePoint> gaze;  // missing or invalid gaze is outside every region
  std::vector<std::string> keys;  // "Escape" stops the run, "Pause" opens the pause scene
};

struct EngineConfig {
  long long dwell_ms = 1000;
  long long tick_ms = 10;
  std::uint64_t seed = 0;
  bool strict = false;
  /// Single-play durations of sound and movie resources, by resource name.
  std::map<std::string, long long> media_durations_ms;
  long long default_media_ms = 2000;
  /// Resource names whose files the host could not find.
  std::set<std::string> missing_resources;
};

class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CallbackContext {
  std::string name;
  std::string scene;
  std::string region;
  std::string trigger;  // which on_* attribute fired
  long long t_ms = 0;
};

/// Host functions keyed by the names written in on_* attributes. Unregistered
/// names are only logged.
class CallbackRegistry {
 public:
  using Fn = std::function<void(const CallbackContext&)>;
  void add(std::string name, Fn fn) { fns_[fold_case(name)] = std::move(fn); }
  const Fn* find(std::string_view name) const {
    auto it = fns_.find(fold_case(name));
    return it == fns_.end() ? nullptr : &it->second;
  }

 private:
  std::map<std::string, Fn> fns_;
};

bool hit_test(Shape shape, double center_x, double center_y, double size_x, double size_y, double x,
              double y);

struct AnimationTransform {
  double scale = 1;
  double angle_deg = 0;
  double offset_x = 0;
  double offset_y = 0;
  bool operator==(const AnimationTransform&) const = default;
};

/// `amplitude` is a fraction of the region size when `relative`, otherwise pixels.
/// Rotations ignore it. A non-positive period yields the identity.
AnimationTransform animation_transform(AnimationType type, double amplitude, bool relative, double period_ms,
                                       double t_ms, double size_x, double size_y);

/// Offset reached after travelling `distance` along a path of relative steps.
std::pair<double, double> move_offset(const std::vector<MoveStep>& path, double distance);
double path_length(const std::vector<MoveStep>& path);

struct RegionRender {
  std::string name;
  Shape shape = Shape::rectangle;
  RegionState state = RegionState::normal;
  double center_x = 0;
  double center_y = 0;
  double size_x = 0;
  double size_y = 0;
  AnimationTransform transform;
  bool animate_region = true;
  bool animate_image = true;
  std::string image;
  bool image_missing = false;
  double image_offset_x = 0;
  double image_offset_y = 0;
  std::optional<double> image_size_x;
  std::optional<double> image_size_y;
  std::string text;
  std::string font;
  double font_size = 12;
  FontStyle font_style;
  std::string font_color;
  double text_offset_x = 0;
  double text_offset_y = 0;
  bool border = false;
  double border_width = 0;
  std::string border_color;
  double activation_progress = 0;
  double bar_offset_x = 0;
  double bar_offset_y = 0;
  bool operator==(const RegionRender&) const = default;
};

struct RenderFrame {
  std::uint64_t frame_seq = 0;
  long long t_ms = 0;  // time of the last content change
  std::string scene;
  std::string background_color;
  std::string background_image;
  bool background_image_missing = false;
  std::vector<RegionRender> regions;  // enabled regions only, declaration order
  bool blackout = false;
  long long blackout_degree = 0;
  std::string blackout_color;
  std::string blackout_region;
  bool spotlight = false;
  double spotlight_radius = 0;
  std::optional<GazePoint> spotlight_center;
  std::vector<std::string> sounds;  // virtual playbacks running now
  bool operator==(const RenderFrame&) const = default;
};

struct RegionSnapshot {
  std::string scene;
  std::string region;
  RegionState state = RegionState::normal;
  long long dwell_accum_ms = 0;
  bool enabled = true;
  double center_x = 0;
  double center_y = 0;
  bool operator==(const RegionSnapshot&) const = default;
};

/// Tick-driven interpreter of one document. Single-threaded: all calls must
/// come from one owner.
class Engine {
 public:
  Engine(const GimlDocument& doc, EngineConfig config, CallbackRegistry callbacks = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Events produced while entering the default scene at t = 0.
  const std::vector<EngineEvent>& initial_events() const;
  /// Advance to `input.t_ms`. Throws std::invalid_argument when time does not
  /// increase. Returns the events of this tick in order.
  std::vector<EngineEvent> step(const InputTick& input);
  /// Navigate to the pause scene, if one is declared.
  std::vector<EngineEvent> pause(long long t_ms);
  /// End the run; further steps return nothing.
  std::vector<EngineEvent> stop(long long t_ms, std::string_view reason = "stop");
  bool stopped() const;

  const RenderFrame& current_frame() const;
  const std::string& current_scene() const;
  long long now() const;
  const EngineConfig& config() const;
  double extent_x() const;
  double extent_y() const;
  const ListBank& lists() const;
  /// Scenes after template merge with random sites drawn.
  const std::vector<SceneDecl>& scenes() const;
  std::vector<RegionSnapshot> snapshot() const;
  std::optional<RegionSnapshot> region(std::string_view scene, std::string_view region) const;
  const std::optional<std::string>& library() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace giml
