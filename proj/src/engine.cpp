#include "giml/engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace giml {

namespace {

constexpr std::array<std::string_view, 18> kEventNames{
    "SceneEntered",      "SceneLeft",       "RegionActivated", "ReactionStarted",  "ReactionFinished",
    "ReturnedToNormal",  "RegionEnabled",   "RegionDisabled",  "TagEmitted",       "DelayedTagEmitted",
    "ListSwitchedOver",  "ListExhausted",   "CallbackInvoked", "BlackoutOn",       "BlackoutOff",
    "MoveCompleted",     "EngineStopped",   "Warning"};

bool same_key(std::string_view a, std::string_view b) { return fold_case(a) == fold_case(b); }

std::string color_text(const std::string& raw, std::string_view fallback) {
  if (raw.empty()) return std::string(fallback);
  if (auto c = parse_color(raw)) return to_hex(*c);
  return raw;
}

}  // namespace

std::string_view to_string(RegionState s) {
  switch (s) {
    case RegionState::normal: return "normal";
    case RegionState::activated: return "activated";
    case RegionState::reacting: return "reacting";
  }
  return "normal";
}

std::string_view to_string(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }

std::optional<EventKind> parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  return std::nullopt;
}

bool hit_test(Shape shape, double cx, double cy, double sx, double sy, double x, double y) {
  const double dx = x - cx;
  const double dy = y - cy;
  switch (shape) {
    case Shape::rectangle:
      return std::abs(dx) <= sx / 2 && std::abs(dy) <= sy / 2;
    case Shape::circle:
      sx = sy = std::min(sx, sy);
      [[fallthrough]];
    case Shape::ellipse: {
      if (sx <= 0 || sy <= 0) return false;
      const double u = 2 * dx / sx;
      const double v = 2 * dy / sy;
      return u * u + v * v <= 1;
    }
  }
  return false;
}

AnimationTransform animation_transform(AnimationType type, double amplitude, bool relative, double period_ms,
                                       double t_ms, double size_x, double size_y) {
  AnimationTransform tr;
  if (type == AnimationType::none || !(period_ms > 0)) return tr;
  const double phase = t_ms / period_ms;
  const double wave = std::sin(2 * std::numbers::pi * phase);
  switch (type) {
    case AnimationType::none:
      break;
    case AnimationType::size_changing: {
      const double ref = std::min(size_x, size_y);
      const double a = relative ? amplitude : (ref > 0 ? amplitude / ref : 0);
      tr.scale = 1 + a * wave;
      break;
    }
    case AnimationType::rotation_cw:
      tr.angle_deg = std::fmod(360.0 * phase, 360.0);
      break;
    case AnimationType::rotation_ccw:
      tr.angle_deg = -std::fmod(360.0 * phase, 360.0);
      break;
    case AnimationType::swinging_horizontal:
      tr.offset_x = (relative ? amplitude * size_x : amplitude) * wave;
      break;
    case AnimationType::swinging_vertical:
      tr.offset_y = (relative ? amplitude * size_y : amplitude) * wave;
      break;
  }
  return tr;
}

double path_length(const std::vector<MoveStep>& path) {
  double total = 0;
  for (const auto& s : path) total += std::hypot(s.dx, s.dy);
  return total;
}

std::pair<double, double> move_offset(const std::vector<MoveStep>& path, double distance) {
  double x = 0;
  double y = 0;
  for (const auto& s : path) {
    const double len = std::hypot(s.dx, s.dy);
    if (distance >= len) {
      x += s.dx;
      y += s.dy;
      distance -= len;
      continue;
    }
    if (len > 0 && distance > 0) {
      x += s.dx * distance / len;
      y += s.dy * distance / len;
    }
    break;
  }
  return {x, y};
}

// ----------------------------------------------------------------------------

struct Engine::Impl {
  struct Move {
    double base_x = 0;
    double base_y = 0;
    long long start = 0;
    const std::vector<MoveStep>* path = nullptr;
    double speed = 0;
    double total = 0;
  };

  struct RegionRt {
    const RegionDecl* decl = nullptr;
    RegionState state = RegionState::normal;
    long long dwell = 0;
    bool enabled = true;
    bool ever_disabled = false;
    std::optional<long long> enable_at;
    std::optional<long long> disable_at;
    long long state_since = 0;
    std::optional<long long> reaction_started;
    std::optional<long long> reaction_sound_end;
    double off_x = 0;
    double off_y = 0;
    std::optional<Move> move;
    std::optional<std::string> held_transition;
    bool auto_fired = false;
  };

  struct Playback {
    std::string name;
    long long start = 0;
    long long end = 0;
  };

  struct SceneRt {
    const SceneDecl* decl = nullptr;
    std::vector<RegionRt> regions;
    long long entered_at = 0;
    bool visited = false;
    bool blackout = false;
    std::string blackout_region;
    std::vector<Playback> playbacks;
  };

  struct DelayedTag {
    long long due = 0;
    std::string scene;
    std::string region;
    std::string tag;
  };

  struct Transition {
    std::string target;
    std::string region;
  };

  GimlDocument doc;
  EngineConfig config;
  CallbackRegistry callbacks;
  Rng rng;
  std::vector<SceneDecl> scenes;
  ListBank lists;
  std::map<std::string, SceneRt, std::less<>> runtimes;
  std::string current;
  long long now = 0;
  std::optional<long long> last_tick;
  bool is_stopped = false;
  double ex = 1024;
  double ey = 768;
  std::optional<GazePoint> last_gaze;
  std::vector<DelayedTag> delayed;
  std::vector<Transition> transitions;
  std::set<std::string> warned;
  std::vector<EngineEvent> initial;
  std::vector<EngineEvent>* out = nullptr;
  RenderFrame frame;

  Impl(const GimlDocument& d, EngineConfig cfg, CallbackRegistry cbs)
      : doc(d), config(std::move(cfg)), callbacks(std::move(cbs)), rng(config.seed) {
    if (config.dwell_ms <= 0) throw std::invalid_argument("dwell_ms must be positive");
    if (config.tick_ms <= 0) throw std::invalid_argument("tick_ms must be positive");
    if (doc.scenes_header.screen_x && *doc.scenes_header.screen_x > 0) ex = static_cast<double>(*doc.scenes_header.screen_x);
    if (doc.scenes_header.screen_y && *doc.scenes_header.screen_y > 0) ey = static_cast<double>(*doc.scenes_header.screen_y);
    scenes = merged_scenes(doc);
    freeze_all();
    lists = ListBank(doc);
    for (const auto& s : scenes) runtimes[s.name].decl = &s;
    if (!runtimes.count(doc.scenes_header.default_scene))
      throw EngineError("default scene '" + doc.scenes_header.default_scene + "' is not defined");
    if (config.strict) check_strict();

    out = &initial;
    for (const auto& name : config.missing_resources) warn_once("missing:" + name, "", "", "resource '" + name + "' is missing; a placeholder is used");
    enter_scene(doc.scenes_header.default_scene);
    refresh_frame();
    frame.frame_seq = 1;
    frame.t_ms = 0;
    out = nullptr;
  }

  // ---------------------------------------------------------------- setup

  void freeze_all() {
    auto f = [this](std::optional<AttrValue>& v, ValueKind kind) {
      if (v) v->expr = freeze(v->expr, kind, rng);
    };
    auto overlay = [&](StateOverlay& o) {
      f(o.border_width, ValueKind::real);
      f(o.border_color, ValueKind::color);
      f(o.name_of_image, ValueKind::name);
      f(o.name_of_sound, ValueKind::name);
      f(o.speed, ValueKind::real);
      f(o.animation_amplitude, ValueKind::real);
      f(o.animation_period_ms, ValueKind::integer);
      f(o.text, ValueKind::text);
      f(o.font, ValueKind::text);
      f(o.font_size, ValueKind::real);
      f(o.font_color, ValueKind::color);
    };
    for (auto& s : scenes) {
      f(s.background_color, ValueKind::color);
      f(s.background_image, ValueKind::name);
      f(s.background_sound, ValueKind::name);
      f(s.blackout_color, ValueKind::color);
      f(s.spotlight_radius, ValueKind::real);
      for (auto& r : s.regions) {
        for (auto* v : {&r.center_x, &r.center_y, &r.size_x, &r.size_y, &r.image_offset_x, &r.image_offset_y,
                        &r.image_size_x, &r.image_size_y, &r.text_offset_x, &r.text_offset_y, &r.bar_offset_x,
                        &r.bar_offset_y})
          f(*v, ValueKind::real);
        overlay(r.base);
        if (r.activation) overlay(*r.activation);
        if (r.reaction) overlay(*r.reaction);
      }
    }
  }

  bool image_known(const std::string& name) const {
    return (doc.find_image(name) || doc.find_movie(name)) && !config.missing_resources.count(name);
  }

  void check_strict() {
    if (!config.missing_resources.empty())
      throw EngineError("resource '" + *config.missing_resources.begin() + "' is missing");
    auto literal = [](const std::optional<AttrValue>& v) -> std::optional<std::string> {
      if (!v) return std::nullopt;
      if (auto l = std::get_if<expr::Literal>(&v->expr)) return fold_case(l->text);
      return std::nullopt;
    };
    for (const auto& s : scenes) {
      auto check_image = [&](const std::optional<AttrValue>& v) {
        if (auto n = literal(v); n && !image_known(*n)) throw EngineError("image '" + *n + "' is not declared");
      };
      auto check_sound = [&](const std::optional<AttrValue>& v) {
        if (auto n = literal(v); n && !doc.find_sound(*n) && !doc.find_movie(*n))
          throw EngineError("sound '" + *n + "' is not declared");
      };
      check_image(s.background_image);
      check_sound(s.background_sound);
      for (const auto& r : s.regions) {
        for (const StateOverlay* o : {&r.base, r.activation ? &*r.activation : nullptr, r.reaction ? &*r.reaction : nullptr}) {
          if (!o) continue;
          check_image(o->name_of_image);
          check_sound(o->name_of_sound);
        }
      }
    }
  }

  // ---------------------------------------------------------------- values

  MaterializeContext ctx() const { return MaterializeContext{ex, ey, &lists}; }

  double num(const std::optional<AttrValue>& v, double def) const {
    if (!v) return def;
    return materialize(v->expr, ctx()).number.value_or(def);
  }

  std::string text(const std::optional<AttrValue>& v, std::string def = {}) const {
    if (!v) return def;
    return materialize(v->expr, ctx()).text;
  }

  // ---------------------------------------------------------------- events

  void emit(EventKind kind, std::string scene, std::string region = {}, std::string payload = {}) {
    if (out) out->push_back(EngineEvent{now, kind, std::move(scene), std::move(region), std::move(payload)});
  }

  void warn(const std::string& scene, const std::string& region, std::string message) {
    emit(EventKind::warning, scene, region, std::move(message));
  }

  void warn_once(const std::string& key, const std::string& scene, const std::string& region, std::string message) {
    if (warned.insert(key).second) warn(scene, region, std::move(message));
  }

  void invoke(const std::optional<std::string>& name, std::string_view trigger, const std::string& scene,
              const std::string& region) {
    if (!name || name->empty()) return;
    emit(EventKind::callback_invoked, scene, region, *name);
    if (const auto* fn = callbacks.find(*name)) {
      try {
        (*fn)(CallbackContext{*name, scene, region, std::string(trigger), now});
      } catch (const std::exception& e) {
        warn(scene, region, "callback '" + *name + "' failed: " + e.what());
      }
    }
  }

  // ---------------------------------------------------------------- regions

  RegionRt fresh(const RegionDecl& d) const {
    RegionRt r;
    r.decl = &d;
    r.enabled = d.enabled;
    r.state_since = now;
    return r;
  }

  SceneRt& scene_rt() { return runtimes.find(current)->second; }

  RegionRt* find_region(SceneRt& s, std::string_view name) {
    for (auto& r : s.regions)
      if (r.decl->name == name) return &r;
    return nullptr;
  }

  long long dwell_threshold(const RegionRt& r) const {
    return r.decl->dwell_time_ms && *r.decl->dwell_time_ms > 0 ? *r.decl->dwell_time_ms : config.dwell_ms;
  }

  struct Geometry {
    double cx, cy, sx, sy;
  };

  Geometry geometry(const RegionRt& r) const {
    const auto& d = *r.decl;
    return {num(d.center_x, 0) + r.off_x, num(d.center_y, 0) + r.off_y, num(d.size_x, 0), num(d.size_y, 0)};
  }

  /// The sub-element that defines a state, or null when the region does not declare one.
  static const StateOverlay* declared(const RegionRt& r, RegionState s) {
    switch (s) {
      case RegionState::normal: return &r.decl->base;
      case RegionState::activated: return r.decl->activation ? &*r.decl->activation : nullptr;
      case RegionState::reacting: return r.decl->reaction ? &*r.decl->reaction : nullptr;
    }
    return nullptr;
  }

  static const StateOverlay& visual(const RegionRt& r) {
    const auto* o = declared(r, r.state);
    return o ? *o : r.decl->base;
  }

  long long media_duration(const std::string& name, const std::string& scene, const std::string& region) {
    long long single = config.default_media_ms;
    if (auto it = config.media_durations_ms.find(name); it != config.media_durations_ms.end()) {
      single = it->second;
    } else {
      warn_once("duration:" + name, scene, region,
                "no duration known for '" + name + "'; assuming " + std::to_string(config.default_media_ms) + " ms");
    }
    long long reps = 1;
    if (const auto* s = doc.find_sound(name)) reps = s->repetition_number;
    else if (const auto* m = doc.find_movie(name)) reps = m->repetition_number;
    return single * std::max(1LL, reps);
  }

  std::optional<long long> start_sound(SceneRt& s, const std::optional<AttrValue>& v, const std::string& region) {
    if (!v) return std::nullopt;
    const auto name = fold_case(text(v));
    if (name.empty()) return std::nullopt;
    if (!doc.find_sound(name) && !doc.find_movie(name)) {
      warn_once("sound:" + name, s.decl->name, region, "sound '" + name + "' is not declared");
      return std::nullopt;
    }
    if (config.missing_resources.count(name)) return std::nullopt;
    const long long end = now + media_duration(name, s.decl->name, region);
    s.playbacks.push_back(Playback{name, now, end});
    return end;
  }

  void request_enable(SceneRt& s, std::string_view name) {
    auto* r = find_region(s, name);
    if (!r) return;
    r->disable_at.reset();
    if (r->enabled) return;
    if (r->decl->enabling_delay_ms > 0) {
      if (!r->enable_at) r->enable_at = now + r->decl->enabling_delay_ms;
      return;
    }
    enable(s, *r);
  }

  void request_disable(SceneRt& s, std::string_view name) {
    auto* r = find_region(s, name);
    if (!r) return;
    r->enable_at.reset();
    if (!r->enabled) return;
    if (r->decl->disabling_delay_ms > 0) {
      if (!r->disable_at) r->disable_at = now + r->decl->disabling_delay_ms;
      return;
    }
    disable(s, *r);
  }

  void enable(SceneRt& s, RegionRt& r) {
    r.enable_at.reset();
    if (r.enabled) return;
    if (r.decl->reset_after_enabled && r.ever_disabled) {
      const bool ever = r.ever_disabled;
      r = fresh(*r.decl);
      r.ever_disabled = ever;
    }
    r.enabled = true;
    r.state_since = now;
    emit(EventKind::region_enabled, s.decl->name, r.decl->name);
  }

  void force_normal(SceneRt& s, RegionRt& r, std::string_view why) {
    const auto& scene = s.decl->name;
    const auto& name = r.decl->name;
    if (r.state == RegionState::reacting) {
      emit(EventKind::reaction_finished, scene, name, std::string(why));
      end_blackout(s, r);
      emit(EventKind::returned_to_normal, scene, name);
    } else if (r.state == RegionState::activated) {
      emit(EventKind::returned_to_normal, scene, name);
    }
    r.state = RegionState::normal;
    r.dwell = 0;
    r.reaction_started.reset();
    r.reaction_sound_end.reset();
    r.held_transition.reset();
    r.state_since = now;
  }

  void disable(SceneRt& s, RegionRt& r) {
    r.disable_at.reset();
    if (!r.enabled) return;
    force_normal(s, r, "disabled");
    r.enabled = false;
    r.ever_disabled = true;
    emit(EventKind::region_disabled, s.decl->name, r.decl->name);
    const auto& target = s.decl->region_enabled_after_all_disabled;
    if (target && std::none_of(s.regions.begin(), s.regions.end(), [](const RegionRt& x) { return x.enabled; }))
      request_enable(s, *target);
  }

  void reset_region(SceneRt& s, RegionRt& r) {
    force_normal(s, r, "reset");
    const bool was_enabled = r.enabled;
    r = fresh(*r.decl);
    if (was_enabled != r.enabled)
      emit(r.enabled ? EventKind::region_enabled : EventKind::region_disabled, s.decl->name, r.decl->name);
  }

  void end_blackout(SceneRt& s, const RegionRt& r) {
    if (s.blackout && s.blackout_region == r.decl->name) {
      s.blackout = false;
      s.blackout_region.clear();
      emit(EventKind::blackout_off, s.decl->name, r.decl->name);
    }
  }

  void start_blackout(SceneRt& s, RegionRt& r) {
    if (!r.decl->able_to_activate_blackout || s.blackout) return;
    s.blackout = true;
    s.blackout_region = r.decl->name;
    emit(EventKind::blackout_on, s.decl->name, r.decl->name);
    if (s.decl->blocking_regions_during_blackout.value_or(false))
      for (auto& other : s.regions)
        if (&other != &r && other.state == RegionState::activated) force_normal(s, other, "blackout");
  }

  void started_effects(SceneRt& s, RegionRt& r, const StateOverlay& o) {
    const auto& scene = s.decl->name;
    const auto& name = r.decl->name;
    if (o.tag && !o.tag->empty()) emit(EventKind::tag_emitted, scene, name, *o.tag);
    if (o.delayed_tag && !o.delayed_tag->empty()) {
      const long long delay = o.delay_of_delayed_tag_ms.value_or(0);
      if (delay == 0) emit(EventKind::delayed_tag_emitted, scene, name, *o.delayed_tag);
      else if (delay > 0) delayed.push_back(DelayedTag{now + delay, scene, name, *o.delayed_tag});
    }
    for (const auto& n : o.regions_enabled_when_started) request_enable(s, n);
    for (const auto& n : o.regions_disabled_when_started) request_disable(s, n);
  }

  void finished_effects(SceneRt& s, RegionRt& r, const StateOverlay& o) {
    for (const auto& n : o.regions_enabled_when_finished) request_enable(s, n);
    for (const auto& n : o.regions_disabled_when_finished) request_disable(s, n);
    if (o.turn_off_when_finished) request_disable(s, r.decl->name);
  }

  void apply_action(SceneRt& s, RegionRt& r, const StateOverlay& o) {
    const auto& scene = s.decl->name;
    const auto& name = r.decl->name;
    switch (o.action_type) {
      case ActionType::none:
      case ActionType::border:
        break;
      case ActionType::transition_to_scene:
        if (o.name_of_target_scene.empty()) break;
        if (r.state == RegionState::reacting && r.decl->hold_scene_transition)
          r.held_transition = o.name_of_target_scene;
        else
          transitions.push_back(Transition{o.name_of_target_scene, name});
        break;
      case ActionType::move: {
        Move m;
        m.base_x = r.off_x;
        m.base_y = r.off_y;
        m.start = now;
        m.path = &o.move_path;
        m.speed = num(o.speed, 0);
        m.total = path_length(o.move_path);
        if (m.speed <= 0) {
          warn(scene, name, "move speed is not positive; jumping to the end of the path");
          const auto [dx, dy] = move_offset(o.move_path, m.total);
          r.off_x = m.base_x + dx;
          r.off_y = m.base_y + dy;
          r.move.reset();
          emit(EventKind::move_completed, scene, name);
        } else {
          r.move = m;
        }
        break;
      }
      case ActionType::reset_region:
        reset_region(s, r);
        break;
      case ActionType::reset_scene:
        for (auto& x : s.regions) reset_region(s, x);
        break;
    }
  }

  /// Moves a region along one edge of the region state diagram and applies every side effect.
  void transition(SceneRt& s, RegionRt& r, RegionState next, std::string_view payload = {}) {
    const auto& scene = s.decl->name;
    const auto name = r.decl->name;
    const auto& d = *r.decl;
    const RegionState prev = r.state;
    const StateOverlay* leaving = declared(r, prev);

    r.state = next;
    r.state_since = now;
    switch (next) {
      case RegionState::activated:
        r.dwell = 0;
        emit(EventKind::region_activated, scene, name);
        invoke(d.on_activation_completed, "onActivationCompleted", scene, name);
        break;
      case RegionState::reacting:
        r.dwell = dwell_threshold(r);
        r.reaction_started = now;
        emit(EventKind::reaction_started, scene, name, std::string(payload));
        invoke(d.on_reaction_started, "onReactionStarted", scene, name);
        break;
      case RegionState::normal:
        r.dwell = 0;
        if (prev == RegionState::reacting) {
          emit(EventKind::reaction_finished, scene, name, std::string(payload));
          invoke(d.on_reaction_finished, "onReactionFinished", scene, name);
        }
        emit(EventKind::returned_to_normal, scene, name);
        invoke(d.on_normal_state_return, "onNormalStateReturn", scene, name);
        break;
    }
    invoke(d.on_state_changed, "onStateChanged", scene, name);

    if (leaving) finished_effects(s, r, *leaving);
    if (prev == RegionState::reacting) {
      end_blackout(s, r);
      r.reaction_started.reset();
      r.reaction_sound_end.reset();
      if (r.held_transition) {
        transitions.push_back(Transition{*r.held_transition, name});
        r.held_transition.reset();
      }
    }

    // A finished-effect may have disabled the region.
    if (!r.enabled || r.state != next) return;
    const StateOverlay* entering = declared(r, next);
    if (!entering) {
      if (next == RegionState::reacting) start_blackout(s, r);
      return;
    }
    auto sound_end = start_sound(s, entering->name_of_sound, name);
    if (next == RegionState::reacting) {
      r.reaction_sound_end = sound_end;
      start_blackout(s, r);
    }
    started_effects(s, r, *entering);
    if (next != RegionState::normal && r.enabled && r.state == next) apply_action(s, r, *entering);
  }

  bool completion_holds(SceneRt& s, RegionRt& r) {
    switch (r.decl->completion) {
      case CompletionCondition::region_leave:
        return true;
      case CompletionCondition::sound_ending:
        if (!r.reaction_sound_end) {
          warn_once("nosound:" + s.decl->name + "/" + r.decl->name, s.decl->name, r.decl->name,
                    "reaction completes on sound ending but no reaction sound plays");
          return true;
        }
        return now >= *r.reaction_sound_end;
      case CompletionCondition::time_elapsed: {
        const long long dur = std::max(0LL, r.decl->reaction_duration_ms.value_or(0));
        return now - r.reaction_started.value_or(now) >= dur;
      }
    }
    return true;
  }

  /// Auto reactions and reaction keys pass through the activated state so
  /// that only state-diagram edges occur.
  void force_reaction(SceneRt& s, RegionRt& r, std::string_view trigger) {
    if (r.state == RegionState::reacting) return;
    if (r.state == RegionState::normal) transition(s, r, RegionState::activated);
    if (r.enabled && r.state == RegionState::activated) transition(s, r, RegionState::reacting, trigger);
  }

  void update_region(SceneRt& s, RegionRt& r, long long elapsed, const InputTick& in) {
    if (!r.enabled) return;
    if (s.blackout && s.blackout_region != r.decl->name && s.decl->blocking_regions_during_blackout.value_or(false))
      return;
    const auto& d = *r.decl;
    if (d.automatic_reaction_after_ms >= 0 && !r.auto_fired && now - s.entered_at >= d.automatic_reaction_after_ms) {
      r.auto_fired = true;
      if (r.state != RegionState::reacting) {
        force_reaction(s, r, "auto");
        return;
      }
    }
    if (d.reaction_key && r.state != RegionState::reacting &&
        std::any_of(in.keys.begin(), in.keys.end(), [&](const std::string& k) { return same_key(k, *d.reaction_key); })) {
      force_reaction(s, r, "key");
      return;
    }

    bool inside = false;
    if (!d.ignore_gaze && in.gaze && in.gaze->valid) {
      const auto g = geometry(r);
      inside = hit_test(d.shape, g.cx, g.cy, g.sx, g.sy, in.gaze->x, in.gaze->y);
    }
    switch (r.state) {
      case RegionState::normal:
        if (inside) transition(s, r, RegionState::activated);
        break;
      case RegionState::activated:
        if (!inside) {
          transition(s, r, RegionState::normal);
          break;
        }
        r.dwell = std::min(r.dwell + elapsed, dwell_threshold(r));
        if (r.dwell >= dwell_threshold(r)) transition(s, r, RegionState::reacting, "gaze");
        break;
      case RegionState::reacting:
        if (!inside && completion_holds(s, r))
          transition(s, r, RegionState::normal, to_string(d.completion));
        break;
    }
  }

  void update_moves(SceneRt& s) {
    for (auto& r : s.regions) {
      if (!r.move) continue;
      const auto& m = *r.move;
      const double dist = m.speed * static_cast<double>(now - m.start) / 1000.0;
      const auto [dx, dy] = move_offset(*m.path, std::min(dist, m.total));
      r.off_x = m.base_x + dx;
      r.off_y = m.base_y + dy;
      if (dist >= m.total) {
        r.move.reset();
        emit(EventKind::move_completed, s.decl->name, r.decl->name);
      }
    }
  }

  // ---------------------------------------------------------------- scenes

  void enter_scene(const std::string& name) {
    auto& s = runtimes.find(name)->second;
    current = name;
    s.entered_at = now;
    emit(EventKind::scene_entered, name);
    if (!s.visited || s.decl->reset_after_enter.value_or(false)) {
      for (auto& r : s.regions) force_normal(s, r, "reset");
      s.regions.clear();
      for (const auto& rd : s.decl->regions) s.regions.push_back(fresh(rd));
      s.blackout = false;
      s.blackout_region.clear();
      s.playbacks.clear();
    }
    s.visited = true;
    for (auto& r : s.regions) r.auto_fired = false;
    invoke(s.decl->on_scene_changed, "onSceneChanged", name, "");
    start_sound(s, s.decl->background_sound, "");
    if (s.decl->regions_to_disable)
      for (const auto& n : *s.decl->regions_to_disable)
        if (auto* r = find_region(s, n)) disable(s, *r);
    if (s.decl->lists_switched_over_after_enter) {
      bool exhausted = false;
      for (const auto& ev : lists.switch_over(*s.decl->lists_switched_over_after_enter, rng)) {
        if (ev.kind == ListEvent::Kind::switched_over) {
          emit(EventKind::list_switched_over, name, "",
               ev.list + "[" + std::to_string(ev.index) + "]=" + ev.value);
        } else {
          emit(EventKind::list_exhausted, name, "", ev.list);
          exhausted = true;
        }
      }
      if (exhausted && s.decl->region_enabled_after_list_finished)
        request_enable(s, *s.decl->region_enabled_after_list_finished);
    }
  }

  void switch_scene(const std::string& target) {
    emit(EventKind::scene_left, current);
    enter_scene(target);
  }

  void process_transitions() {
    if (transitions.empty()) return;
    auto pending = std::move(transitions);
    transitions.clear();
    bool done = false;
    for (const auto& t : pending) {
      if (done) {
        warn(current, t.region, "transition to '" + t.target + "' dropped; another transition fired first");
        continue;
      }
      if (!runtimes.count(t.target)) {
        warn(current, t.region, "transition target '" + t.target + "' does not exist");
        continue;
      }
      switch_scene(t.target);
      done = true;
    }
  }

  // ---------------------------------------------------------------- frames

  std::string image_name(const std::optional<AttrValue>& v, bool& missing, const std::string& scene,
                         const std::string& region) {
    missing = false;
    if (!v) return {};
    auto name = fold_case(text(v));
    if (name.empty()) return name;
    if (!image_known(name)) {
      missing = true;
      warn_once("image:" + name, scene, region, "image '" + name + "' is not available; a placeholder is shown");
    }
    return name;
  }

  void refresh_frame() {
    auto& s = scene_rt();
    const auto& sd = *s.decl;
    RenderFrame f;
    f.frame_seq = frame.frame_seq;
    f.t_ms = frame.t_ms;
    f.scene = sd.name;
    f.background_color = color_text(text(sd.background_color), "");
    f.background_image = image_name(sd.background_image, f.background_image_missing, sd.name, "");
    for (const auto& r : s.regions) {
      if (!r.enabled) continue;
      const auto& d = *r.decl;
      const auto& o = visual(r);
      RegionRender rr;
      rr.name = d.name;
      rr.shape = d.shape;
      rr.state = r.state;
      const auto g = geometry(r);
      rr.center_x = g.cx;
      rr.center_y = g.cy;
      rr.size_x = g.sx;
      rr.size_y = g.sy;
      if (o.animation_type != AnimationType::none) {
        const double period = num(o.animation_period_ms, 0);
        if (period <= 0) {
          warn_once("period:" + sd.name + "/" + d.name, sd.name, d.name,
                    "animation period is not positive; animation disabled");
        } else {
          bool relative = false;
          double amplitude = 0;
          if (o.animation_amplitude) {
            if (auto p = std::get_if<expr::Percent>(&o.animation_amplitude->expr)) {
              relative = true;
              amplitude = p->fraction;
            } else {
              amplitude = num(o.animation_amplitude, 0);
            }
          }
          rr.transform = animation_transform(o.animation_type, amplitude, relative, period,
                                             static_cast<double>(now - r.state_since), g.sx, g.sy);
        }
      }
      rr.animate_region = d.region_animation_enabled;
      rr.animate_image = d.image_animation_enabled;
      rr.image = image_name(o.name_of_image, rr.image_missing, sd.name, d.name);
      rr.image_offset_x = num(d.image_offset_x, 0);
      rr.image_offset_y = num(d.image_offset_y, 0);
      if (d.image_size_x) rr.image_size_x = num(d.image_size_x, 0);
      if (d.image_size_y) rr.image_size_y = num(d.image_size_y, 0);
      rr.text = text(o.text);
      rr.font = text(o.font, "Arial");
      rr.font_size = num(o.font_size, 12);
      rr.font_style = o.font_style;
      rr.font_color = color_text(text(o.font_color), "#FF000000");
      rr.text_offset_x = num(d.text_offset_x, 0);
      rr.text_offset_y = num(d.text_offset_y, 0);
      if (o.action_type == ActionType::border) {
        rr.border = true;
        rr.border_width = num(o.border_width, 20);
        rr.border_color = color_text(text(o.border_color), "#FF000000");
      }
      if (r.state == RegionState::activated)
        rr.activation_progress = static_cast<double>(r.dwell) / static_cast<double>(dwell_threshold(r));
      else if (r.state == RegionState::reacting)
        rr.activation_progress = 1;
      rr.bar_offset_x = num(d.bar_offset_x, 0);
      rr.bar_offset_y = num(d.bar_offset_y, 0);
      f.regions.push_back(std::move(rr));
    }
    if (s.blackout) {
      f.blackout = true;
      f.blackout_degree = sd.blackout_degree.value_or(0);
      f.blackout_color = color_text(text(sd.blackout_color), "#FF000000");
      f.blackout_region = s.blackout_region;
    }
    const auto& h = doc.scenes_header;
    f.spotlight = sd.spotlight.value_or(h.spotlight.value_or(false));
    if (f.spotlight) {
      f.spotlight_radius = sd.spotlight_radius ? num(sd.spotlight_radius, 200) : num(h.spotlight_radius, 200);
      f.spotlight_center = last_gaze;
    }
    for (const auto& p : s.playbacks)
      if (p.start <= now && now < p.end) f.sounds.push_back(p.name);

    if (!(f == frame)) {
      f.frame_seq = frame.frame_seq + 1;
      f.t_ms = now;
      frame = std::move(f);
    }
  }

  // ---------------------------------------------------------------- ticks

  std::vector<EngineEvent> step(const InputTick& in) {
    std::vector<EngineEvent> events;
    if (is_stopped) return events;
    if (last_tick ? in.t_ms <= *last_tick : in.t_ms < 0)
      throw std::invalid_argument("tick at " + std::to_string(in.t_ms) + " ms does not advance the clock");
    const long long elapsed = in.t_ms - last_tick.value_or(0);
    last_tick = in.t_ms;
    now = in.t_ms;
    out = &events;
    if (in.gaze && in.gaze->valid) last_gaze = in.gaze;
    else last_gaze.reset();

    for (const auto& k : in.keys) {
      if (same_key(k, "Escape")) {
        do_stop("escape");
        out = nullptr;
        return events;
      }
    }
    if (std::any_of(in.keys.begin(), in.keys.end(), [](const std::string& k) { return same_key(k, "Pause"); }))
      do_pause();

    std::vector<DelayedTag> keep;
    for (auto& t : delayed) {
      if (now >= t.due) emit(EventKind::delayed_tag_emitted, t.scene, t.region, t.tag);
      else keep.push_back(std::move(t));
    }
    delayed = std::move(keep);

    auto& s = scene_rt();
    for (auto& r : s.regions) {
      if (r.enable_at && now >= *r.enable_at) enable(s, r);
      if (r.disable_at && now >= *r.disable_at) disable(s, r);
    }
    update_moves(s);
    for (auto& r : s.regions) update_region(s, r, elapsed, in);
    process_transitions();
    refresh_frame();
    out = nullptr;
    return events;
  }

  void do_pause() {
    const auto& p = doc.scenes_header.pause_scene;
    if (!p || !runtimes.count(*p) || current == *p) return;
    switch_scene(*p);
  }

  void do_stop(std::string_view reason) {
    if (is_stopped) return;
    for (const auto& sd : scenes) {
      auto& rt = runtimes.find(sd.name)->second;
      for (auto& r : rt.regions) force_normal(rt, r, "stopped");
    }
    emit(EventKind::engine_stopped, current, "", std::string(reason));
    is_stopped = true;
  }
};

Engine::Engine(const GimlDocument& doc, EngineConfig config, CallbackRegistry callbacks)
    : impl_(std::make_unique<Impl>(doc, std::move(config), std::move(callbacks))) {}

Engine::~Engine() = default;

const std::vector<EngineEvent>& Engine::initial_events() const { return impl_->initial; }

std::vector<EngineEvent> Engine::step(const InputTick& input) { return impl_->step(input); }

std::vector<EngineEvent> Engine::pause(long long t_ms) {
  std::vector<EngineEvent> events;
  if (impl_->is_stopped) return events;
  impl_->now = std::max(impl_->now, t_ms);
  impl_->out = &events;
  impl_->do_pause();
  impl_->refresh_frame();
  impl_->out = nullptr;
  return events;
}

std::vector<EngineEvent> Engine::stop(long long t_ms, std::string_view reason) {
  std::vector<EngineEvent> events;
  impl_->now = std::max(impl_->now, t_ms);
  impl_->out = &events;
  impl_->do_stop(reason);
  impl_->out = nullptr;
  return events;
}

bool Engine::stopped() const { return impl_->is_stopped; }
const RenderFrame& Engine::current_frame() const { return impl_->frame; }
const std::string& Engine::current_scene() const { return impl_->current; }
long long Engine::now() const { return impl_->now; }
const EngineConfig& Engine::config() const { return impl_->config; }
double Engine::extent_x() const { return impl_->ex; }
double Engine::extent_y() const { return impl_->ey; }
const ListBank& Engine::lists() const { return impl_->lists; }
const std::vector<SceneDecl>& Engine::scenes() const { return impl_->scenes; }
const std::optional<std::string>& Engine::library() const { return impl_->doc.settings.library; }

std::vector<RegionSnapshot> Engine::snapshot() const {
  std::vector<RegionSnapshot> out;
  for (const auto& sd : impl_->scenes) {
    const auto& s = impl_->runtimes.find(sd.name)->second;
    for (const auto& r : s.regions) {
      const auto g = impl_->geometry(r);
      out.push_back(RegionSnapshot{sd.name, r.decl->name, r.state, r.dwell, r.enabled, g.cx, g.cy});
    }
  }
  return out;
}

std::optional<RegionSnapshot> Engine::region(std::string_view scene, std::string_view region) const {
  auto it = impl_->runtimes.find(scene);
  if (it == impl_->runtimes.end()) return std::nullopt;
  for (const auto& r : it->second.regions) {
    if (r.decl->name != region) continue;
    const auto g = impl_->geometry(r);
    return RegionSnapshot{std::string(scene), r.decl->name, r.state, r.dwell, r.enabled, g.cx, g.cy};
  }
  return std::nullopt;
}

}  // namespace giml
