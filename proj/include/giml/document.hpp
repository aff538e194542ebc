#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "giml/diagnostics.hpp"
#include "giml/expr.hpp"
#include "giml/keywords.hpp"

namespace giml {

/// Where a declaration came from. Positions never take part in equality, so
/// documents that differ only in layout compare equal.
struct SourcePos {
  std::string path;
  std::size_t line = 0;
  std::size_t column = 0;
  friend bool operator==(const SourcePos&, const SourcePos&) { return true; }
};

/// Raw attribute text plus its parsed expression.
struct AttrValue {
  std::string raw;
  ValueExpr expr;
  bool operator==(const AttrValue&) const = default;
};

enum class ActionType : std::uint8_t { none, border, transition_to_scene, move, reset_region, reset_scene };
enum class AnimationType : std::uint8_t {
  none,
  size_changing,
  rotation_ccw,
  rotation_cw,
  swinging_horizontal,
  swinging_vertical
};
enum class Shape : std::uint8_t { rectangle, circle, ellipse };
enum class CompletionCondition : std::uint8_t { region_leave, sound_ending, time_elapsed };
enum class DrawMode : std::uint8_t { draw_no_returns, draw_with_returns, sequentially };
enum class ListElementType : std::uint8_t { strings, colors };

std::string_view to_string(ActionType v);
std::string_view to_string(AnimationType v);
std::string_view to_string(Shape v);
std::string_view to_string(CompletionCondition v);
std::string_view to_string(DrawMode v);
std::string_view to_string(ListElementType v);

struct FontStyle {
  bool italic = false;
  bool bold = false;
  bool underline = false;
  bool strikeout = false;
  bool operator==(const FontStyle&) const = default;
};

struct MoveStep {
  int dx = 0;
  int dy = 0;
  bool operator==(const MoveStep&) const = default;
};

struct SettingsInfo {
  std::optional<std::string> folder;
  Language language = Language::en;
  std::optional<std::string> library;  // surfaced to the host, never loaded
  bool operator==(const SettingsInfo&) const = default;
};

struct ImageDecl {
  std::string name;  // case-folded
  std::string path;
  std::optional<std::string> transparency_key;
  std::optional<long long> running_period_ms;
  std::optional<long long> run_from_frame;
  std::optional<long long> run_to_frame;  // -1 runs to the end
  bool keep_in_memory = false;
  SourcePos pos;
  bool operator==(const ImageDecl&) const = default;
};

struct SoundDecl {
  std::string name;
  std::string path;
  long long repetition_number = 1;
  bool in_background = false;
  double volume = 1.0;
  SourcePos pos;
  bool operator==(const SoundDecl&) const = default;
};

struct MovieDecl {
  std::string name;
  std::string path;
  long long repetition_number = 1;
  bool in_background = false;
  double volume = 1.0;
  std::optional<std::string> transparency_key;
  SourcePos pos;
  bool operator==(const MovieDecl&) const = default;
};

struct ListDecl {
  std::string name;
  ListElementType element_type = ListElementType::strings;
  std::vector<std::string> values;  // verbatim
  DrawMode drawing = DrawMode::draw_no_returns;
  bool drawing_explicit = false;
  std::optional<std::string> group;  // case-folded group label
  SourcePos pos;
  bool operator==(const ListDecl&) const = default;
};

struct ScenesHeader {
  std::string default_scene;
  std::optional<long long> screen_x;
  std::optional<long long> screen_y;
  std::optional<std::string> pause_scene;
  std::optional<bool> spotlight;
  std::optional<AttrValue> spotlight_radius;
  SourcePos pos;
  bool operator==(const ScenesHeader&) const = default;
};

/// Attributes shared by the normal state and the activation/reaction sub-elements.
/// Unset attributes fall back to the defaults, not to the region's base state.
struct StateOverlay {
  ActionType action_type = ActionType::none;
  std::optional<AttrValue> border_width;  // default 20
  std::optional<AttrValue> border_color;
  std::string name_of_target_scene;
  std::optional<AttrValue> name_of_image;
  std::optional<AttrValue> name_of_sound;
  std::vector<MoveStep> move_path;
  std::optional<AttrValue> speed;  // design px per second, default 0
  AnimationType animation_type = AnimationType::none;
  std::optional<AttrValue> animation_amplitude;
  std::optional<AttrValue> animation_period_ms;
  std::optional<std::string> tag;
  std::optional<std::string> delayed_tag;
  std::optional<long long> delay_of_delayed_tag_ms;
  std::optional<AttrValue> text;
  std::optional<AttrValue> font;
  std::optional<AttrValue> font_size;
  FontStyle font_style;
  std::optional<AttrValue> font_color;
  bool turn_off_when_finished = false;
  std::vector<std::string> regions_enabled_when_started;
  std::vector<std::string> regions_disabled_when_started;
  std::vector<std::string> regions_enabled_when_finished;
  std::vector<std::string> regions_disabled_when_finished;
  SourcePos pos;
  bool operator==(const StateOverlay&) const = default;
};

struct RegionDecl {
  std::string name;
  Shape shape = Shape::rectangle;
  std::optional<AttrValue> center_x;
  std::optional<AttrValue> center_y;
  std::optional<AttrValue> size_x;
  std::optional<AttrValue> size_y;
  bool enabled = true;
  std::optional<AttrValue> image_offset_x;
  std::optional<AttrValue> image_offset_y;
  std::optional<AttrValue> image_size_x;
  std::optional<AttrValue> image_size_y;
  std::optional<AttrValue> text_offset_x;
  std::optional<AttrValue> text_offset_y;
  std::optional<AttrValue> bar_offset_x;
  std::optional<AttrValue> bar_offset_y;
  bool region_animation_enabled = true;
  bool image_animation_enabled = true;
  CompletionCondition completion = CompletionCondition::region_leave;
  std::optional<long long> reaction_duration_ms;
  bool hold_scene_transition = false;
  long long automatic_reaction_after_ms = -1;
  bool able_to_activate_blackout = false;
  bool reset_after_enabled = false;
  bool ignore_gaze = false;
  long long enabling_delay_ms = 0;
  long long disabling_delay_ms = 0;
  std::optional<std::string> reaction_key;
  std::optional<long long> dwell_time_ms;  // per-region dwell override
  std::optional<std::string> on_activation_completed;
  std::optional<std::string> on_reaction_started;
  std::optional<std::string> on_reaction_finished;
  std::optional<std::string> on_normal_state_return;
  std::optional<std::string> on_state_changed;
  StateOverlay base;
  std::optional<StateOverlay> activation;
  std::optional<StateOverlay> reaction;
  SourcePos pos;
  bool operator==(const RegionDecl&) const = default;
};

struct SceneDecl {
  std::string name;
  std::optional<AttrValue> background_color;
  std::optional<AttrValue> background_image;
  std::optional<AttrValue> background_sound;
  std::optional<long long> blackout_degree;  // 0..255, default 0
  std::optional<AttrValue> blackout_color;   // default black
  std::optional<bool> blocking_regions_during_blackout;
  std::optional<std::vector<std::string>> regions_to_disable;
  std::optional<std::string> region_enabled_after_all_disabled;
  std::optional<bool> reset_after_enter;
  std::optional<bool> spotlight;
  std::optional<AttrValue> spotlight_radius;  // default 200
  std::optional<std::vector<std::string>> lists_switched_over_after_enter;
  std::optional<std::string> region_enabled_after_list_finished;
  std::optional<std::string> on_scene_changed;
  std::optional<std::string> template_ref;
  std::vector<RegionDecl> regions;
  SourcePos pos;
  bool operator==(const SceneDecl&) const = default;

  const RegionDecl* find_region(std::string_view folded_name) const;
};

/// An attribute or element the parser did not recognise, kept verbatim.
struct UnknownItem {
  std::string element_path;
  std::string token;
  std::string value;  // attribute value; empty for elements
  bool operator==(const UnknownItem&) const = default;
};

enum class ResourceKind : std::uint8_t { image, sound, movie };

struct GimlDocument {
  SettingsInfo settings;
  std::optional<std::string> images_folder;
  std::optional<std::string> sounds_folder;
  std::optional<std::string> movies_folder;
  std::vector<ImageDecl> images;
  std::vector<SoundDecl> sounds;
  std::vector<MovieDecl> movies;
  std::vector<ListDecl> lists;
  ScenesHeader scenes_header;
  std::vector<SceneDecl> scenes;
  Language source_language = Language::en;
  std::vector<UnknownItem> unknown;
  bool operator==(const GimlDocument&) const = default;

  const SceneDecl* find_scene(std::string_view folded_name) const;
  const ImageDecl* find_image(std::string_view folded_name) const;
  const SoundDecl* find_sound(std::string_view folded_name) const;
  const MovieDecl* find_movie(std::string_view folded_name) const;
  const ListDecl* find_list(std::string_view folded_name) const;
};

struct ParseResult {
  std::optional<GimlDocument> document;  // empty on a fatal error
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return document.has_value(); }
};

/// Parses one markup file in any of the four languages. Fatal problems
/// (malformed XML, wrong root, unknown language code) leave `document` empty
/// and report a single error; everything else degrades to diagnostics.
ParseResult parse_document(std::string_view bytes, std::optional<Language> language_hint = {});

/// Equality ignoring the language the file was written in.
bool canonically_equal(const GimlDocument& a, const GimlDocument& b);

/// Absolute paths are returned unchanged. Relative paths are joined under the
/// container folder and the settings folder; without folders the path stays
/// relative to the working directory. Separators follow the root of the
/// result: drive-letter/UNC roots use '\', everything else '/'.
std::string resolve_resource_path(const GimlDocument& doc, ResourceKind kind, std::string_view path);

/// Template regions first, in template order, followed by the scene's own
/// regions; a scene region named like a template region replaces it in place.
/// Scene attributes set on `scene` override the template's.
SceneDecl merge_template(const SceneDecl& scene, const SceneDecl& template_scene);

/// Every scene with its template chain applied. Missing templates and cycles
/// produce diagnostics; the affected scene is returned without the template.
std::vector<SceneDecl> merged_scenes(const GimlDocument& doc, std::vector<Diagnostic>* diags = nullptr);

/// Stable, diffable rendering of the canonical model.
std::string dump(const GimlDocument& doc);

}  // namespace giml
