#include "giml/schema.hpp"

#include <array>
#include <map>
#include <string>

namespace giml::schema {
namespace {

using S = ValueShape;
using K = ValueKind;

AttributeInfo I(S shape, K kind = K::text, Axis axis = Axis::scalar, std::string_view owner = {}) {
  return AttributeInfo{shape, kind, axis, owner};
}

const std::map<std::string_view, AttributeInfo>& table() {
  static const std::map<std::string_view, AttributeInfo> t = {
      {"FOLDER", I(S::text)},
      {"LANGUAGE", I(S::language)},
      {"LIBRARY", I(S::text)},
      {"NAME", I(S::name)},
      {"PATH", I(S::text)},
      {"TRANSPARENCY_KEY", I(S::text)},
      {"RUNNING_PERIOD", I(S::integer)},
      {"RUN_FROM_FRAME", I(S::integer)},
      {"RUN_TO_FRAME", I(S::integer)},
      {"KEEP_IN_MEMORY", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"REPETITION_NUMBER", I(S::integer)},
      {"IN_BACKGROUND", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"VOLUME", I(S::real)},
      {"ELEMENT_TYPE", I(S::enumeration, K::text, Axis::scalar, "ELEMENT_TYPE")},
      {"VALUES", I(S::values)},
      {"DRAWING", I(S::enumeration, K::text, Axis::scalar, "DRAWING")},
      {"GROUP", I(S::name)},
      {"NAME_OF_DEFAULT_SCENE", I(S::name)},
      {"ORIGINAL_SCREEN_SIZE_X", I(S::integer)},
      {"ORIGINAL_SCREEN_SIZE_Y", I(S::integer)},
      {"NAME_OF_PAUSE_SCENE", I(S::name)},
      {"BACKGROUND_COLOR", I(S::expression, K::color)},
      {"NAME_OF_BACKGROUND_IMAGE", I(S::expression, K::name)},
      {"NAME_OF_BACKGROUND_SOUND", I(S::expression, K::name)},
      {"BLACKOUT_DEGREE", I(S::integer)},
      {"BLACKOUT_COLOR", I(S::expression, K::color)},
      {"BLOCKING_REGIONS_DURING_BLACKOUT", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"LIST_OF_REGIONS_TO_DISABLE", I(S::name_list)},
      {"NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED", I(S::name)},
      {"RESET_AFTER_ENTER", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"SPOTLIGHT", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"SPOTLIGHT_RADIUS", I(S::expression, K::real)},
      {"NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER", I(S::name_list)},
      {"NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED", I(S::name)},
      {"ON_SCENE_CHANGED", I(S::text)},
      {"TEMPLATE", I(S::name)},
      {"ACTION_TYPE", I(S::enumeration, K::text, Axis::scalar, "ACTION_TYPE")},
      {"BORDER_WIDTH", I(S::expression, K::real)},
      {"BORDER_COLOR", I(S::expression, K::color)},
      {"NAME_OF_TARGET_SCENE", I(S::name)},
      {"NAME_OF_IMAGE", I(S::expression, K::name)},
      {"NAME_OF_SOUND", I(S::expression, K::name)},
      {"MOVE_PATH", I(S::move_path)},
      {"SPEED", I(S::expression, K::real)},
      {"ANIMATION_TYPE", I(S::enumeration, K::text, Axis::scalar, "ANIMATION_TYPE")},
      {"ANIMATION_AMPLITUDE", I(S::expression, K::real)},
      {"ANIMATION_PERIOD", I(S::expression, K::integer)},
      {"TAG", I(S::text)},
      {"DELAYED_TAG", I(S::text)},
      {"DELAY_OF_DELAYED_TAG", I(S::integer)},
      {"TEXT", I(S::expression, K::text)},
      {"FONT", I(S::expression, K::text)},
      {"FONT_SIZE", I(S::expression, K::real)},
      {"FONT_STYLE", I(S::font_style)},
      {"FONT_COLOR", I(S::expression, K::color)},
      {"TURN_OFF_WHEN_FINISHED", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"NAME_OF_REGION_ENABLED_WHEN_STARTED", I(S::name_list)},
      {"NAME_OF_REGION_DISABLED_WHEN_STARTED", I(S::name_list)},
      {"NAME_OF_REGION_ENABLED_WHEN_FINISHED", I(S::name_list)},
      {"NAME_OF_REGION_DISABLED_WHEN_FINISHED", I(S::name_list)},
      {"ENABLED", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"LOCATION_OF_CENTER_X", I(S::expression, K::real, Axis::x)},
      {"LOCATION_OF_CENTER_Y", I(S::expression, K::real, Axis::y)},
      {"SIZE_X", I(S::expression, K::real, Axis::x)},
      {"SIZE_Y", I(S::expression, K::real, Axis::y)},
      {"SHAPE", I(S::enumeration, K::text, Axis::scalar, "SHAPE")},
      {"OFFSET_OF_IMAGE_CENTER_X", I(S::expression, K::real, Axis::x)},
      {"OFFSET_OF_IMAGE_CENTER_Y", I(S::expression, K::real, Axis::y)},
      {"IMAGE_SIZE_X", I(S::expression, K::real, Axis::x)},
      {"IMAGE_SIZE_Y", I(S::expression, K::real, Axis::y)},
      {"OFFSET_OF_TEXT_X", I(S::expression, K::real, Axis::x)},
      {"OFFSET_OF_TEXT_Y", I(S::expression, K::real, Axis::y)},
      {"OFFSET_OF_ACTIVATION_BAR_X", I(S::expression, K::real, Axis::x)},
      {"OFFSET_OF_ACTIVATION_BAR_Y", I(S::expression, K::real, Axis::y)},
      {"REGION_ANIMATION_ENABLED", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"IMAGE_ANIMATION_ENABLED", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"CONDITION_OF_REACTION_COMPLETION", I(S::enumeration, K::text, Axis::scalar, "COMPLETION")},
      {"REACTION_DURATION", I(S::integer)},
      {"HOLD_SCENE_TRANSITION", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"AUTOMATIC_REACTION_AFTER_TIME", I(S::integer)},
      {"ABLE_TO_ACTIVATE_BLACKOUT", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"RESET_AFTER_ENABLED", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"IGNORE_GAZE", I(S::boolean, K::text, Axis::scalar, "BOOLEAN")},
      {"ENABLING_DELAY", I(S::integer)},
      {"DISABLING_DELAY", I(S::integer)},
      {"REACTION_KEY", I(S::text)},
      {"ON_ACTIVATION_COMPLETED", I(S::text)},
      {"ON_REACTION_STARTED", I(S::text)},
      {"ON_REACTION_FINISHED", I(S::text)},
      {"ON_NORMAL_STATE_RETURN", I(S::text)},
      {"ON_STATE_CHANGED", I(S::text)},
      {"DWELL_TIME", I(S::integer)},
  };
  return t;
}

constexpr std::array<std::string_view, 2> kRegionOwners{"REGION", "REGION_STATE"};
constexpr std::array<std::string_view, 1> kStateOwners{"REGION_STATE"};

}  // namespace

AttributeInfo attribute_info(std::string_view canonical_id) {
  const auto& t = table();
  auto it = t.find(canonical_id);
  return it == t.end() ? AttributeInfo{} : it->second;
}

std::span<const std::string_view> attribute_owners(std::string_view element_id) {
  if (element_id == "REGION") return kRegionOwners;
  if (element_id == "ACTIVATION" || element_id == "REACTION") return kStateOwners;
  // Every other element owns its attributes under its own id. The ids live
  // in the registry, which outlives every caller.
  static const std::map<std::string, std::array<std::string_view, 1>, std::less<>> own = [] {
    std::map<std::string, std::array<std::string_view, 1>, std::less<>> m;
    for (const auto& e : KeywordRegistry::builtin().entries())
      if (e.kind == KeywordKind::element) m[e.canonical_id] = {std::string_view(e.canonical_id)};
    return m;
  }();
  auto it = own.find(element_id);
  if (it == own.end()) return {};
  return it->second;
}

std::optional<std::string_view> lookup_attribute(const KeywordRegistry& reg, std::string_view token,
                                                 Language lang, std::string_view element_id) {
  for (auto owner : attribute_owners(element_id))
    if (auto id = reg.lookup(token, lang, KeywordKind::attribute, owner)) return id;
  return std::nullopt;
}

std::optional<std::string_view> lookup_child(const KeywordRegistry& reg, std::string_view token,
                                             Language lang, std::string_view parent_id) {
  return reg.lookup(token, lang, KeywordKind::element, parent_id);
}

std::optional<KeywordRegistry::Suggestion> suggest_attribute(const KeywordRegistry& reg,
                                                             std::string_view token, Language lang,
                                                             std::string_view element_id) {
  std::optional<KeywordRegistry::Suggestion> best;
  bool tie = false;
  for (auto owner : attribute_owners(element_id)) {
    auto s = reg.suggest(token, lang, KeywordKind::attribute, owner);
    if (!s) continue;
    if (!best || s->distance < best->distance) {
      best = s;
      tie = false;
    } else if (s->distance == best->distance && s->canonical_id != best->canonical_id) {
      tie = true;
    }
  }
  if (tie) return std::nullopt;
  return best;
}

}  // namespace giml::schema
