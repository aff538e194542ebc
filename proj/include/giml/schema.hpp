#pragma once

#include <optional>
#include <span>
#include <string_view>

#include "giml/expr.hpp"
#include "giml/keywords.hpp"

// Context rules for resolving surface tokens: which registry owner an
// element's attributes and children are looked up under.
namespace giml::schema {

/// How the value of an attribute is interpreted.
enum class ValueShape : std::uint8_t {
  text,        // verbatim string
  name,        // case-folded identifier
  name_list,   // ';'-separated identifiers
  expression,  // AttrValue (rand:, @list, %)
  integer,
  real,
  boolean,
  enumeration,
  language,
  move_path,
  font_style,
  values,      // ';'-separated verbatim list values
};

struct AttributeInfo {
  ValueShape shape = ValueShape::text;
  ValueKind kind = ValueKind::text;  // for expressions
  Axis axis = Axis::scalar;
  std::string_view enum_owner;  // registry owner of the allowed values
};

AttributeInfo attribute_info(std::string_view canonical_id);

/// Registry owners consulted, in order, for attributes of an element.
std::span<const std::string_view> attribute_owners(std::string_view element_id);

std::optional<std::string_view> lookup_attribute(const KeywordRegistry& reg, std::string_view token,
                                                 Language lang, std::string_view element_id);
std::optional<std::string_view> lookup_child(const KeywordRegistry& reg, std::string_view token,
                                             Language lang, std::string_view parent_id);

std::optional<KeywordRegistry::Suggestion> suggest_attribute(const KeywordRegistry& reg,
                                                             std::string_view token, Language lang,
                                                             std::string_view element_id);

}  // namespace giml::schema
