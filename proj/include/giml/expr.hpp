#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace giml {

/// Axis a relative (`%`) value is measured against.
enum class Axis : std::uint8_t { x, y, scalar };

/// What an attribute holds once materialized; decides how expressions parse.
enum class ValueKind : std::uint8_t { text, color, name, integer, real };

inline bool is_numeric(ValueKind k) { return k == ValueKind::integer || k == ValueKind::real; }

namespace expr {
struct Literal {
  std::string text;
  bool operator==(const Literal&) const = default;
};
struct RandomChoice {
  std::vector<std::string> alternatives;
  bool operator==(const RandomChoice&) const = default;
};
struct RandomRange {
  double lo = 0;
  double hi = 0;
  bool operator==(const RandomRange&) const = default;
};
struct ListRef {
  std::string list;  // case-folded list name
  bool operator==(const ListRef&) const = default;
};
struct Percent {
  double fraction = 0;
  Axis axis = Axis::scalar;
  bool operator==(const Percent&) const = default;
};
}  // namespace expr

using ValueExpr =
    std::variant<expr::Literal, expr::RandomChoice, expr::RandomRange, expr::ListRef, expr::Percent>;

struct ExprParse {
  ValueExpr value;
  std::string error;  // empty on success; on error value holds the raw literal
  bool ok() const { return error.empty(); }
};

/// Grammar:
///   "rand:" a ":" b [":" ...]   random choice; exactly two plain numbers on a
///                                numeric attribute give a random range
///   "@" name                     current value of a list
///   number "%"                   fraction of the design extent (numeric only)
///   anything else                literal
/// The "rand" keyword is matched case-insensitively.
ExprParse parse_value_expr(std::string_view raw, ValueKind kind, Axis axis = Axis::scalar);

/// Locale-independent number parsing of the whole string (surrounding blanks allowed).
std::optional<double> parse_number(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

std::string describe(const ValueExpr& e);

// ------------------------------------------------------------------ colors

struct Color {
  std::uint8_t a = 255;
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Color&) const = default;
};

/// Named web colors (case-insensitive) or #RRGGBB / #AARRGGBB hex.
std::optional<Color> parse_color(std::string_view s);
/// "#AARRGGBB", upper-case hex.
std::string to_hex(Color c);
/// Number of entries in the named-color palette.
std::size_t named_color_count();

}  // namespace giml
