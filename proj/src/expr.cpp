#include "giml/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "giml/keywords.hpp"

namespace giml {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool starts_with_rand(std::string_view s) {
  return s.size() >= 5 && fold_case(s.substr(0, 5)) == "rand:";
}

std::optional<double> parse_percent(std::string_view s) {
  s = trim(s);
  if (s.empty() || s.back() != '%') return std::nullopt;
  return parse_number(s.substr(0, s.size() - 1));
}

struct NamedColor {
  std::string_view name;
  std::uint32_t rgb;
};

// The 140 standard web color names.
constexpr std::array<NamedColor, 140> kPalette{{
    {"aliceblue", 0xF0F8FF}, {"antiquewhite", 0xFAEBD7}, {"aqua", 0x00FFFF},
    {"aquamarine", 0x7FFFD4}, {"azure", 0xF0FFFF}, {"beige", 0xF5F5DC},
    {"bisque", 0xFFE4C4}, {"black", 0x000000}, {"blanchedalmond", 0xFFEBCD},
    {"blue", 0x0000FF}, {"blueviolet", 0x8A2BE2}, {"brown", 0xA52A2A},
    {"burlywood", 0xDEB887}, {"cadetblue", 0x5F9EA0}, {"chartreuse", 0x7FFF00},
    {"chocolate", 0xD2691E}, {"coral", 0xFF7F50}, {"cornflowerblue", 0x6495ED},
    {"cornsilk", 0xFFF8DC}, {"crimson", 0xDC143C}, {"cyan", 0x00FFFF},
    {"darkblue", 0x00008B}, {"darkcyan", 0x008B8B}, {"darkgoldenrod", 0xB8860B},
    {"darkgray", 0xA9A9A9}, {"darkgreen", 0x006400}, {"darkkhaki", 0xBDB76B},
    {"darkmagenta", 0x8B008B}, {"darkolivegreen", 0x556B2F}, {"darkorange", 0xFF8C00},
    {"darkorchid", 0x9932CC}, {"darkred", 0x8B0000}, {"darksalmon", 0xE9967A},
    {"darkseagreen", 0x8FBC8F}, {"darkslateblue", 0x483D8B}, {"darkslategray", 0x2F4F4F},
    {"darkturquoise", 0x00CED1}, {"darkviolet", 0x9400D3}, {"deeppink", 0xFF1493},
    {"deepskyblue", 0x00BFFF}, {"dimgray", 0x696969}, {"dodgerblue", 0x1E90FF},
    {"firebrick", 0xB22222}, {"floralwhite", 0xFFFAF0}, {"forestgreen", 0x228B22},
    {"fuchsia", 0xFF00FF}, {"gainsboro", 0xDCDCDC}, {"ghostwhite", 0xF8F8FF},
    {"gold", 0xFFD700}, {"goldenrod", 0xDAA520}, {"gray", 0x808080},
    {"green", 0x008000}, {"greenyellow", 0xADFF2F}, {"honeydew", 0xF0FFF0},
    {"hotpink", 0xFF69B4}, {"indianred", 0xCD5C5C}, {"indigo", 0x4B0082},
    {"ivory", 0xFFFFF0}, {"khaki", 0xF0E68C}, {"lavender", 0xE6E6FA},
    {"lavenderblush", 0xFFF0F5}, {"lawngreen", 0x7CFC00}, {"lemonchiffon", 0xFFFACD},
    {"lightblue", 0xADD8E6}, {"lightcoral", 0xF08080}, {"lightcyan", 0xE0FFFF},
    {"lightgoldenrodyellow", 0xFAFAD2}, {"lightgray", 0xD3D3D3}, {"lightgreen", 0x90EE90},
    {"lightpink", 0xFFB6C1}, {"lightsalmon", 0xFFA07A}, {"lightseagreen", 0x20B2AA},
    {"lightskyblue", 0x87CEFA}, {"lightslategray", 0x778899}, {"lightsteelblue", 0xB0C4DE},
    {"lightyellow", 0xFFFFE0}, {"lime", 0x00FF00}, {"limegreen", 0x32CD32},
    {"linen", 0xFAF0E6}, {"magenta", 0xFF00FF}, {"maroon", 0x800000},
    {"mediumaquamarine", 0x66CDAA}, {"mediumblue", 0x0000CD}, {"mediumorchid", 0xBA55D3},
    {"mediumpurple", 0x9370DB}, {"mediumseagreen", 0x3CB371}, {"mediumslateblue", 0x7B68EE},
    {"mediumspringgreen", 0x00FA9A}, {"mediumturquoise", 0x48D1CC},
    {"mediumvioletred", 0xC71585}, {"midnightblue", 0x191970}, {"mintcream", 0xF5FFFA},
    {"mistyrose", 0xFFE4E1}, {"moccasin", 0xFFE4B5}, {"navajowhite", 0xFFDEAD},
    {"navy", 0x000080}, {"oldlace", 0xFDF5E6}, {"olive", 0x808000},
    {"olivedrab", 0x6B8E23}, {"orange", 0xFFA500}, {"orangered", 0xFF4500},
    {"orchid", 0xDA70D6}, {"palegoldenrod", 0xEEE8AA}, {"palegreen", 0x98FB98},
    {"paleturquoise", 0xAFEEEE}, {"palevioletred", 0xDB7093}, {"papayawhip", 0xFFEFD5},
    {"peachpuff", 0xFFDAB9}, {"peru", 0xCD853F}, {"pink", 0xFFC0CB},
    {"plum", 0xDDA0DD}, {"powderblue", 0xB0E0E6}, {"purple", 0x800080},
    {"red", 0xFF0000}, {"rosybrown", 0xBC8F8F}, {"royalblue", 0x4169E1},
    {"saddlebrown", 0x8B4513}, {"salmon", 0xFA8072}, {"sandybrown", 0xF4A460},
    {"seagreen", 0x2E8B57}, {"seashell", 0xFFF5EE}, {"sienna", 0xA0522D},
    {"silver", 0xC0C0C0}, {"skyblue", 0x87CEEB}, {"slateblue", 0x6A5ACD},
    {"slategray", 0x708090}, {"snow", 0xFFFAFA}, {"springgreen", 0x00FF7F},
    {"steelblue", 0x4682B4}, {"tan", 0xD2B48C}, {"teal", 0x008080},
    {"thistle", 0xD8BFD8}, {"tomato", 0xFF6347}, {"turquoise", 0x40E0D0},
    {"violet", 0xEE82EE}, {"wheat", 0xF5DEB3}, {"white", 0xFFFFFF},
    {"whitesmoke", 0xF5F5F5}, {"yellow", 0xFFFF00}, {"yellowgreen", 0x9ACD32},
}};

std::optional<std::uint32_t> parse_hex(std::string_view s) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, 16);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

ExprParse parse_value_expr(std::string_view raw, ValueKind kind, Axis axis) {
  ExprParse out{expr::Literal{std::string(raw)}, {}};
  const std::string_view s = trim(raw);
  if (starts_with_rand(s)) {
    auto tails = split(s.substr(5), ':');
    std::erase_if(tails, [](const std::string& t) { return t.empty(); });
    if (tails.size() < 2) {
      out.error = "'rand:' needs at least two alternatives";
      return out;
    }
    if (is_numeric(kind)) {
      bool all_plain = true;
      for (const auto& t : tails) {
        if (parse_number(t)) continue;
        all_plain = false;
        if (!parse_percent(t)) {
          out.error = "non-numeric alternative '" + t + "' in 'rand:'";
          return out;
        }
      }
      if (all_plain && tails.size() == 2) {
        const double lo = *parse_number(tails[0]);
        const double hi = *parse_number(tails[1]);
        if (lo > hi) {
          out.error = "random range lower bound exceeds upper bound";
          return out;
        }
        out.value = expr::RandomRange{lo, hi};
        return out;
      }
    }
    out.value = expr::RandomChoice{std::move(tails)};
    return out;
  }
  if (!s.empty() && s.front() == '@') {
    const auto name = trim(s.substr(1));
    if (name.empty()) {
      out.error = "'@' must be followed by a list name";
      return out;
    }
    out.value = expr::ListRef{fold_case(name)};
    return out;
  }
  if (!s.empty() && s.back() == '%') {
    if (kind == ValueKind::color || kind == ValueKind::name) {
      out.error = "'%' is only allowed on numeric attributes";
      return out;
    }
    if (is_numeric(kind)) {
      const auto pct = parse_percent(s);
      if (!pct) {
        out.error = "malformed percentage '" + std::string(s) + "'";
        return out;
      }
      if (*pct < 0) {
        out.error = "percentage must not be negative";
        return out;
      }
      out.value = expr::Percent{*pct / 100.0, axis};
      return out;
    }
  }
  if (is_numeric(kind) && !parse_number(s)) {
    out.error = "expected a number, got '" + std::string(s) + "'";
    return out;
  }
  return out;
}

std::string describe(const ValueExpr& e) {
  struct V {
    std::string operator()(const expr::Literal& l) const { return "literal(" + l.text + ")"; }
    std::string operator()(const expr::RandomChoice& c) const {
      std::string s = "random_choice(";
      for (std::size_t i = 0; i < c.alternatives.size(); ++i) s += (i ? "|" : "") + c.alternatives[i];
      return s + ")";
    }
    std::string operator()(const expr::RandomRange& r) const {
      char buf[64];
      auto n1 = std::to_chars(buf, buf + 32, r.lo).ptr;
      *n1++ = ',';
      auto n2 = std::to_chars(n1, buf + 64, r.hi).ptr;
      return "random_range(" + std::string(buf, n2) + ")";
    }
    std::string operator()(const expr::ListRef& l) const { return "list_ref(" + l.list + ")"; }
    std::string operator()(const expr::Percent& p) const {
      char buf[32];
      auto n = std::to_chars(buf, buf + sizeof buf, p.fraction).ptr;
      const char* ax = p.axis == Axis::x ? "x" : p.axis == Axis::y ? "y" : "scalar";
      return "percent(" + std::string(buf, n) + "," + ax + ")";
    }
  };
  return std::visit(V{}, e);
}

std::optional<Color> parse_color(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '#') {
    const auto hex = s.substr(1);
    if (hex.size() != 6 && hex.size() != 8) return std::nullopt;
    const auto v = parse_hex(hex);
    if (!v) return std::nullopt;
    Color c;
    if (hex.size() == 8) c.a = static_cast<std::uint8_t>(*v >> 24);
    c.r = static_cast<std::uint8_t>(*v >> 16);
    c.g = static_cast<std::uint8_t>(*v >> 8);
    c.b = static_cast<std::uint8_t>(*v);
    return c;
  }
  const std::string folded = fold_case(s);
  for (const auto& nc : kPalette)
    if (nc.name == folded)
      return Color{255, static_cast<std::uint8_t>(nc.rgb >> 16), static_cast<std::uint8_t>(nc.rgb >> 8),
                   static_cast<std::uint8_t>(nc.rgb)};
  return std::nullopt;
}

std::string to_hex(Color c) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (std::uint8_t v : {c.a, c.r, c.g, c.b}) {
    out += kDigits[v >> 4];
    out += kDigits[v & 0xF];
  }
  return out;
}

std::size_t named_color_count() { return kPalette.size(); }

}  // namespace giml
