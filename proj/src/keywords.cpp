#include "giml/keywords.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace giml {

// Generated at build time from data/keywords.tsv.
extern const char* const kEmbeddedKeywordTable;

std::string_view to_string(Language lang) {
  switch (lang) {
    case Language::en: return "en";
    case Language::fr: return "fr";
    case Language::de: return "de";
    case Language::pl: return "pl";
  }
  return "en";
}

std::optional<Language> parse_language(std::string_view code) {
  const std::string folded = fold_case(code);
  for (Language lang : kAllLanguages)
    if (folded == to_string(lang)) return lang;
  return std::nullopt;
}

std::string_view to_string(KeywordKind kind) {
  switch (kind) {
    case KeywordKind::element: return "element";
    case KeywordKind::attribute: return "attribute";
    case KeywordKind::enum_value: return "enum_value";
  }
  return "element";
}

bool KeywordEntry::owned_by(std::string_view owner) const {
  return std::find(owners.begin(), owners.end(), owner) != owners.end();
}

namespace {

// Decodes one code point; returns the number of bytes consumed (>= 1).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    cp = b0;
    return 1;
  }
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      cp = static_cast<char32_t>(((b0 & 0x1F) << 6) | c1);
      return 2;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      cp = static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2);
      return 3;
    }
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      cp = static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) | (c2 << 6) | c3);
      return 4;
    }
  }
  cp = 0xFFFD;
  return 1;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

char32_t fold_code_point(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0xC0) return cp;
  if (cp <= 0xDE) return cp == 0xD7 ? cp : cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return cp | 1u;
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1u) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1u;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1u) ? cp + 1 : cp;
  if (cp == 0x1E9E) return 0xDF;
  return cp;
}

std::vector<char32_t> folded_code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    char32_t cp = 0;
    i += decode_utf8(s, i, cp);
    out.push_back(fold_code_point(cp));
  }
  return out;
}

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> split_on(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<KeywordKind> parse_kind(std::string_view s) {
  if (s == "element") return KeywordKind::element;
  if (s == "attribute") return KeywordKind::attribute;
  if (s == "enum_value") return KeywordKind::enum_value;
  return std::nullopt;
}

}  // namespace

std::string fold_case(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    char32_t cp = 0;
    const std::size_t n = decode_utf8(text, i, cp);
    if (cp == 0xFFFD && n == 1 && static_cast<unsigned char>(text[i]) >= 0x80) {
      out += text[i];  // invalid byte, keep as is
    } else {
      encode_utf8(fold_code_point(cp), out);
    }
    i += n;
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto x = folded_code_points(a);
  const auto y = folded_code_points(b);
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (x[i - 1] == y[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

KeywordRegistry KeywordRegistry::from_text(std::string_view text) {
  KeywordRegistry reg;
  reg.source_ = std::string(text);
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    bool reconstructed = false;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      reconstructed = line.substr(hash).find("reconstructed") != std::string_view::npos;
      line = line.substr(0, hash);
    }
    const auto cols = split_ws(line);
    if (cols.empty()) continue;
    if (cols.size() != 7)
      throw std::invalid_argument("keyword table line " + std::to_string(line_no) +
                                  ": expected 7 columns, got " + std::to_string(cols.size()));
    KeywordEntry e;
    e.canonical_id = cols[0];
    const auto kind = parse_kind(cols[1]);
    if (!kind)
      throw std::invalid_argument("keyword table line " + std::to_string(line_no) +
                                  ": unknown kind '" + cols[1] + "'");
    e.kind = *kind;
    e.owners = split_on(cols[2], ',');
    for (std::size_t l = 0; l < 4; ++l) {
      e.spellings[l] = split_on(cols[3 + l], '|');
      for (const auto& s : e.spellings[l])
        if (s.empty())
          throw std::invalid_argument("keyword table line " + std::to_string(line_no) +
                                      ": empty spelling");
    }
    e.reconstructed = reconstructed;
    if (reg.find(e.canonical_id))
      throw std::invalid_argument("keyword table line " + std::to_string(line_no) +
                                  ": duplicate id " + e.canonical_id);
    reg.entries_.push_back(std::move(e));
  }

  // Folded spellings must be unique within (kind, owner, language).
  std::map<std::tuple<KeywordKind, std::string, std::size_t, std::string>, std::string> seen;
  for (const auto& e : reg.entries_)
    for (const auto& owner : e.owners)
      for (std::size_t l = 0; l < 4; ++l)
        for (const auto& s : e.spellings[l]) {
          auto key = std::make_tuple(e.kind, owner, l, fold_case(s));
          auto [it, inserted] = seen.emplace(key, e.canonical_id);
          if (!inserted && it->second != e.canonical_id)
            throw std::invalid_argument("keyword collision: '" + s + "' (" +
                                        std::string(to_string(static_cast<Language>(l))) +
                                        ") used by " + it->second + " and " + e.canonical_id);
        }
  return reg;
}

const KeywordRegistry& KeywordRegistry::builtin() {
  static const KeywordRegistry reg = from_text(kEmbeddedKeywordTable);
  return reg;
}

std::optional<std::string_view> KeywordRegistry::lookup(std::string_view token, Language lang,
                                                        KeywordKind kind,
                                                        std::string_view owner) const {
  if (token.empty()) return std::nullopt;
  const std::string folded = fold_case(token);
  const auto l = static_cast<std::size_t>(lang);
  for (const auto& e : entries_) {
    if (e.kind != kind || !e.owned_by(owner)) continue;
    for (const auto& s : e.spellings[l])
      if (fold_case(s) == folded) return std::string_view(e.canonical_id);
  }
  return std::nullopt;
}

const KeywordEntry* KeywordRegistry::find(std::string_view canonical_id) const {
  for (const auto& e : entries_)
    if (e.canonical_id == canonical_id) return &e;
  return nullptr;
}

const std::string& KeywordRegistry::render(std::string_view canonical_id, Language lang) const {
  const KeywordEntry* e = find(canonical_id);
  if (!e) throw std::out_of_range("unknown keyword id: " + std::string(canonical_id));
  return e->spelling(lang);
}

std::optional<KeywordRegistry::Suggestion> KeywordRegistry::suggest(std::string_view token,
                                                                    Language lang,
                                                                    KeywordKind kind,
                                                                    std::string_view owner,
                                                                    std::size_t max_distance) const {
  std::optional<Suggestion> best;
  bool ambiguous = false;
  const auto l = static_cast<std::size_t>(lang);
  for (const auto& e : entries_) {
    if (e.kind != kind || !e.owned_by(owner)) continue;
    std::size_t d = std::string_view::npos;
    for (const auto& s : e.spellings[l]) d = std::min(d, edit_distance(token, s));
    if (d > max_distance) continue;
    if (!best || d < best->distance) {
      best = Suggestion{e.canonical_id, e.spelling(lang), d};
      ambiguous = false;
    } else if (d == best->distance && e.canonical_id != best->canonical_id) {
      ambiguous = true;
    }
  }
  if (ambiguous) return std::nullopt;
  return best;
}

}  // namespace giml
