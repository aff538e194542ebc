#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace giml {

enum class Language : std::uint8_t { en, fr, de, pl };

inline constexpr std::array<Language, 4> kAllLanguages{Language::en, Language::fr, Language::de,
                                                        Language::pl};

std::string_view to_string(Language lang);
/// Accepts exactly the four codes (case-insensitive); anything else is nullopt.
std::optional<Language> parse_language(std::string_view code);

enum class KeywordKind : std::uint8_t { element, attribute, enum_value };

std::string_view to_string(KeywordKind kind);

struct KeywordEntry {
  std::string canonical_id;
  KeywordKind kind{};
  std::vector<std::string> owners;
  /// spellings[lang][0] is the preferred spelling; further entries are accepted aliases.
  std::array<std::vector<std::string>, 4> spellings;
  bool reconstructed = false;

  const std::string& spelling(Language lang) const {
    return spellings[static_cast<std::size_t>(lang)].front();
  }
  bool owned_by(std::string_view owner) const;
};

/// Lowercase folding used for every keyword and name comparison.
///
/// Decodes UTF-8 and lowers ASCII, Latin-1 Supplement and Latin Extended-A
/// capitals (plus U+1E9E). Diacritics are kept, so "głośność" and "glosnosc"
/// stay distinct. Invalid UTF-8 bytes are passed through unchanged.
std::string fold_case(std::string_view text);

/// Edit distance over code points of the folded strings.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Immutable table of every element, attribute and enumerated value with its
/// four surface spellings. Safe for concurrent readers.
class KeywordRegistry {
 public:
  /// Parse the columnar data format (see data/keywords.tsv). Throws
  /// std::invalid_argument on malformed rows or violated uniqueness.
  static KeywordRegistry from_text(std::string_view text);

  /// The registry compiled into the library.
  static const KeywordRegistry& builtin();

  std::optional<std::string_view> lookup(std::string_view token, Language lang, KeywordKind kind,
                                         std::string_view owner) const;
  /// Preferred spelling of an id; throws std::out_of_range for unknown ids.
  const std::string& render(std::string_view canonical_id, Language lang) const;

  const KeywordEntry* find(std::string_view canonical_id) const;
  std::span<const KeywordEntry> entries() const { return entries_; }

  struct Suggestion {
    std::string canonical_id;
    std::string spelling;
    std::size_t distance;
  };
  /// Nearest spelling within (kind, owner, lang) at edit distance <= max_distance,
  /// or nullopt when no candidate or the nearest is ambiguous.
  std::optional<Suggestion> suggest(std::string_view token, Language lang, KeywordKind kind,
                                    std::string_view owner, std::size_t max_distance = 2) const;

  /// The source text the registry was built from.
  std::string_view source_text() const { return source_; }

 private:
  std::vector<KeywordEntry> entries_;
  std::string source_;
};

}  // namespace giml
