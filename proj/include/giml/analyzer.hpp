#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "giml/diagnostics.hpp"
#include "giml/document.hpp"

namespace giml {

struct ValidateOptions {
  /// When set, resource files are checked for existence below this folder
  /// (absolute resource paths are checked as they are).
  std::optional<std::filesystem::path> resource_root;
};

/// Semantic checks over a parsed document. Pure: the same document yields
/// the same diagnostics in the same order.
std::vector<Diagnostic> validate(const GimlDocument& doc, const ValidateOptions& options = {});

struct TranslateResult {
  std::optional<std::string> text;  // empty when the source did not parse cleanly
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return text.has_value(); }
};

/// Rewrites every keyword (element and attribute names, enumerated values and
/// the language code) into `target`. Identifiers, paths, texts, list values,
/// colors, numbers and comments are copied unchanged.
TranslateResult translate(std::string_view source, Language target,
                          std::optional<Language> source_hint = std::nullopt);

}  // namespace giml
