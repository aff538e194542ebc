#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace giml {

enum class Severity : std::uint8_t { error, warning, info };

std::string_view to_string(Severity s);

/// Stable diagnostic codes. Their string forms are part of the report format.
namespace codes {
inline constexpr std::string_view kXmlSyntax = "XML_SYNTAX";
inline constexpr std::string_view kWrongRoot = "WRONG_ROOT";
inline constexpr std::string_view kUnknownLanguage = "UNKNOWN_LANGUAGE";
inline constexpr std::string_view kLanguageMismatch = "LANGUAGE_MISMATCH";
inline constexpr std::string_view kUnknownElement = "UNKNOWN_ELEMENT";
inline constexpr std::string_view kUnknownAttribute = "UNKNOWN_ATTRIBUTE";
inline constexpr std::string_view kUnknownValue = "UNKNOWN_VALUE";
inline constexpr std::string_view kMissingAttribute = "MISSING_ATTRIBUTE";
inline constexpr std::string_view kMissingElement = "MISSING_ELEMENT";
inline constexpr std::string_view kDuplicateAttribute = "DUPLICATE_ATTRIBUTE";
inline constexpr std::string_view kDuplicateName = "DUPLICATE_NAME";
inline constexpr std::string_view kDuplicateElement = "DUPLICATE_ELEMENT";
inline constexpr std::string_view kBadNumber = "BAD_NUMBER";
inline constexpr std::string_view kBadColor = "BAD_COLOR";
inline constexpr std::string_view kBadExpression = "BAD_EXPRESSION";
inline constexpr std::string_view kBadMovePath = "BAD_MOVE_PATH";
inline constexpr std::string_view kBadFontStyle = "BAD_FONT_STYLE";
inline constexpr std::string_view kOutOfRange = "OUT_OF_RANGE";
inline constexpr std::string_view kStrayText = "STRAY_TEXT";
inline constexpr std::string_view kDanglingSceneRef = "DANGLING_SCENE_REF";
inline constexpr std::string_view kDanglingImageRef = "DANGLING_IMAGE_REF";
inline constexpr std::string_view kDanglingSoundRef = "DANGLING_SOUND_REF";
inline constexpr std::string_view kDanglingRegionRef = "DANGLING_REGION_REF";
inline constexpr std::string_view kDanglingListRef = "DANGLING_LIST_REF";
inline constexpr std::string_view kGroupLengthMismatch = "GROUP_LENGTH_MISMATCH";
inline constexpr std::string_view kGroupDrawingConflict = "GROUP_DRAWING_CONFLICT";
inline constexpr std::string_view kMissingReactionDuration = "MISSING_REACTION_DURATION";
inline constexpr std::string_view kMovePathUnused = "MOVE_PATH_UNUSED";
inline constexpr std::string_view kMissingMovePath = "MISSING_MOVE_PATH";
inline constexpr std::string_view kTemplateMissing = "TEMPLATE_MISSING";
inline constexpr std::string_view kTemplateCycle = "TEMPLATE_CYCLE";
inline constexpr std::string_view kListValueInvalid = "LIST_VALUE_INVALID";
inline constexpr std::string_view kResourceFileMissing = "RESOURCE_FILE_MISSING";
inline constexpr std::string_view kResourceNotChecked = "RESOURCE_NOT_CHECKED";
inline constexpr std::string_view kSpotlightConflict = "SPOTLIGHT_CONFLICT";
}  // namespace codes

struct SourceLocation {
  std::string element_path;  // e.g. "settings/scenes/scene[scene1]/region[region1]"
  std::size_t line = 0;      // 1-based; 0 when unknown
  std::size_t column = 0;    // 1-based; 0 when unknown
};

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  SourceLocation location;
  std::string message;
  std::optional<std::string> suggestion;
};

struct DiagnosticCounts {
  std::size_t errors = 0;
  std::size_t warnings = 0;
  std::size_t infos = 0;
};

DiagnosticCounts count(const std::vector<Diagnostic>& diags);
bool has_errors(const std::vector<Diagnostic>& diags);

/// "file:line:col: severity [CODE] message (did you mean 'x'?)"
std::string format_line(const Diagnostic& d, std::string_view file = {});
/// One JSON object per line with fields severity, code, path, line, column, message, suggestion.
std::string format_json_line(const Diagnostic& d, std::string_view file = {});

}  // namespace giml
