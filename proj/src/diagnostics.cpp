#include "giml/diagnostics.hpp"

#include <json.hpp>

namespace giml {

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "error";
}

DiagnosticCounts count(const std::vector<Diagnostic>& diags) {
  DiagnosticCounts c;
  for (const auto& d : diags) {
    switch (d.severity) {
      case Severity::error: ++c.errors; break;
      case Severity::warning: ++c.warnings; break;
      case Severity::info: ++c.infos; break;
    }
  }
  return c;
}

bool has_errors(const std::vector<Diagnostic>& diags) { return count(diags).errors > 0; }

std::string format_line(const Diagnostic& d, std::string_view file) {
  std::string out;
  if (!file.empty()) {
    out += file;
    out += ':';
  }
  out += std::to_string(d.location.line) + ":" + std::to_string(d.location.column) + ": ";
  out += to_string(d.severity);
  out += " [" + d.code + "] " + d.message;
  if (!d.location.element_path.empty()) out += " at " + d.location.element_path;
  if (d.suggestion) out += " (did you mean '" + *d.suggestion + "'?)";
  return out;
}

std::string format_json_line(const Diagnostic& d, std::string_view file) {
  nlohmann::ordered_json j;
  if (!file.empty()) j["file"] = std::string(file);
  j["severity"] = std::string(to_string(d.severity));
  j["code"] = d.code;
  j["path"] = d.location.element_path;
  j["line"] = d.location.line;
  j["column"] = d.location.column;
  j["message"] = d.message;
  j["suggestion"] = d.suggestion ? nlohmann::ordered_json(*d.suggestion) : nullptr;
  return j.dump();
}

}  // namespace giml
