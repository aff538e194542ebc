// giml: command-line front end for the markup toolkit and runtime.

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "giml/analyzer.hpp"
#include "giml/document.hpp"
#include "giml/engine.hpp"
#include "giml/gaze_io.hpp"
#include "giml/keywords.hpp"
#include "giml/media.hpp"
#include "giml/server.hpp"
#include "giml/session.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kSemantic = 1;
constexpr int kEnvironment = 2;

struct EnvironmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EnvironmentError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<giml::Language> language_option(const std::string& code) {
  if (code.empty()) return std::nullopt;
  auto lang = giml::parse_language(code);
  if (!lang) throw EnvironmentError("unknown language '" + code + "' (expected en, fr, de or pl)");
  return lang;
}

std::optional<fs::path> asset_root() {
  if (const char* env = std::getenv("GIML_ASSET_ROOT"); env && *env) return fs::path(env);
  return std::nullopt;
}

std::uint64_t time_seed() {
  return static_cast<std::uint64_t>(std::chrono::system_clock::now().time_since_epoch().count());
}

void print_diagnostics(const std::vector<giml::Diagnostic>& diags, const std::string& file, bool json) {
  for (const auto& d : diags) std::cout << (json ? giml::format_json_line(d, file) : giml::format_line(d, file)) << "\n";
}

// Parses a document and prints its diagnostics. Returns nullopt when the
// document has errors.
std::optional<giml::GimlDocument> load_document(const fs::path& path, std::optional<giml::Language> lang, bool json,
                                                bool run_validation) {
  const auto text = read_file(path);
  auto parsed = giml::parse_document(text, lang);
  std::vector<giml::Diagnostic> diags = parsed.diagnostics;
  if (parsed.document && run_validation) {
    giml::ValidateOptions vo;
    vo.resource_root = asset_root();
    auto more = giml::validate(*parsed.document, vo);
    diags.insert(diags.end(), more.begin(), more.end());
  }
  print_diagnostics(diags, path.string(), json);
  if (!parsed.document || giml::has_errors(diags)) return std::nullopt;
  return std::move(parsed.document);
}

std::vector<fs::path> expand_paths(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        const auto ext = giml::fold_case(e.path().extension().string());
        if (e.is_regular_file() && (ext == ".xml" || ext == ".giml")) found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int cmd_validate(const std::vector<std::string>& inputs, const std::string& language, bool json) {
  const auto lang = language_option(language);
  std::size_t files = 0, failed = 0;
  giml::DiagnosticCounts total;
  for (const auto& path : expand_paths(inputs)) {
    ++files;
    const auto parsed = giml::parse_document(read_file(path), lang);
    std::vector<giml::Diagnostic> diags = parsed.diagnostics;
    if (parsed.document) {
      giml::ValidateOptions vo;
      vo.resource_root = asset_root();
      auto more = giml::validate(*parsed.document, vo);
      diags.insert(diags.end(), more.begin(), more.end());
    }
    print_diagnostics(diags, path.string(), json);
    const auto c = giml::count(diags);
    total.errors += c.errors;
    total.warnings += c.warnings;
    total.infos += c.infos;
    if (!parsed.document || c.errors > 0) ++failed;
  }
  if (!json)
    std::cerr << files << " file(s), " << failed << " with errors; " << total.errors << " error(s), " << total.warnings
              << " warning(s), " << total.infos << " info(s)\n";
  return failed == 0 ? kOk : kSemantic;
}

int cmd_translate(const std::string& input, const std::string& target, const std::string& source_lang,
                  const std::string& output) {
  const auto to = language_option(target);
  if (!to) throw EnvironmentError("--to is required");
  const auto result = giml::translate(read_file(input), *to, language_option(source_lang));
  print_diagnostics(result.diagnostics, input, false);
  if (!result.ok()) return kSemantic;
  if (output.empty() || output == "-") {
    std::cout << *result.text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw EnvironmentError("cannot write '" + output + "'");
    out << *result.text;
  }
  return kOk;
}

int cmd_inspect(const std::string& input, const std::string& language) {
  const auto parsed = giml::parse_document(read_file(input), language_option(language));
  if (!parsed.document) {
    print_diagnostics(parsed.diagnostics, input, false);
    return kSemantic;
  }
  std::cout << giml::dump(*parsed.document);
  return kOk;
}

struct EngineFlags {
  std::optional<std::uint64_t> seed;
  long long dwell_ms = 1000;
  long long tick_ms = 10;
  bool strict = false;
  double dispersion_px = 80;
  long long min_fix_ms = 100;
  std::string manifest;
  std::string language;
};

giml::RunOptions make_run_options(const giml::GimlDocument& doc, const EngineFlags& f, const std::string& label) {
  if (f.dwell_ms <= 0) throw EnvironmentError("--dwell-ms must be positive");
  if (f.tick_ms <= 0) throw EnvironmentError("--tick-ms must be positive");
  giml::RunOptions ro;
  ro.config.dwell_ms = f.dwell_ms;
  ro.config.tick_ms = f.tick_ms;
  ro.config.seed = f.seed.value_or(time_seed());
  ro.config.strict = f.strict;
  ro.dispersion_px = f.dispersion_px;
  ro.min_fixation_ms = f.min_fix_ms;
  ro.document_label = label;

  std::optional<giml::MediaManifest> manifest;
  if (!f.manifest.empty()) {
    try {
      manifest = giml::MediaManifest::load(f.manifest);
    } catch (const std::exception& e) {
      throw EnvironmentError(e.what());
    }
  }
  const auto root = asset_root().value_or(fs::current_path());
  const auto scan = giml::scan_media(doc, root, manifest ? &*manifest : nullptr);
  ro.config.media_durations_ms = scan.durations_ms;
  ro.config.missing_resources = scan.missing;
  std::cout << "seed: " << ro.config.seed << "\n";
  return ro;
}

int cmd_run(const std::string& input, const std::string& trace_path, const std::string& out_dir,
            const EngineFlags& flags) {
  auto doc = load_document(input, language_option(flags.language), false, true);
  if (!doc) return kSemantic;
  const auto options = make_run_options(*doc, flags, fs::path(input).filename().string());
  giml::TraceReadResult trace;
  try {
    trace = giml::read_trace(trace_path);
  } catch (const giml::GazeIoError& e) {
    throw EnvironmentError(e.what());
  }
  for (const auto& w : trace.warnings) std::cerr << trace_path << ": " << w << "\n";

  const auto out = giml::run_trace(*doc, trace.samples, options);
  const auto files = giml::write_run(out, out_dir);

  std::map<std::string, std::size_t> by_kind;
  for (const auto& e : out.events) ++by_kind[std::string(giml::to_string(e.kind))];
  std::cout << "samples: " << trace.samples.size() << " (" << trace.skipped << " skipped)\n";
  std::cout << "events: " << out.events.size() << "\n";
  for (const auto& [k, n] : by_kind) std::cout << "  " << k << ": " << n << "\n";
  std::cout << "fixations: " << out.oculomotor.fixations.size() << "\n";
  std::cout << "wrote " << files.samples.string() << ", " << files.events.string() << ", " << files.aoi.string() << ", "
            << files.fixations.string() << "\n";
  if (out.error) {
    std::cerr << "giml: engine error: " << *out.error << " (logs are partial)\n";
    return kSemantic;
  }
  return kOk;
}

std::atomic<bool> g_cancel{false};
extern "C" void on_signal(int) { g_cancel = true; }

int cmd_serve(const std::string& input, const std::string& bind, const std::string& out_dir,
              const EngineFlags& flags) {
  auto doc = load_document(input, language_option(flags.language), false, true);
  if (!doc) return kSemantic;
  giml::ServeOptions so;
  so.bind = bind;
  so.run = make_run_options(*doc, flags, fs::path(input).filename().string());
  if (!out_dir.empty()) so.out_dir = fs::path(out_dir);
  so.cancel = &g_cancel;
  so.on_listening = [](unsigned short port) { std::cout << "listening on port " << port << std::endl; };
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return giml::serve(*doc, so);
}

int cmd_keywords_dump(bool json) {
  const auto& reg = giml::KeywordRegistry::builtin();
  if (!json) {
    std::cout << reg.source_text();
    return kOk;
  }
  for (const auto& e : reg.entries()) {
    std::cout << "{\"id\":\"" << e.canonical_id << "\",\"kind\":\"" << giml::to_string(e.kind) << "\"";
    for (auto lang : giml::kAllLanguages) std::cout << ",\"" << giml::to_string(lang) << "\":\"" << e.spelling(lang) << "\"";
    std::cout << "}\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"giml: gaze-interaction markup toolkit"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  std::string language, to, output, trace, out_dir = "giml-out", bind = "127.0.0.1:7420";
  bool json = false;
  EngineFlags flags;
  std::uint64_t seed_value = 0;

  auto* validate = app.add_subcommand("validate", "Check markup files or directories");
  validate->add_option("paths", paths, "Files or directories")->required();
  validate->add_option("--language", language, "Force the source language");
  validate->add_flag("--json", json, "Emit one JSON object per diagnostic");

  auto* translate = app.add_subcommand("translate", "Rewrite a file into another keyword language");
  translate->add_option("path", output, "Source file")->required();
  translate->add_option("--to,--language", to, "Target language")->required();
  translate->add_option("--from", language, "Source language when the file does not declare one");
  std::string translate_out;
  translate->add_option("-o,--output", translate_out, "Output file (default stdout)");

  auto* inspect = app.add_subcommand("inspect", "Print the canonical model");
  std::string inspect_path;
  inspect->add_option("path", inspect_path)->required();
  inspect->add_option("--language", language);

  auto add_engine_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", seed_value, "RNG seed (default: time-derived)");
    sub->add_option("--dwell-ms", flags.dwell_ms, "Dwell threshold")->capture_default_str();
    sub->add_option("--tick-ms", flags.tick_ms, "Engine tick")->capture_default_str();
    sub->add_flag("--strict", flags.strict, "Missing resources are fatal");
    sub->add_option("--dispersion-px", flags.dispersion_px, "I-DT dispersion threshold")->capture_default_str();
    sub->add_option("--min-fix-ms", flags.min_fix_ms, "I-DT minimum fixation duration")->capture_default_str();
    sub->add_option("--manifest", flags.manifest, "JSON media manifest with durations");
    sub->add_option("--language", flags.language, "Force the source language");
    sub->add_option("--out-dir", out_dir, "Directory for CSV logs")->capture_default_str();
  };

  auto* run = app.add_subcommand("run", "Replay a gaze trace headlessly and write CSV logs");
  std::string run_path;
  run->add_option("path", run_path)->required();
  run->add_option("trace", trace, "Trace CSV")->required();
  add_engine_flags(run);

  auto* serve = app.add_subcommand("serve", "Run a live session for a remote player");
  std::string serve_path;
  serve->add_option("path", serve_path)->required();
  serve->add_option("--bind", bind, "host:port")->capture_default_str();
  add_engine_flags(serve);

  auto* keywords = app.add_subcommand("keywords", "Keyword table tools");
  keywords->require_subcommand(1);
  auto* dump = keywords->add_subcommand("dump", "Print the embedded keyword table");
  dump->add_flag("--json", json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kEnvironment;
  }

  for (auto* sub : {run, serve})
    if (sub->parsed() && sub->count("--seed") > 0) flags.seed = seed_value;

  try {
    if (validate->parsed()) return cmd_validate(paths, language, json);
    if (translate->parsed()) return cmd_translate(output, to, language, translate_out);
    if (inspect->parsed()) return cmd_inspect(inspect_path, language);
    if (run->parsed()) return cmd_run(run_path, trace, out_dir, flags);
    if (serve->parsed()) return cmd_serve(serve_path, bind, out_dir, flags);
    if (dump->parsed()) return cmd_keywords_dump(json);
  } catch (const EnvironmentError& e) {
    std::cerr << "giml: " << e.what() << "\n";
    return kEnvironment;
  } catch (const giml::GazeIoError& e) {
    std::cerr << "giml: " << e.what() << "\n";
    return kEnvironment;
  } catch (const giml::EngineError& e) {
    std::cerr << "giml: engine error: " << e.what() << "\n";
    return kSemantic;
  }
  return kOk;
}
