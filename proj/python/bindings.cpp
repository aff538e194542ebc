#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "giml/analyzer.hpp"
#include "giml/document.hpp"
#include "giml/gaze_io.hpp"
#include "giml/keywords.hpp"
#include "giml/session.hpp"

namespace py = pybind11;

namespace {

giml::Language lang_arg(const std::string& code) {
  auto lang = giml::parse_language(code);
  if (!lang) throw py::value_error("unknown language '" + code + "'");
  return *lang;
}

std::optional<giml::Language> opt_lang(const std::optional<std::string>& code) {
  if (!code) return std::nullopt;
  return lang_arg(*code);
}

py::dict diag_dict(const giml::Diagnostic& d) {
  py::dict out;
  out["severity"] = std::string(giml::to_string(d.severity));
  out["code"] = d.code;
  out["path"] = d.location.element_path;
  out["line"] = d.location.line;
  out["column"] = d.location.column;
  out["message"] = d.message;
  out["suggestion"] = d.suggestion ? py::cast(*d.suggestion) : py::none();
  return out;
}

py::list diag_list(const std::vector<giml::Diagnostic>& diags) {
  py::list out;
  for (const auto& d : diags) out.append(diag_dict(d));
  return out;
}

giml::GimlDocument parse_or_raise(const std::string& text, const std::optional<std::string>& language) {
  auto parsed = giml::parse_document(text, opt_lang(language));
  if (!parsed.document) {
    std::string msg = "document does not parse";
    if (!parsed.diagnostics.empty()) msg += ": " + giml::format_line(parsed.diagnostics.front());
    throw py::value_error(msg);
  }
  return std::move(*parsed.document);
}

// Samples are (t_ms, x, y, valid) tuples, or dicts with optional pupil and keys.
std::vector<giml::GazeSample> samples_arg(const py::iterable& items) {
  std::vector<giml::GazeSample> out;
  for (auto item : items) {
    giml::GazeSample s;
    if (py::isinstance<py::dict>(item)) {
      auto d = item.cast<py::dict>();
      s.t_ms = d["t_ms"].cast<long long>();
      s.x = d["x"].cast<double>();
      s.y = d["y"].cast<double>();
      if (d.contains("valid")) s.valid = d["valid"].cast<bool>();
      if (d.contains("pupil") && !d["pupil"].is_none()) s.pupil = d["pupil"].cast<double>();
      if (d.contains("keys")) s.keys = d["keys"].cast<std::vector<std::string>>();
    } else {
      auto t = item.cast<py::sequence>();
      s.t_ms = t[0].cast<long long>();
      s.x = t[1].cast<double>();
      s.y = t[2].cast<double>();
      if (t.size() > 3) s.valid = t[3].cast<bool>();
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gaze-interaction markup toolkit and headless runtime";

  m.def("languages", [] {
    std::vector<std::string> out;
    for (auto l : giml::kAllLanguages) out.emplace_back(giml::to_string(l));
    return out;
  });

  m.def("keywords_table", [] { return std::string(giml::KeywordRegistry::builtin().source_text()); });

  m.def(
      "parse",
      [](const std::string& text, std::optional<std::string> language) {
        auto parsed = giml::parse_document(text, opt_lang(language));
        py::dict out;
        out["ok"] = parsed.ok();
        out["diagnostics"] = diag_list(parsed.diagnostics);
        out["dump"] = parsed.document ? py::cast(giml::dump(*parsed.document)) : py::none();
        return out;
      },
      py::arg("text"), py::arg("language") = py::none());

  m.def(
      "inspect",
      [](const std::string& text, std::optional<std::string> language) {
        return giml::dump(parse_or_raise(text, language));
      },
      py::arg("text"), py::arg("language") = py::none());

  m.def(
      "validate",
      [](const std::string& text, std::optional<std::string> language, std::optional<std::string> resource_root) {
        auto parsed = giml::parse_document(text, opt_lang(language));
        auto diags = parsed.diagnostics;
        if (parsed.document) {
          giml::ValidateOptions vo;
          if (resource_root) vo.resource_root = *resource_root;
          auto more = giml::validate(*parsed.document, vo);
          diags.insert(diags.end(), more.begin(), more.end());
        }
        return diag_list(diags);
      },
      py::arg("text"), py::arg("language") = py::none(), py::arg("resource_root") = py::none());

  m.def(
      "translate",
      [](const std::string& text, const std::string& target, std::optional<std::string> source) {
        auto result = giml::translate(text, lang_arg(target), opt_lang(source));
        if (!result.ok()) {
          std::string msg = "translation failed";
          if (!result.diagnostics.empty()) msg += ": " + giml::format_line(result.diagnostics.front());
          throw py::value_error(msg);
        }
        return *result.text;
      },
      py::arg("text"), py::arg("target"), py::arg("source") = py::none());

  m.def(
      "canonically_equal",
      [](const std::string& a, const std::string& b) {
        return giml::canonically_equal(parse_or_raise(a, std::nullopt), parse_or_raise(b, std::nullopt));
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "run",
      [](const std::string& text, const py::iterable& samples, std::uint64_t seed, long long dwell_ms,
         long long tick_ms, double dispersion_px, long long min_fix_ms) {
        auto doc = parse_or_raise(text, std::nullopt);
        giml::RunOptions ro;
        ro.config.seed = seed;
        ro.config.dwell_ms = dwell_ms;
        ro.config.tick_ms = tick_ms;
        ro.dispersion_px = dispersion_px;
        ro.min_fixation_ms = min_fix_ms;
        ro.document_label = "<python>";
        auto trace = samples_arg(samples);
        giml::RunOutput out;
        {
          py::gil_scoped_release release;
          out = giml::run_trace(doc, trace, ro);
        }
        py::list events;
        for (const auto& e : out.events)
          events.append(py::make_tuple(e.t_ms, std::string(giml::to_string(e.kind)), e.scene, e.region, e.payload));
        py::dict result;
        result["events"] = events;
        result["events_csv"] = giml::format_events_csv(out.events, out.header);
        result["samples_csv"] = giml::format_samples_csv(out.samples, out.header);
        result["aoi_csv"] = giml::format_aoi_csv(out.aoi, out.header);
        result["fixations_csv"] = giml::format_fixations_csv(out.oculomotor, out.header);
        result["error"] = out.error ? py::cast(*out.error) : py::none();
        return result;
      },
      py::arg("text"), py::arg("samples"), py::arg("seed") = 0, py::arg("dwell_ms") = 1000, py::arg("tick_ms") = 10,
      py::arg("dispersion_px") = 80.0, py::arg("min_fix_ms") = 100);

  m.def(
      "detect_fixations",
      [](const py::iterable& samples, double dispersion_px, long long min_duration_ms) {
        auto ev = giml::detect_fixations(samples_arg(samples), dispersion_px, min_duration_ms);
        py::list out;
        for (const auto& f : ev.fixations) {
          py::dict d;
          d["start_ms"] = f.start_ms;
          d["end_ms"] = f.end_ms;
          d["x"] = f.x;
          d["y"] = f.y;
          d["dispersion"] = f.dispersion;
          d["sample_count"] = f.sample_count;
          out.append(d);
        }
        return out;
      },
      py::arg("samples"), py::arg("dispersion_px") = 80.0, py::arg("min_duration_ms") = 100);
}
