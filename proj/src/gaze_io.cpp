#include "giml/gaze_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace giml {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<bool> parse_valid(std::string_view s) {
  auto f = fold_case(s);
  if (f == "1" || f == "true" || f == "yes") return true;
  if (f == "0" || f == "false" || f == "no") return false;
  return std::nullopt;
}

struct Columns {
  int t = -1, x = -1, y = -1, valid = -1, pupil = -1, key = -1;
};

std::optional<Columns> parse_header(std::string_view line) {
  line = trim(line);
  while (!line.empty() && line.front() == '#') line.remove_prefix(1);
  auto cols = split(line, ',');
  Columns c;
  for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
    const auto name = fold_case(cols[static_cast<std::size_t>(i)]);
    if (name == "t_ms") c.t = i;
    else if (name == "x") c.x = i;
    else if (name == "y") c.y = i;
    else if (name == "valid") c.valid = i;
    else if (name == "pupil") c.pupil = i;
    else if (name == "key") c.key = i;
  }
  if (c.t != 0 || c.x < 0 || c.y < 0 || c.valid < 0) return std::nullopt;
  return c;
}

/// Splits one CSV row, honouring double-quoted fields.
std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::string(trim(cur)));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::string(trim(cur)));
  return out;
}

std::string header_lines(const RunHeader& h) {
  std::string s;
  s += "# document: " + h.document + "\n";
  s += "# seed: " + std::to_string(h.seed) + "\n";
  s += "# dwell_ms: " + std::to_string(h.dwell_ms) + "\n";
  s += "# tick_ms: " + std::to_string(h.tick_ms) + "\n";
  for (const auto& [k, v] : h.extra) s += "# " + k + ": " + v + "\n";
  return s;
}

}  // namespace

std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

TraceReadResult parse_trace(std::string_view text) {
  TraceReadResult result;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::optional<Columns> cols;
  std::size_t line_no = 0;
  long long last_t = 0;
  bool have_last = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (!cols) {
      cols = parse_header(line);
      if (!cols && line.front() != '#') throw GazeIoError("trace has no t_ms,x,y,valid header before data");
      continue;
    }
    if (line.front() == '#') continue;
    auto f = split_csv(line);
    auto bad = [&](std::string why) {
      ++result.skipped;
      result.warnings.push_back("line " + std::to_string(line_no) + ": " + why);
    };
    const auto need = static_cast<std::size_t>(std::max({cols->t, cols->x, cols->y, cols->valid}));
    if (f.size() <= need) {
      bad("too few columns");
      continue;
    }
    auto t = parse_number(f[static_cast<std::size_t>(cols->t)]);
    auto valid = parse_valid(f[static_cast<std::size_t>(cols->valid)]);
    auto x = parse_number(f[static_cast<std::size_t>(cols->x)]);
    auto y = parse_number(f[static_cast<std::size_t>(cols->y)]);
    if (!t || !valid || std::floor(*t) != *t) {
      bad("bad timestamp or validity");
      continue;
    }
    GazeSample s;
    s.t_ms = static_cast<long long>(*t);
    s.valid = *valid;
    if (!x || !y) {
      if (s.valid) {
        bad("non-numeric coordinates");
        continue;
      }
    } else {
      s.x = *x;
      s.y = *y;
    }
    if (have_last && s.t_ms < last_t) {
      bad("timestamp goes backwards");
      continue;
    }
    if (cols->pupil >= 0 && static_cast<std::size_t>(cols->pupil) < f.size())
      s.pupil = parse_number(f[static_cast<std::size_t>(cols->pupil)]);
    if (cols->key >= 0 && static_cast<std::size_t>(cols->key) < f.size())
      for (auto k : split(f[static_cast<std::size_t>(cols->key)], ';'))
        if (!k.empty()) s.keys.emplace_back(k);
    last_t = s.t_ms;
    have_last = true;
    result.samples.push_back(std::move(s));
  }
  if (!cols) throw GazeIoError("trace has no t_ms,x,y,valid header");
  return result;
}

TraceReadResult read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw GazeIoError("cannot read trace '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

std::string format_trace(const std::vector<GazeSample>& samples) {
  std::string out = "#t_ms,x,y,valid,pupil,key\n";
  for (const auto& s : samples) {
    std::string keys;
    for (const auto& k : s.keys) keys += (keys.empty() ? "" : ";") + k;
    out += std::to_string(s.t_ms) + "," + format_number(s.x) + "," + format_number(s.y) + "," +
           (s.valid ? "1" : "0") + "," + (s.pupil ? format_number(*s.pupil) : "") + "," + csv_field(keys) + "\n";
  }
  return out;
}

OculomotorEvents detect_fixations(const std::vector<GazeSample>& samples, double dispersion_px,
                                  long long min_duration_ms) {
  OculomotorEvents ev;
  const std::size_t n = samples.size();
  std::size_t i = 0;
  while (i < n) {
    if (!samples[i].valid) {
      ++i;
      continue;
    }
    // Smallest window from i that lasts long enough, inside one valid run.
    std::size_t j = i;
    double minx = samples[i].x, maxx = minx, miny = samples[i].y, maxy = miny;
    bool reached = false;
    while (j < n && samples[j].valid) {
      minx = std::min(minx, samples[j].x);
      maxx = std::max(maxx, samples[j].x);
      miny = std::min(miny, samples[j].y);
      maxy = std::max(maxy, samples[j].y);
      if (samples[j].t_ms - samples[i].t_ms >= min_duration_ms) {
        reached = true;
        break;
      }
      ++j;
    }
    if (!reached) {
      // No window from here fits before the run ends; neither can any later start in the run.
      while (i < n && samples[i].valid) ++i;
      continue;
    }
    if ((maxx - minx) + (maxy - miny) > dispersion_px) {
      ++i;
      continue;
    }
    while (j + 1 < n && samples[j + 1].valid) {
      const auto& s = samples[j + 1];
      const double d = (std::max(maxx, s.x) - std::min(minx, s.x)) + (std::max(maxy, s.y) - std::min(miny, s.y));
      if (d > dispersion_px) break;
      minx = std::min(minx, s.x);
      maxx = std::max(maxx, s.x);
      miny = std::min(miny, s.y);
      maxy = std::max(maxy, s.y);
      ++j;
    }
    Fixation f;
    f.start_ms = samples[i].t_ms;
    f.end_ms = samples[j].t_ms;
    f.sample_count = j - i + 1;
    f.first_index = i;
    double sx = 0, sy = 0;
    for (std::size_t k = i; k <= j; ++k) {
      sx += samples[k].x;
      sy += samples[k].y;
    }
    f.x = sx / static_cast<double>(f.sample_count);
    f.y = sy / static_cast<double>(f.sample_count);
    f.dispersion = (maxx - minx) + (maxy - miny);
    ev.fixations.push_back(f);
    i = j + 1;
  }
  for (std::size_t k = 1; k < ev.fixations.size(); ++k) {
    const auto& a = ev.fixations[k - 1];
    const auto& b = ev.fixations[k];
    ev.saccades.push_back(Saccade{a.end_ms, b.start_ms, a.x, a.y, b.x, b.y, std::hypot(b.x - a.x, b.y - a.y)});
  }
  return ev;
}

std::vector<AoiRow> accumulate_aoi(const std::vector<TickRecord>& ticks, const std::vector<EngineEvent>& events,
                                   const std::vector<std::pair<std::string, std::string>>& regions) {
  std::vector<AoiRow> rows;
  std::map<std::pair<std::string, std::string>, std::size_t> index;
  auto row = [&](const std::string& scene, const std::string& region) -> AoiRow& {
    auto key = std::make_pair(scene, region);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      rows.push_back(AoiRow{scene, region, 0, 0, std::nullopt, 0});
    }
    return rows[it->second];
  };
  for (const auto& [s, r] : regions) row(s, r);

  const TickRecord* prev = nullptr;
  for (std::size_t i = 0; i < ticks.size(); ++i) {
    const auto& t = ticks[i];
    const long long hold = i + 1 < ticks.size() ? ticks[i + 1].t_ms - t.t_ms : 0;
    std::set<std::string> seen;
    for (const auto& name : t.inside) {
      if (!seen.insert(name).second) continue;
      auto& r = row(t.scene, name);
      r.dwell_ms += hold;
      const bool was_inside = prev && prev->scene == t.scene &&
                              std::find(prev->inside.begin(), prev->inside.end(), name) != prev->inside.end();
      if (!was_inside) {
        ++r.entry_count;
        if (!r.first_entry_ms) r.first_entry_ms = t.t_ms;
      }
    }
    prev = &t;
  }
  for (const auto& e : events)
    if (e.kind == EventKind::reaction_started) ++row(e.scene, e.region).reaction_count;
  return rows;
}

std::string format_samples_csv(const std::vector<SampleRow>& rows, const RunHeader& header) {
  std::string out = header_lines(header) + "t_ms,x,y,valid,pupil,scene,region_hit\n";
  for (const auto& r : rows) {
    out += std::to_string(r.t_ms) + "," + format_number(r.x) + "," + format_number(r.y) + "," +
           (r.valid ? "1" : "0") + "," + (r.pupil ? format_number(*r.pupil) : "") + "," + csv_field(r.scene) + "," +
           csv_field(r.region_hit) + "\n";
  }
  return out;
}

std::string format_events_csv(const std::vector<EngineEvent>& events, const RunHeader& header) {
  std::string out = header_lines(header) + "t_ms,kind,scene,region,payload\n";
  for (const auto& e : events) {
    out += std::to_string(e.t_ms) + "," + std::string(to_string(e.kind)) + "," + csv_field(e.scene) + "," +
           csv_field(e.region) + "," + csv_field(e.payload) + "\n";
  }
  return out;
}

std::string format_aoi_csv(const std::vector<AoiRow>& rows, const RunHeader& header) {
  std::string out = header_lines(header) + "scene,region,dwell_ms,entry_count,first_entry_ms,reaction_count\n";
  for (const auto& r : rows) {
    out += csv_field(r.scene) + "," + csv_field(r.region) + "," + std::to_string(r.dwell_ms) + "," +
           std::to_string(r.entry_count) + "," + (r.first_entry_ms ? std::to_string(*r.first_entry_ms) : "") + "," +
           std::to_string(r.reaction_count) + "\n";
  }
  return out;
}

std::string format_fixations_csv(const OculomotorEvents& ev, const RunHeader& header) {
  std::string out = header_lines(header) + "kind,start_ms,end_ms,x,y,to_x,to_y,dispersion_or_amplitude,samples\n";
  for (const auto& f : ev.fixations)
    out += "fixation," + std::to_string(f.start_ms) + "," + std::to_string(f.end_ms) + "," + format_number(f.x) + "," +
           format_number(f.y) + ",,," + format_number(f.dispersion) + "," + std::to_string(f.sample_count) + "\n";
  for (const auto& s : ev.saccades)
    out += "saccade," + std::to_string(s.start_ms) + "," + std::to_string(s.end_ms) + "," + format_number(s.from_x) +
           "," + format_number(s.from_y) + "," + format_number(s.to_x) + "," + format_number(s.to_y) + "," +
           format_number(s.amplitude) + ",\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (out) out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw GazeIoError("cannot write '" + path.string() + "'");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw GazeIoError("cannot write '" + path.string() + "'");
  }
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<SampleRow>& rows, const RunHeader& header) {
  write_file_atomic(path, format_samples_csv(rows, header));
}

void write_events_csv(const std::filesystem::path& path, const std::vector<EngineEvent>& events,
                      const RunHeader& header) {
  write_file_atomic(path, format_events_csv(events, header));
}

void write_aoi_csv(const std::filesystem::path& path, const std::vector<AoiRow>& rows, const RunHeader& header) {
  write_file_atomic(path, format_aoi_csv(rows, header));
}

}  // namespace giml
