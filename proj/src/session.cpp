#include "giml/session.hpp"

#include <algorithm>

namespace giml {

std::vector<std::string> regions_at(const RenderFrame& frame, double x, double y) {
  std::vector<std::string> out;
  for (const auto& r : frame.regions)
    if (hit_test(r.shape, r.center_x, r.center_y, r.size_x, r.size_y, x, y)) out.push_back(r.name);
  return out;
}

SessionRecorder::SessionRecorder(Engine& engine) : engine_(engine) {
  events_ = engine_.initial_events();
}

std::vector<EngineEvent> SessionRecorder::tick(long long t_ms, const std::vector<GazeSample>& samples) {
  const RenderFrame& before = engine_.current_frame();
  for (const auto& s : samples) {
    SampleRow row;
    row.t_ms = s.t_ms;
    row.x = s.x;
    row.y = s.y;
    row.valid = s.valid;
    row.pupil = s.pupil;
    row.scene = before.scene;
    if (s.valid) {
      std::string joined;
      for (const auto& n : regions_at(before, s.x, s.y)) joined += (joined.empty() ? "" : ";") + n;
      row.region_hit = joined;
    }
    samples_.push_back(std::move(row));
    raw_.push_back(s);
  }
  if (!samples.empty()) last_ = samples.back();

  InputTick in;
  in.t_ms = t_ms;
  if (last_) in.gaze = GazePoint{last_->x, last_->y, last_->valid};
  for (const auto& s : samples) in.keys.insert(in.keys.end(), s.keys.begin(), s.keys.end());

  TickRecord rec;
  rec.t_ms = t_ms;
  rec.scene = before.scene;
  if (in.gaze && in.gaze->valid) rec.inside = regions_at(before, in.gaze->x, in.gaze->y);
  ticks_.push_back(std::move(rec));

  auto evs = engine_.step(in);
  events_.insert(events_.end(), evs.begin(), evs.end());
  return evs;
}

std::vector<EngineEvent> SessionRecorder::pause() {
  auto evs = engine_.pause(engine_.now());
  events_.insert(events_.end(), evs.begin(), evs.end());
  return evs;
}

std::vector<EngineEvent> SessionRecorder::stop(long long t_ms, std::string_view reason) {
  auto evs = engine_.stop(t_ms, reason);
  events_.insert(events_.end(), evs.begin(), evs.end());
  return evs;
}

std::vector<AoiRow> SessionRecorder::aoi() const {
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& s : engine_.scenes())
    for (const auto& r : s.regions) keys.emplace_back(s.name, r.name);
  return accumulate_aoi(ticks_, events_, keys);
}

std::vector<TickBatch> batch_ticks(const std::vector<GazeSample>& samples, long long tick_ms) {
  std::vector<TickBatch> out;
  if (samples.empty() || tick_ms <= 0) return out;
  const long long last = samples.back().t_ms;
  std::size_t i = 0;
  for (long long t = 0;; t += tick_ms) {
    TickBatch b;
    b.t_ms = t;
    while (i < samples.size() && samples[i].t_ms <= t) b.samples.push_back(samples[i++]);
    out.push_back(std::move(b));
    if (t >= last) break;
  }
  return out;
}

RunOutput run_trace(const GimlDocument& doc, const std::vector<GazeSample>& samples, const RunOptions& options,
                    CallbackRegistry callbacks) {
  RunOutput out;
  out.header.document = options.document_label;
  out.header.seed = options.config.seed;
  out.header.dwell_ms = options.config.dwell_ms;
  out.header.tick_ms = options.config.tick_ms;
  out.oculomotor = detect_fixations(samples, options.dispersion_px, options.min_fixation_ms);
  if (samples.empty()) return out;

  std::optional<Engine> engine;
  try {
    engine.emplace(doc, options.config, std::move(callbacks));
  } catch (const EngineError& e) {
    out.error = e.what();
    return out;
  }
  SessionRecorder rec(*engine);
  out.started = true;
  long long last_t = 0;
  try {
    for (const auto& batch : batch_ticks(samples, options.config.tick_ms)) {
      rec.tick(batch.t_ms, batch.samples);
      last_t = batch.t_ms;
      if (engine->stopped()) break;
    }
    if (!engine->stopped()) rec.stop(last_t, "end");
  } catch (const EngineError& e) {
    out.error = e.what();
  }
  out.events = rec.events();
  out.samples = rec.samples();
  out.aoi = rec.aoi();
  if (out.error) out.header.extra.emplace_back("status", "aborted: " + *out.error);
  return out;
}

RunFiles write_run(const RunOutput& out, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw GazeIoError("cannot create output directory '" + out_dir.string() + "'");
  RunFiles files{out_dir / "samples.csv", out_dir / "events.csv", out_dir / "aoi.csv", out_dir / "fixations.csv"};
  write_samples_csv(files.samples, out.samples, out.header);
  write_events_csv(files.events, out.events, out.header);
  write_aoi_csv(files.aoi, out.aoi, out.header);
  write_file_atomic(files.fixations, format_fixations_csv(out.oculomotor, out.header));
  return files;
}

}  // namespace giml
