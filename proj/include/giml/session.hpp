#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "giml/engine.hpp"
#include "giml/gaze_io.hpp"

namespace giml {

/// Regions of the current frame that contain a point, in declaration order.
std::vector<std::string> regions_at(const RenderFrame& frame, double x, double y);

/// Drives an engine with gaze samples and keeps everything the CSV logs need.
/// cmd_run and cmd_serve both record through this class.
class SessionRecorder {
 public:
  explicit SessionRecorder(Engine& engine);

  /// One engine tick. `samples` are the raw samples consumed by this tick
  /// (the last valid-or-not one is the gaze); they are logged individually.
  std::vector<EngineEvent> tick(long long t_ms, const std::vector<GazeSample>& samples);
  /// Pause-scene navigation requested outside the sample stream.
  std::vector<EngineEvent> pause();
  std::vector<EngineEvent> stop(long long t_ms, std::string_view reason);

  const std::vector<EngineEvent>& events() const { return events_; }
  const std::vector<SampleRow>& samples() const { return samples_; }
  const std::vector<TickRecord>& ticks() const { return ticks_; }
  const std::vector<GazeSample>& raw_samples() const { return raw_; }
  std::vector<AoiRow> aoi() const;
  Engine& engine() { return engine_; }

 private:
  Engine& engine_;
  std::vector<EngineEvent> events_;
  std::vector<SampleRow> samples_;
  std::vector<TickRecord> ticks_;
  std::vector<GazeSample> raw_;
  std::optional<GazeSample> last_;
};

/// Groups samples into engine ticks on the grid 0, tick_ms, 2*tick_ms, ...
/// A tick consumes every sample with a timestamp in (previous tick, tick].
/// The grid runs up to the first tick at or after the last sample.
struct TickBatch {
  long long t_ms = 0;
  std::vector<GazeSample> samples;
};
std::vector<TickBatch> batch_ticks(const std::vector<GazeSample>& samples, long long tick_ms);

struct RunOptions {
  EngineConfig config;
  std::string document_label;
  double dispersion_px = 80;
  long long min_fixation_ms = 100;
};

struct RunOutput {
  std::vector<EngineEvent> events;
  std::vector<SampleRow> samples;
  std::vector<AoiRow> aoi;
  OculomotorEvents oculomotor;
  RunHeader header;
  bool started = false;
  std::optional<std::string> error;  // fatal engine error; logs hold what ran before it
};

/// Headless replay of a trace. An empty trace starts nothing and yields
/// header-only logs. Escape in the key column stops the run early. An
/// EngineError ends the replay and is reported in `error`.
RunOutput run_trace(const GimlDocument& doc, const std::vector<GazeSample>& samples, const RunOptions& options,
                    CallbackRegistry callbacks = {});

struct RunFiles {
  std::filesystem::path samples;
  std::filesystem::path events;
  std::filesystem::path aoi;
  std::filesystem::path fixations;
};
RunFiles write_run(const RunOutput& out, const std::filesystem::path& out_dir);

}  // namespace giml
