#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "giml/engine.hpp"

namespace giml {

class GazeIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GazeSample {
  long long t_ms = 0;
  double x = 0;
  double y = 0;
  bool valid = true;
  std::optional<double> pupil;
  std::vector<std::string> keys;
  bool operator==(const GazeSample&) const = default;
};

struct TraceReadResult {
  std::vector<GazeSample> samples;
  std::size_t skipped = 0;  // malformed lines
  std::vector<std::string> warnings;
};

/// Trace format: UTF-8 text, '#' comment lines, a header line naming the
/// columns (with or without a leading '#'), then comma-separated rows.
/// Required columns: t_ms, x, y, valid. Optional: pupil, key (keys joined
/// with ';'). Other columns are ignored, so samples.csv reads back as a trace.
TraceReadResult parse_trace(std::string_view text);
/// Throws GazeIoError when the file cannot be read or has no usable header.
TraceReadResult read_trace(const std::filesystem::path& path);
std::string format_trace(const std::vector<GazeSample>& samples);

struct Fixation {
  long long start_ms = 0;
  long long end_ms = 0;
  double x = 0;
  double y = 0;
  double dispersion = 0;
  std::size_t sample_count = 0;
  std::size_t first_index = 0;  // index of the first sample in the input
  bool operator==(const Fixation&) const = default;
};

struct Saccade {
  long long start_ms = 0;
  long long end_ms = 0;
  double from_x = 0;
  double from_y = 0;
  double to_x = 0;
  double to_y = 0;
  double amplitude = 0;
  bool operator==(const Saccade&) const = default;
};

struct OculomotorEvents {
  std::vector<Fixation> fixations;
  std::vector<Saccade> saccades;
};

/// Dispersion-threshold identification. A window starts at the earliest
/// unconsumed valid sample and spans at least `min_duration_ms` (last minus
/// first timestamp); if its dispersion (max x - min x) + (max y - min y) is
/// within the threshold it is extended sample by sample while it stays
/// within, and becomes a fixation. Otherwise the start moves on by one.
/// Invalid samples end every window. Saccades join consecutive fixations.
OculomotorEvents detect_fixations(const std::vector<GazeSample>& samples, double dispersion_px,
                                  long long min_duration_ms);

struct RunHeader {
  std::string document;
  std::uint64_t seed = 0;
  long long dwell_ms = 1000;
  long long tick_ms = 10;
  std::vector<std::pair<std::string, std::string>> extra;
};

struct SampleRow {
  long long t_ms = 0;
  double x = 0;
  double y = 0;
  bool valid = false;
  std::optional<double> pupil;
  std::string scene;
  std::string region_hit;  // regions under the gaze, ';'-joined
  bool operator==(const SampleRow&) const = default;
};

/// Per tick: the active scene and the enabled regions containing the gaze.
struct TickRecord {
  long long t_ms = 0;
  std::string scene;
  std::vector<std::string> inside;
};

struct AoiRow {
  std::string scene;
  std::string region;
  long long dwell_ms = 0;
  long long entry_count = 0;
  std::optional<long long> first_entry_ms;
  long long reaction_count = 0;
  bool operator==(const AoiRow&) const = default;
};

/// Each tick record holds until the next one, so a region's dwell is the
/// sum of the intervals that start inside it. `regions` fixes the row order
/// and lists regions that were never looked at.
std::vector<AoiRow> accumulate_aoi(const std::vector<TickRecord>& ticks, const std::vector<EngineEvent>& events,
                                   const std::vector<std::pair<std::string, std::string>>& regions);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);
/// Quotes a field when it holds a comma, quote or line break.
std::string csv_field(std::string_view s);

std::string format_samples_csv(const std::vector<SampleRow>& rows, const RunHeader& header);
std::string format_events_csv(const std::vector<EngineEvent>& events, const RunHeader& header);
std::string format_aoi_csv(const std::vector<AoiRow>& rows, const RunHeader& header);
std::string format_fixations_csv(const OculomotorEvents& ev, const RunHeader& header);

/// Writes through a temporary file and renames it into place. On failure the
/// partial file is removed and GazeIoError is thrown.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
void write_samples_csv(const std::filesystem::path& path, const std::vector<SampleRow>& rows, const RunHeader& header);
void write_events_csv(const std::filesystem::path& path, const std::vector<EngineEvent>& events,
                      const RunHeader& header);
void write_aoi_csv(const std::filesystem::path& path, const std::vector<AoiRow>& rows, const RunHeader& header);

}  // namespace giml
