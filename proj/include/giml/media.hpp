#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "giml/document.hpp"

namespace giml {

struct WavInfo {
  int channels = 0;
  long long sample_rate = 0;
  int bits_per_sample = 0;
  long long data_bytes = 0;
  double duration_ms = 0;
};

/// Reads the RIFF/WAVE header of uncompressed audio. Returns nullopt for
/// anything that is not a PCM WAVE stream with fmt and data chunks.
std::optional<WavInfo> probe_wav(std::string_view bytes);
std::optional<WavInfo> probe_wav_file(const std::filesystem::path& path);

/// Optional JSON side file describing media the engine cannot decode:
///   {"durations_ms": {"name": 1234}, "image_sizes": {"name": [w, h]}}
struct MediaManifest {
  std::map<std::string, long long> durations_ms;
  std::map<std::string, std::pair<int, int>> image_sizes;

  static MediaManifest parse(std::string_view json_text);  // throws std::invalid_argument
  static MediaManifest load(const std::filesystem::path& path);
};

struct MediaScan {
  std::map<std::string, long long> durations_ms;  // single-play durations by resource name
  std::set<std::string> missing;                  // resources whose file does not exist
};

/// Looks up every declared resource below `asset_root` (relative resolved
/// paths are taken relative to it). Durations come from the manifest first,
/// then from WAV headers.
MediaScan scan_media(const GimlDocument& doc, const std::filesystem::path& asset_root,
                     const MediaManifest* manifest = nullptr);

}  // namespace giml
