#include "giml/media.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace giml {

namespace {

std::uint32_t le32(std::string_view b, std::size_t at) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[at])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[at + 3])) << 24;
}

std::uint16_t le16(std::string_view b, std::size_t at) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[at]) |
                                    static_cast<unsigned char>(b[at + 1]) << 8);
}

}  // namespace

std::optional<WavInfo> probe_wav(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") return std::nullopt;
  WavInfo info;
  long long byte_rate = 0;
  bool fmt = false;
  bool data = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const auto id = b.substr(pos, 4);
    const std::uint32_t size = le32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > b.size()) return std::nullopt;
      const auto format = le16(b, body);
      if (format != 1 && format != 3 && format != 0xFFFE) return std::nullopt;
      info.channels = le16(b, body + 2);
      info.sample_rate = le32(b, body + 4);
      byte_rate = le32(b, body + 8);
      info.bits_per_sample = le16(b, body + 14);
      fmt = true;
    } else if (id == "data") {
      // The header is trusted even when the file is truncated.
      info.data_bytes = size;
      data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!fmt || !data || byte_rate <= 0) return std::nullopt;
  info.duration_ms = static_cast<double>(info.data_bytes) * 1000.0 / static_cast<double>(byte_rate);
  return info;
}

std::optional<WavInfo> probe_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string head(4096, '\0');
  in.read(head.data(), static_cast<std::streamsize>(head.size()));
  head.resize(static_cast<std::size_t>(in.gcount()));
  return probe_wav(head);
}

MediaManifest MediaManifest::parse(std::string_view json_text) {
  MediaManifest m;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("media manifest: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("media manifest: top level must be an object");
  if (auto it = j.find("durations_ms"); it != j.end()) {
    for (const auto& [k, v] : it->items()) {
      if (!v.is_number()) throw std::invalid_argument("media manifest: duration of '" + k + "' is not a number");
      m.durations_ms[fold_case(k)] = static_cast<long long>(std::llround(v.get<double>()));
    }
  }
  if (auto it = j.find("image_sizes"); it != j.end()) {
    for (const auto& [k, v] : it->items()) {
      if (!v.is_array() || v.size() != 2) throw std::invalid_argument("media manifest: size of '" + k + "' must be [w, h]");
      m.image_sizes[fold_case(k)] = {v[0].get<int>(), v[1].get<int>()};
    }
  }
  return m;
}

MediaManifest MediaManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read media manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

MediaScan scan_media(const GimlDocument& doc, const std::filesystem::path& asset_root, const MediaManifest* manifest) {
  MediaScan scan;
  // Windows folders in the document cannot exist on this host; their
  // contents are looked up below the asset root instead.
  GimlDocument rebased = doc;
  auto drive = [](const std::optional<std::string>& f) {
    return f && f->size() >= 2 && (f->at(1) == ':' || f->rfind("\\\\", 0) == 0);
  };
#ifndef _WIN32
  if (drive(rebased.settings.folder)) rebased.settings.folder.reset();
  for (auto* f : {&rebased.images_folder, &rebased.sounds_folder, &rebased.movies_folder})
    if (drive(*f)) f->reset();
#endif
  auto locate = [&](ResourceKind kind, const std::string& path) {
    std::string resolved = resolve_resource_path(rebased, kind, path);
    std::replace(resolved.begin(), resolved.end(), '\\', '/');
    std::filesystem::path p(resolved);
    if (p.is_relative()) p = asset_root / p;
    return p;
  };
  auto timed = [&](ResourceKind kind, const std::string& name, const std::string& path) {
    const auto p = locate(kind, path);
    std::error_code ec;
    const bool exists = std::filesystem::exists(p, ec);
    if (!exists) scan.missing.insert(name);
    if (manifest) {
      if (auto it = manifest->durations_ms.find(name); it != manifest->durations_ms.end()) {
        scan.durations_ms[name] = it->second;
        return;
      }
    }
    if (exists)
      if (auto w = probe_wav_file(p)) scan.durations_ms[name] = static_cast<long long>(std::llround(w->duration_ms));
  };
  for (const auto& i : doc.images) {
    std::error_code ec;
    if (!std::filesystem::exists(locate(ResourceKind::image, i.path), ec)) scan.missing.insert(i.name);
  }
  for (const auto& s : doc.sounds) timed(ResourceKind::sound, s.name, s.path);
  for (const auto& m : doc.movies) timed(ResourceKind::movie, m.name, m.path);
  return scan;
}

}  // namespace giml
