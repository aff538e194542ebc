#include "giml/protocol.hpp"

#include "json.hpp"

namespace giml::protocol {

using nlohmann::json;

namespace {

std::string wrap(std::string_view type, std::uint64_t seq, json body) {
  json m;
  m["type"] = type;
  m["seq"] = seq;
  m["body"] = std::move(body);
  return m.dump();
}

json style_json(const FontStyle& s) {
  std::string letters;
  if (s.italic) letters += 'i';
  if (s.bold) letters += 'b';
  if (s.underline) letters += 'u';
  if (s.strikeout) letters += 's';
  return letters;
}

json frame_body(const RenderFrame& f) {
  json b;
  b["frame_seq"] = f.frame_seq;
  b["t_ms"] = f.t_ms;
  b["scene"] = f.scene;
  b["background"] = {{"color", f.background_color},
                     {"image", f.background_image},
                     {"image_missing", f.background_image_missing}};
  json regions = json::array();
  for (const auto& r : f.regions) {
    json j;
    j["name"] = r.name;
    j["shape"] = to_string(r.shape);
    j["state"] = to_string(r.state);
    j["center"] = {r.center_x, r.center_y};
    j["size"] = {r.size_x, r.size_y};
    j["transform"] = {{"scale", r.transform.scale},
                      {"angle_deg", r.transform.angle_deg},
                      {"offset", {r.transform.offset_x, r.transform.offset_y}},
                      {"region", r.animate_region},
                      {"image", r.animate_image}};
    json image = {{"name", r.image}, {"missing", r.image_missing}, {"offset", {r.image_offset_x, r.image_offset_y}}};
    if (r.image_size_x && r.image_size_y) image["size"] = {*r.image_size_x, *r.image_size_y};
    j["image"] = image;
    j["text"] = {{"value", r.text},
                 {"font", r.font},
                 {"size", r.font_size},
                 {"style", style_json(r.font_style)},
                 {"color", r.font_color},
                 {"offset", {r.text_offset_x, r.text_offset_y}}};
    if (r.border) j["border"] = {{"width", r.border_width}, {"color", r.border_color}};
    else j["border"] = nullptr;
    j["activation"] = {{"progress", r.activation_progress}, {"bar_offset", {r.bar_offset_x, r.bar_offset_y}}};
    regions.push_back(std::move(j));
  }
  b["regions"] = std::move(regions);
  if (f.blackout)
    b["blackout"] = {{"degree", f.blackout_degree}, {"color", f.blackout_color}, {"region", f.blackout_region}};
  else
    b["blackout"] = nullptr;
  json spot = {{"on", f.spotlight}, {"radius", f.spotlight_radius}};
  if (f.spotlight_center) spot["center"] = {f.spotlight_center->x, f.spotlight_center->y};
  else spot["center"] = nullptr;
  b["spotlight"] = spot;
  b["sounds"] = f.sounds;
  return b;
}

json event_body(const EngineEvent& e) {
  return json{{"t_ms", e.t_ms},
              {"kind", to_string(e.kind)},
              {"scene", e.scene},
              {"region", e.region},
              {"payload", e.payload}};
}

}  // namespace

std::string frame_json(const RenderFrame& f) { return frame_body(f).dump(); }
std::string event_json(const EngineEvent& e) { return event_body(e).dump(); }

std::string hello(std::uint64_t seq, const Engine& engine) {
  return wrap("hello", seq,
              json{{"protocol_version", kVersion},
                   {"screen", {engine.extent_x(), engine.extent_y()}},
                   {"dwell_ms", engine.config().dwell_ms},
                   {"tick_ms", engine.config().tick_ms},
                   {"seed", engine.config().seed}});
}

std::string document_summary(std::uint64_t seq, const Engine& engine, const GimlDocument& doc) {
  json scenes = json::array();
  for (const auto& s : engine.scenes()) {
    json regions = json::array();
    for (const auto& r : s.regions) regions.push_back(r.name);
    scenes.push_back({{"name", s.name}, {"regions", regions}});
  }
  json images = json::array();
  for (const auto& i : doc.images) images.push_back({{"name", i.name}, {"path", resolve_resource_path(doc, ResourceKind::image, i.path)}});
  json sounds = json::array();
  for (const auto& s : doc.sounds) sounds.push_back({{"name", s.name}, {"path", resolve_resource_path(doc, ResourceKind::sound, s.path)}});
  json lists = json::array();
  for (const auto& l : doc.lists) lists.push_back(l.name);
  json body{{"default_scene", doc.scenes_header.default_scene},
            {"scenes", scenes},
            {"images", images},
            {"sounds", sounds},
            {"lists", lists},
            {"language", to_string(doc.source_language)}};
  body["pause_scene"] = doc.scenes_header.pause_scene ? json(*doc.scenes_header.pause_scene) : json(nullptr);
  body["library"] = doc.settings.library ? json(*doc.settings.library) : json(nullptr);
  return wrap("document_summary", seq, body);
}

std::string frame(std::uint64_t seq, const RenderFrame& f) { return wrap("frame", seq, frame_body(f)); }
std::string event(std::uint64_t seq, const EngineEvent& e) { return wrap("event", seq, event_body(e)); }

std::string error(std::uint64_t seq, std::string_view message, std::optional<std::uint64_t> in_reply_to) {
  json b{{"message", message}};
  b["in_reply_to"] = in_reply_to ? json(*in_reply_to) : json(nullptr);
  return wrap("error", seq, b);
}

std::string bye(std::uint64_t seq, std::string_view reason) { return wrap("bye", seq, json{{"reason", reason}}); }

ClientMessage parse_client(std::string_view text) {
  ClientMessage m;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    m.error = "message is not valid JSON";
    return m;
  }
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    m.error = "message has no type";
    return m;
  }
  m.raw_type = j["type"].get<std::string>();
  if (j.contains("seq") && j["seq"].is_number_unsigned()) m.seq = j["seq"].get<std::uint64_t>();
  const json body = j.contains("body") && j["body"].is_object() ? j["body"] : json::object();
  try {
    if (m.raw_type == "input") {
      if (!body.contains("x") || !body.contains("y")) {
        m.error = "input needs x and y";
        return m;
      }
      m.gaze.x = body["x"].get<double>();
      m.gaze.y = body["y"].get<double>();
      m.gaze.valid = body.value("valid", true);
      if (body.contains("t_ms") && body["t_ms"].is_number()) m.client_t_ms = body["t_ms"].get<long long>();
      if (body.contains("pupil") && body["pupil"].is_number()) m.pupil = body["pupil"].get<double>();
      m.type = ClientMessage::Type::input;
    } else if (m.raw_type == "key") {
      m.key = body.value("key", std::string());
      if (m.key.empty()) {
        m.error = "key message needs a key";
        return m;
      }
      m.type = ClientMessage::Type::key;
    } else if (m.raw_type == "control") {
      m.action = body.value("action", std::string());
      if (m.action != "pause" && m.action != "stop") {
        m.error = "unknown control action '" + m.action + "'";
        return m;
      }
      m.type = ClientMessage::Type::control;
    } else {
      m.error = "unknown message type '" + m.raw_type + "'";
    }
  } catch (const json::exception& e) {
    m.type = ClientMessage::Type::invalid;
    m.error = std::string("malformed ") + m.raw_type + " message: " + e.what();
  }
  return m;
}

std::string input(std::uint64_t seq, long long client_t_ms, double x, double y, bool valid) {
  return wrap("input", seq, json{{"t_ms", client_t_ms}, {"x", x}, {"y", y}, {"valid", valid}});
}

std::string key(std::uint64_t seq, std::string_view k) { return wrap("key", seq, json{{"key", k}}); }

std::string control(std::uint64_t seq, std::string_view action) {
  return wrap("control", seq, json{{"action", action}});
}

}  // namespace giml::protocol
