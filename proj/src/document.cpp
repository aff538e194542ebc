#include "giml/document.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "giml/schema.hpp"
#include "giml/xml.hpp"

namespace giml {

std::string_view to_string(ActionType v) {
  switch (v) {
    case ActionType::none: return "none";
    case ActionType::border: return "border";
    case ActionType::transition_to_scene: return "transition_to_scene";
    case ActionType::move: return "move";
    case ActionType::reset_region: return "reset_region";
    case ActionType::reset_scene: return "reset_scene";
  }
  return "?";
}

std::string_view to_string(AnimationType v) {
  switch (v) {
    case AnimationType::none: return "none";
    case AnimationType::size_changing: return "size_changing";
    case AnimationType::rotation_ccw: return "rotation_ccw";
    case AnimationType::rotation_cw: return "rotation_cw";
    case AnimationType::swinging_horizontal: return "swinging_horizontal";
    case AnimationType::swinging_vertical: return "swinging_vertical";
  }
  return "?";
}

std::string_view to_string(Shape v) {
  switch (v) {
    case Shape::rectangle: return "rectangle";
    case Shape::circle: return "circle";
    case Shape::ellipse: return "ellipse";
  }
  return "?";
}

std::string_view to_string(CompletionCondition v) {
  switch (v) {
    case CompletionCondition::region_leave: return "region_leave";
    case CompletionCondition::sound_ending: return "sound_ending";
    case CompletionCondition::time_elapsed: return "time_elapsed";
  }
  return "?";
}

std::string_view to_string(DrawMode v) {
  switch (v) {
    case DrawMode::draw_no_returns: return "draw_no_returns";
    case DrawMode::draw_with_returns: return "draw_with_returns";
    case DrawMode::sequentially: return "sequentially";
  }
  return "?";
}

std::string_view to_string(ListElementType v) {
  return v == ListElementType::strings ? "strings" : "colors";
}

namespace {

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_keep(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_names(std::string_view s) {
  std::vector<std::string> out;
  for (auto& part : split_keep(s, ';')) {
    auto t = trim_copy(part);
    if (!t.empty() && t.front() == '@') t = trim_copy(std::string_view(t).substr(1));
    if (!t.empty()) out.push_back(fold_case(t));
  }
  return out;
}

std::string element_label(std::string_view id) {
  return KeywordRegistry::builtin().render(id, Language::en);
}

struct AttrSlot {
  std::string token;
  std::string value;
};

class Parser {
 public:
  Parser(const KeywordRegistry& reg, Language lang) : reg_(reg), lang_(lang) {}

  std::vector<Diagnostic> diags;
  std::vector<UnknownItem> unknown;

  void report(Severity sev, std::string_view code, const xml::Node& node, const std::string& path,
              std::string message, std::optional<std::string> suggestion = std::nullopt) {
    Diagnostic d;
    d.severity = sev;
    d.code = std::string(code);
    d.location = {path, node.line, node.column};
    d.message = std::move(message);
    d.suggestion = std::move(suggestion);
    diags.push_back(std::move(d));
  }

  // Resolved view of one element's attributes.
  struct Attrs {
    Parser* p;
    const xml::Node* node;
    std::string path;
    std::map<std::string, AttrSlot, std::less<>> slots;

    const AttrSlot* get(std::string_view id) const {
      auto it = slots.find(id);
      return it == slots.end() ? nullptr : &it->second;
    }
    bool has(std::string_view id) const { return get(id) != nullptr; }

    std::string spelled(std::string_view id) const {
      if (auto s = get(id)) return s->token;
      return p->reg_.render(id, p->lang_);
    }

    void error(std::string_view code, std::string msg, std::optional<std::string> sug = {}) const {
      p->report(Severity::error, code, *node, path, std::move(msg), std::move(sug));
    }

    bool require(std::string_view id) const {
      if (has(id)) return true;
      error(codes::kMissingAttribute, "missing required attribute '" + spelled(id) + "'");
      return false;
    }

    std::optional<std::string> text(std::string_view id) const {
      if (auto s = get(id)) return s->value;
      return std::nullopt;
    }

    std::optional<std::string> name(std::string_view id) const {
      if (auto s = get(id)) return fold_case(trim_copy(s->value));
      return std::nullopt;
    }

    std::optional<std::vector<std::string>> names(std::string_view id) const {
      if (auto s = get(id)) return split_names(s->value);
      return std::nullopt;
    }

    std::optional<long long> integer(std::string_view id) const {
      auto s = get(id);
      if (!s) return std::nullopt;
      auto v = parse_integer(s->value);
      if (!v) error(codes::kBadNumber, "'" + s->token + "' expects an integer, got '" + s->value + "'");
      return v;
    }

    std::optional<double> real(std::string_view id) const {
      auto s = get(id);
      if (!s) return std::nullopt;
      auto v = parse_number(s->value);
      if (!v) error(codes::kBadNumber, "'" + s->token + "' expects a number, got '" + s->value + "'");
      return v;
    }

    std::optional<std::string_view> enumeration(std::string_view id) const {
      auto s = get(id);
      if (!s) return std::nullopt;
      const auto owner = schema::attribute_info(id).enum_owner;
      const auto value = trim_copy(s->value);
      if (auto v = p->reg_.lookup(value, p->lang_, KeywordKind::enum_value, owner)) return v;
      std::optional<std::string> sug;
      if (auto g = p->reg_.suggest(value, p->lang_, KeywordKind::enum_value, owner)) sug = g->spelling;
      error(codes::kUnknownValue, "unknown value '" + s->value + "' for '" + s->token + "'", sug);
      return std::nullopt;
    }

    std::optional<bool> boolean(std::string_view id) const {
      auto v = enumeration(id);
      if (!v) return std::nullopt;
      return *v == "YES";
    }

    std::optional<AttrValue> value(std::string_view id) const {
      auto s = get(id);
      if (!s) return std::nullopt;
      const auto info = schema::attribute_info(id);
      std::string raw = s->value;
      if (info.kind == ValueKind::name) raw = fold_case(trim_copy(raw));
      auto parsed = parse_value_expr(raw, info.kind, info.axis);
      if (!parsed.ok()) {
        const bool plain_number = is_numeric(info.kind) && std::holds_alternative<expr::Literal>(parsed.value) &&
                                  raw.find('%') == std::string::npos &&
                                  fold_case(trim_copy(raw)).rfind("rand:", 0) != 0 &&
                                  trim_copy(raw).rfind('@', 0) != 0;
        error(plain_number ? codes::kBadNumber : codes::kBadExpression,
              "'" + s->token + "': " + parsed.error);
      } else if (info.kind == ValueKind::color) {
        check_colors(*s, parsed.value);
      }
      return AttrValue{std::move(raw), std::move(parsed.value)};
    }

    void check_colors(const AttrSlot& s, const ValueExpr& e) const {
      auto bad = [&](const std::string& c) {
        error(codes::kBadColor, "'" + s.token + "': '" + c + "' is not a color name or hex value");
      };
      if (auto lit = std::get_if<expr::Literal>(&e)) {
        if (!parse_color(lit->text)) bad(lit->text);
      } else if (auto ch = std::get_if<expr::RandomChoice>(&e)) {
        for (const auto& alt : ch->alternatives)
          if (!parse_color(alt)) bad(alt);
      }
    }
  };

  Attrs attributes(const xml::Node& node, std::string_view element_id, const std::string& path) {
    Attrs a{this, &node, path, {}};
    for (const auto& attr : node.attributes) {
      auto id = schema::lookup_attribute(reg_, attr.name, lang_, element_id);
      if (!id) {
        std::optional<std::string> sug;
        if (auto s = schema::suggest_attribute(reg_, attr.name, lang_, element_id)) sug = s->spelling;
        report(Severity::warning, codes::kUnknownAttribute, node, path,
               "unknown attribute '" + attr.name + "' on " + element_label(element_id), sug);
        unknown.push_back({path, attr.name, attr.value});
        continue;
      }
      auto [it, inserted] = a.slots.try_emplace(std::string(*id), AttrSlot{attr.name, attr.value});
      if (!inserted)
        report(Severity::error, codes::kDuplicateAttribute, node, path,
               "attribute '" + attr.name + "' repeats '" + it->second.token + "'");
    }
    if (!node.text.empty())
      report(Severity::warning, codes::kStrayText, node, path,
             "unexpected text content in " + element_label(element_id));
    return a;
  }

  // Children resolved to canonical element ids; unknown children are reported.
  std::vector<std::pair<std::string_view, const xml::Node*>> children(const xml::Node& node,
                                                                       std::string_view parent_id,
                                                                       const std::string& path) {
    std::vector<std::pair<std::string_view, const xml::Node*>> out;
    for (const auto& c : node.children) {
      if (!c.is_element()) continue;
      auto id = schema::lookup_child(reg_, c.name, lang_, parent_id);
      if (!id) {
        std::optional<std::string> sug;
        if (auto s = reg_.suggest(c.name, lang_, KeywordKind::element, parent_id)) sug = s->spelling;
        report(Severity::warning, codes::kUnknownElement, c, path,
               "unknown element '" + c.name + "' inside " + element_label(parent_id), sug);
        unknown.push_back({path, c.name, {}});
        continue;
      }
      out.emplace_back(*id, &c);
    }
    return out;
  }

  GimlDocument parse_root(const xml::Node& root, std::optional<Language> declared) {
    GimlDocument doc;
    doc.source_language = lang_;
    const std::string path = "settings";
    auto a = attributes(root, "SETTINGS", path);
    doc.settings.folder = a.text("FOLDER");
    doc.settings.library = a.text("LIBRARY");
    doc.settings.language = declared.value_or(lang_);

    bool have_scenes = false;
    std::set<std::string_view> seen;
    for (auto [id, node] : children(root, "SETTINGS", path)) {
      const std::string child_path = path + "/" + element_label(id);
      if (!seen.insert(id).second && id == "SCENES") {
        report(Severity::error, codes::kDuplicateElement, *node, child_path,
               "second " + element_label(id) + " container ignored");
        continue;
      }
      if (id == "IMAGES") {
        parse_images(*node, child_path, doc);
      } else if (id == "SOUNDS") {
        parse_sounds(*node, child_path, doc);
      } else if (id == "MOVIES") {
        parse_movies(*node, child_path, doc);
      } else if (id == "LISTS") {
        parse_lists(*node, child_path, doc);
      } else if (id == "SCENES") {
        have_scenes = true;
        parse_scenes(*node, child_path, doc);
      }
    }
    if (!have_scenes)
      report(Severity::error, codes::kMissingElement, root, path,
             "missing '" + reg_.render("SCENES", lang_) + "' container");
    doc.unknown = std::move(unknown);
    return doc;
  }

 private:
  void container_folder(const xml::Node& node, std::string_view id, const std::string& path,
                        std::optional<std::string>& folder) {
    auto a = attributes(node, id, path);
    if (auto f = a.text("FOLDER")) {
      if (folder && *folder != *f)
        a.error(codes::kDuplicateElement, "conflicting folder for repeated " + element_label(id));
      folder = f;
    }
  }

  template <class Decl>
  bool check_unique(std::vector<Decl>& items, const Decl& d, const xml::Node& node, const std::string& path,
                    std::string_view what) {
    if (d.name.empty()) return true;
    for (const auto& other : items)
      if (other.name == d.name) {
        report(Severity::error, codes::kDuplicateName, node, path,
               "duplicate " + std::string(what) + " name '" + d.name + "'");
        return false;
      }
    return true;
  }

  void parse_images(const xml::Node& node, const std::string& path, GimlDocument& doc) {
    container_folder(node, "IMAGES", path, doc.images_folder);
    for (auto [id, c] : children(node, "IMAGES", path)) {
      ImageDecl d;
      auto a = attributes(*c, id, path + "/image");
      if (a.require("NAME")) d.name = *a.name("NAME");
      a.path = path + "/image[" + d.name + "]";
      if (a.require("PATH")) d.path = trim_copy(*a.text("PATH"));
      d.transparency_key = a.text("TRANSPARENCY_KEY");
      if (d.transparency_key && !parse_color(*d.transparency_key))
        a.error(codes::kBadColor, "'" + *d.transparency_key + "' is not a color name or hex value");
      d.running_period_ms = a.integer("RUNNING_PERIOD");
      if (d.running_period_ms && *d.running_period_ms <= 0)
        a.error(codes::kOutOfRange, "running period must be positive");
      d.run_from_frame = a.integer("RUN_FROM_FRAME");
      d.run_to_frame = a.integer("RUN_TO_FRAME");
      if (d.run_to_frame && *d.run_to_frame != -1 && *d.run_to_frame < d.run_from_frame.value_or(0))
        a.error(codes::kOutOfRange, "run-to frame precedes run-from frame");
      d.keep_in_memory = a.boolean("KEEP_IN_MEMORY").value_or(false);
      d.pos = {a.path, c->line, c->column};
      if (check_unique(doc.images, d, *c, a.path, "image")) doc.images.push_back(std::move(d));
    }
  }

  template <class Decl>
  void media_common(const Attrs& a, Decl& d) {
    if (a.require("NAME")) d.name = *a.name("NAME");
    if (a.require("PATH")) d.path = trim_copy(*a.text("PATH"));
    if (auto r = a.integer("REPETITION_NUMBER")) {
      if (*r < 1) a.error(codes::kOutOfRange, "repetition number must be at least 1");
      else d.repetition_number = *r;
    }
    d.in_background = a.boolean("IN_BACKGROUND").value_or(false);
    if (auto v = a.real("VOLUME")) {
      if (*v < 0) a.error(codes::kOutOfRange, "volume must not be negative");
      else d.volume = *v;
    }
  }

  void parse_sounds(const xml::Node& node, const std::string& path, GimlDocument& doc) {
    container_folder(node, "SOUNDS", path, doc.sounds_folder);
    for (auto [id, c] : children(node, "SOUNDS", path)) {
      SoundDecl d;
      auto a = attributes(*c, id, path + "/sound");
      media_common(a, d);
      a.path = path + "/sound[" + d.name + "]";
      d.pos = {a.path, c->line, c->column};
      if (check_unique(doc.sounds, d, *c, a.path, "sound")) doc.sounds.push_back(std::move(d));
    }
  }

  void parse_movies(const xml::Node& node, const std::string& path, GimlDocument& doc) {
    container_folder(node, "MOVIES", path, doc.movies_folder);
    for (auto [id, c] : children(node, "MOVIES", path)) {
      MovieDecl d;
      auto a = attributes(*c, id, path + "/movie");
      media_common(a, d);
      a.path = path + "/movie[" + d.name + "]";
      d.transparency_key = a.text("TRANSPARENCY_KEY");
      if (d.transparency_key && !parse_color(*d.transparency_key))
        a.error(codes::kBadColor, "'" + *d.transparency_key + "' is not a color name or hex value");
      d.pos = {a.path, c->line, c->column};
      if (check_unique(doc.movies, d, *c, a.path, "movie")) doc.movies.push_back(std::move(d));
    }
  }

  void parse_lists(const xml::Node& node, const std::string& path, GimlDocument& doc) {
    attributes(node, "LISTS", path);
    for (auto [id, c] : children(node, "LISTS", path)) {
      ListDecl d;
      auto a = attributes(*c, id, path + "/list");
      if (a.require("NAME")) d.name = *a.name("NAME");
      a.path = path + "/list[" + d.name + "]";
      if (auto t = a.enumeration("ELEMENT_TYPE"))
        d.element_type = *t == "ELEMENT_COLORS" ? ListElementType::colors : ListElementType::strings;
      if (a.require("VALUES")) {
        for (auto& v : split_keep(*a.text("VALUES"), ';'))
          if (!trim_copy(v).empty()) d.values.push_back(std::move(v));
        if (d.values.empty()) a.error(codes::kListValueInvalid, "list has no values");
      }
      if (auto m = a.enumeration("DRAWING")) {
        d.drawing_explicit = true;
        d.drawing = *m == "DRAWING_SEQUENTIALLY"  ? DrawMode::sequentially
                    : *m == "DRAWING_WITH_RETURNS" ? DrawMode::draw_with_returns
                                                   : DrawMode::draw_no_returns;
      }
      d.group = a.name("GROUP");
      d.pos = {a.path, c->line, c->column};
      if (check_unique(doc.lists, d, *c, a.path, "list")) doc.lists.push_back(std::move(d));
    }
  }

  void parse_scenes(const xml::Node& node, const std::string& path, GimlDocument& doc) {
    auto a = attributes(node, "SCENES", path);
    auto& h = doc.scenes_header;
    if (a.require("NAME_OF_DEFAULT_SCENE")) h.default_scene = *a.name("NAME_OF_DEFAULT_SCENE");
    for (const char* id : {"ORIGINAL_SCREEN_SIZE_X", "ORIGINAL_SCREEN_SIZE_Y"}) {
      if (!a.require(id)) continue;
      auto v = a.integer(id);
      if (v && *v <= 0) a.error(codes::kOutOfRange, "'" + a.spelled(id) + "' must be positive");
      (std::string_view(id).back() == 'X' ? h.screen_x : h.screen_y) = v;
    }
    h.pause_scene = a.name("NAME_OF_PAUSE_SCENE");
    h.spotlight = a.boolean("SPOTLIGHT");
    h.spotlight_radius = a.value("SPOTLIGHT_RADIUS");
    h.pos = {path, node.line, node.column};
    for (auto [id, c] : children(node, "SCENES", path)) {
      SceneDecl s = parse_scene(*c, path);
      bool unique = true;
      if (!s.name.empty())
        for (const auto& o : doc.scenes)
          if (o.name == s.name) unique = false;
      if (!unique) {
        report(Severity::error, codes::kDuplicateName, *c, s.pos.path, "duplicate scene name '" + s.name + "'");
        continue;
      }
      doc.scenes.push_back(std::move(s));
    }
  }

  SceneDecl parse_scene(const xml::Node& node, const std::string& parent) {
    SceneDecl s;
    auto a = attributes(node, "SCENE", parent + "/scene");
    if (a.require("NAME")) s.name = *a.name("NAME");
    a.path = parent + "/scene[" + s.name + "]";
    s.background_color = a.value("BACKGROUND_COLOR");
    s.background_image = a.value("NAME_OF_BACKGROUND_IMAGE");
    s.background_sound = a.value("NAME_OF_BACKGROUND_SOUND");
    s.blackout_degree = a.integer("BLACKOUT_DEGREE");
    if (s.blackout_degree && (*s.blackout_degree < 0 || *s.blackout_degree > 255))
      a.error(codes::kOutOfRange, "blackout degree must lie in 0..255");
    s.blackout_color = a.value("BLACKOUT_COLOR");
    s.blocking_regions_during_blackout = a.boolean("BLOCKING_REGIONS_DURING_BLACKOUT");
    s.regions_to_disable = a.names("LIST_OF_REGIONS_TO_DISABLE");
    s.region_enabled_after_all_disabled = a.name("NAME_OF_REGION_ENABLED_AFTER_ALL_REGIONS_ARE_DISABLED");
    s.reset_after_enter = a.boolean("RESET_AFTER_ENTER");
    s.spotlight = a.boolean("SPOTLIGHT");
    s.spotlight_radius = a.value("SPOTLIGHT_RADIUS");
    s.lists_switched_over_after_enter = a.names("NAME_OF_LISTS_SWITCHED_OVER_AFTER_ENTER");
    s.region_enabled_after_list_finished = a.name("NAME_OF_REGION_ENABLED_AFTER_LIST_FINISHED");
    s.on_scene_changed = a.text("ON_SCENE_CHANGED");
    s.template_ref = a.name("TEMPLATE");
    s.pos = {a.path, node.line, node.column};
    for (auto [id, c] : children(node, "SCENE", a.path)) {
      RegionDecl r = parse_region(*c, a.path);
      if (!r.name.empty() && s.find_region(r.name)) {
        report(Severity::error, codes::kDuplicateName, *c, r.pos.path,
               "duplicate region name '" + r.name + "' in scene '" + s.name + "'");
        continue;
      }
      s.regions.push_back(std::move(r));
    }
    return s;
  }

  void parse_state(const Attrs& a, StateOverlay& o) {
    if (auto v = a.enumeration("ACTION_TYPE")) {
      static const std::map<std::string_view, ActionType> m = {
          {"ACTION_NONE", ActionType::none},
          {"ACTION_BORDER", ActionType::border},
          {"ACTION_TRANSITION_TO_SCENE", ActionType::transition_to_scene},
          {"ACTION_MOVE", ActionType::move},
          {"ACTION_RESET_REGION", ActionType::reset_region},
          {"ACTION_RESET_SCENE", ActionType::reset_scene}};
      o.action_type = m.at(*v);
    }
    o.border_width = a.value("BORDER_WIDTH");
    o.border_color = a.value("BORDER_COLOR");
    o.name_of_target_scene = a.name("NAME_OF_TARGET_SCENE").value_or("");
    o.name_of_image = a.value("NAME_OF_IMAGE");
    o.name_of_sound = a.value("NAME_OF_SOUND");
    if (auto p = a.get("MOVE_PATH")) {
      for (const auto& step : split_keep(p->value, ';')) {
        if (trim_copy(step).empty()) continue;
        auto xy = split_keep(step, ',');
        std::optional<long long> dx, dy;
        if (xy.size() == 2) {
          dx = parse_integer(xy[0]);
          dy = parse_integer(xy[1]);
        }
        if (!dx || !dy) {
          a.error(codes::kBadMovePath, "'" + p->token + "': '" + step + "' is not an x,y integer pair");
          o.move_path.clear();
          break;
        }
        o.move_path.push_back({static_cast<int>(*dx), static_cast<int>(*dy)});
      }
    }
    o.speed = a.value("SPEED");
    if (auto v = a.enumeration("ANIMATION_TYPE")) {
      static const std::map<std::string_view, AnimationType> m = {
          {"ANIMATION_NONE", AnimationType::none},
          {"ANIMATION_SIZE_CHANGING", AnimationType::size_changing},
          {"ANIMATION_ROTATION_CCW", AnimationType::rotation_ccw},
          {"ANIMATION_ROTATION_CW", AnimationType::rotation_cw},
          {"ANIMATION_SWINGING_HORIZONTAL", AnimationType::swinging_horizontal},
          {"ANIMATION_SWINGING_VERTICAL", AnimationType::swinging_vertical}};
      o.animation_type = m.at(*v);
    }
    o.animation_amplitude = a.value("ANIMATION_AMPLITUDE");
    o.animation_period_ms = a.value("ANIMATION_PERIOD");
    o.tag = a.text("TAG");
    o.delayed_tag = a.text("DELAYED_TAG");
    o.delay_of_delayed_tag_ms = a.integer("DELAY_OF_DELAYED_TAG");
    o.text = a.value("TEXT");
    o.font = a.value("FONT");
    o.font_size = a.value("FONT_SIZE");
    if (auto fs = a.get("FONT_STYLE")) {
      for (char ch : fs->value) {
        switch (ch) {
          case 'i': case 'I': o.font_style.italic = true; break;
          case 'b': case 'B': o.font_style.bold = true; break;
          case 'u': case 'U': o.font_style.underline = true; break;
          case 's': case 'S': o.font_style.strikeout = true; break;
          case ' ': break;
          default:
            a.error(codes::kBadFontStyle,
                    "'" + fs->token + "': letter '" + std::string(1, ch) + "' is not one of i, b, u, s");
        }
      }
    }
    o.font_color = a.value("FONT_COLOR");
    o.turn_off_when_finished = a.boolean("TURN_OFF_WHEN_FINISHED").value_or(false);
    o.regions_enabled_when_started = a.names("NAME_OF_REGION_ENABLED_WHEN_STARTED").value_or(std::vector<std::string>{});
    o.regions_disabled_when_started = a.names("NAME_OF_REGION_DISABLED_WHEN_STARTED").value_or(std::vector<std::string>{});
    o.regions_enabled_when_finished = a.names("NAME_OF_REGION_ENABLED_WHEN_FINISHED").value_or(std::vector<std::string>{});
    o.regions_disabled_when_finished = a.names("NAME_OF_REGION_DISABLED_WHEN_FINISHED").value_or(std::vector<std::string>{});
    o.pos = {a.path, a.node->line, a.node->column};
  }

  RegionDecl parse_region(const xml::Node& node, const std::string& parent) {
    RegionDecl r;
    auto a = attributes(node, "REGION", parent + "/region");
    if (a.require("NAME")) r.name = *a.name("NAME");
    a.path = parent + "/region[" + r.name + "]";
    if (a.require("LOCATION_OF_CENTER_X")) r.center_x = a.value("LOCATION_OF_CENTER_X");
    if (a.require("LOCATION_OF_CENTER_Y")) r.center_y = a.value("LOCATION_OF_CENTER_Y");
    if (a.require("SIZE_X")) r.size_x = a.value("SIZE_X");
    if (a.require("SIZE_Y")) r.size_y = a.value("SIZE_Y");
    if (auto v = a.require("SHAPE") ? a.enumeration("SHAPE") : std::nullopt)
      r.shape = *v == "SHAPE_CIRCLE" ? Shape::circle : *v == "SHAPE_ELLIPSE" ? Shape::ellipse : Shape::rectangle;
    r.enabled = a.boolean("ENABLED").value_or(true);
    r.image_offset_x = a.value("OFFSET_OF_IMAGE_CENTER_X");
    r.image_offset_y = a.value("OFFSET_OF_IMAGE_CENTER_Y");
    r.image_size_x = a.value("IMAGE_SIZE_X");
    r.image_size_y = a.value("IMAGE_SIZE_Y");
    r.text_offset_x = a.value("OFFSET_OF_TEXT_X");
    r.text_offset_y = a.value("OFFSET_OF_TEXT_Y");
    r.bar_offset_x = a.value("OFFSET_OF_ACTIVATION_BAR_X");
    r.bar_offset_y = a.value("OFFSET_OF_ACTIVATION_BAR_Y");
    r.region_animation_enabled = a.boolean("REGION_ANIMATION_ENABLED").value_or(true);
    r.image_animation_enabled = a.boolean("IMAGE_ANIMATION_ENABLED").value_or(true);
    if (auto v = a.enumeration("CONDITION_OF_REACTION_COMPLETION"))
      r.completion = *v == "COMPLETION_SOUND_ENDING"   ? CompletionCondition::sound_ending
                     : *v == "COMPLETION_TIME_ELAPSED" ? CompletionCondition::time_elapsed
                                                       : CompletionCondition::region_leave;
    r.reaction_duration_ms = a.integer("REACTION_DURATION");
    r.hold_scene_transition = a.boolean("HOLD_SCENE_TRANSITION").value_or(false);
    r.automatic_reaction_after_ms = a.integer("AUTOMATIC_REACTION_AFTER_TIME").value_or(-1);
    r.able_to_activate_blackout = a.boolean("ABLE_TO_ACTIVATE_BLACKOUT").value_or(false);
    r.reset_after_enabled = a.boolean("RESET_AFTER_ENABLED").value_or(false);
    r.ignore_gaze = a.boolean("IGNORE_GAZE").value_or(false);
    r.enabling_delay_ms = std::max(0LL, a.integer("ENABLING_DELAY").value_or(0));
    r.disabling_delay_ms = std::max(0LL, a.integer("DISABLING_DELAY").value_or(0));
    if (auto k = a.text("REACTION_KEY")) r.reaction_key = trim_copy(*k);
    r.dwell_time_ms = a.integer("DWELL_TIME");
    if (r.dwell_time_ms && *r.dwell_time_ms <= 0) {
      a.error(codes::kOutOfRange, "dwell time must be positive");
      r.dwell_time_ms.reset();
    }
    r.on_activation_completed = a.text("ON_ACTIVATION_COMPLETED");
    r.on_reaction_started = a.text("ON_REACTION_STARTED");
    r.on_reaction_finished = a.text("ON_REACTION_FINISHED");
    r.on_normal_state_return = a.text("ON_NORMAL_STATE_RETURN");
    r.on_state_changed = a.text("ON_STATE_CHANGED");
    parse_state(a, r.base);
    r.pos = {a.path, node.line, node.column};
    for (auto [id, c] : children(node, "REGION", a.path)) {
      auto& slot = id == "ACTIVATION" ? r.activation : r.reaction;
      const std::string sub = a.path + "/" + element_label(id);
      if (slot) {
        report(Severity::error, codes::kDuplicateElement, *c, sub, "repeated " + element_label(id) + " ignored");
        continue;
      }
      auto sa = attributes(*c, id, sub);
      slot.emplace();
      parse_state(sa, *slot);
    }
    return r;
  }

  const KeywordRegistry& reg_;
  Language lang_;
};

Diagnostic fatal(std::string_view code, std::string message, std::size_t line, std::size_t column,
                 std::string path = {}) {
  Diagnostic d;
  d.severity = Severity::error;
  d.code = std::string(code);
  d.location = {std::move(path), line, column};
  d.message = std::move(message);
  return d;
}

template <class T>
const T* find_named(const std::vector<T>& items, std::string_view name) {
  for (const auto& i : items)
    if (i.name == name) return &i;
  return nullptr;
}

}  // namespace

const RegionDecl* SceneDecl::find_region(std::string_view n) const { return find_named(regions, n); }
const SceneDecl* GimlDocument::find_scene(std::string_view n) const { return find_named(scenes, n); }
const ImageDecl* GimlDocument::find_image(std::string_view n) const { return find_named(images, n); }
const SoundDecl* GimlDocument::find_sound(std::string_view n) const { return find_named(sounds, n); }
const MovieDecl* GimlDocument::find_movie(std::string_view n) const { return find_named(movies, n); }
const ListDecl* GimlDocument::find_list(std::string_view n) const { return find_named(lists, n); }

ParseResult parse_document(std::string_view bytes, std::optional<Language> language_hint) {
  ParseResult result;
  if (bytes.size() >= 3 && static_cast<unsigned char>(bytes[0]) == 0xEF &&
      static_cast<unsigned char>(bytes[1]) == 0xBB && static_cast<unsigned char>(bytes[2]) == 0xBF)
    bytes.remove_prefix(3);

  xml::Document tree;
  try {
    tree = xml::parse(bytes);
  } catch (const xml::ParseError& e) {
    result.diagnostics.push_back(fatal(codes::kXmlSyntax, e.what(), e.line(), e.column()));
    return result;
  }
  const auto& reg = KeywordRegistry::builtin();
  const auto& root = tree.root;

  // The language attribute may be spelled in any of the four languages.
  std::optional<Language> declared;
  for (const auto& attr : root.attributes) {
    bool is_language_attr = false;
    for (auto l : kAllLanguages)
      if (reg.lookup(attr.name, l, KeywordKind::attribute, "SETTINGS") == std::optional<std::string_view>("LANGUAGE"))
        is_language_attr = true;
    if (!is_language_attr) continue;
    declared = parse_language(trim_copy(attr.value));
    if (!declared) {
      result.diagnostics.push_back(fatal(codes::kUnknownLanguage,
                                         "unknown language code '" + attr.value + "' (expected en, fr, de or pl)",
                                         root.line, root.column, "settings"));
      return result;
    }
    break;
  }

  Language lang = Language::en;
  if (language_hint) {
    lang = *language_hint;
  } else if (declared) {
    lang = *declared;
  } else {
    for (auto l : kAllLanguages)
      if (reg.lookup(root.name, l, KeywordKind::element, "ROOT")) {
        lang = l;
        break;
      }
  }

  if (!reg.lookup(root.name, lang, KeywordKind::element, "ROOT")) {
    result.diagnostics.push_back(fatal(codes::kWrongRoot,
                                       "root element '" + root.name + "' is not '" + reg.render("SETTINGS", lang) +
                                           "' (language " + std::string(to_string(lang)) + ")",
                                       root.line, root.column));
    return result;
  }

  Parser p(reg, lang);
  if (language_hint && declared && *declared != *language_hint)
    p.report(Severity::warning, codes::kLanguageMismatch, root, "settings",
             "file declares language '" + std::string(to_string(*declared)) + "' but was parsed as '" +
                 std::string(to_string(*language_hint)) + "'");
  result.document = p.parse_root(root, declared);
  result.diagnostics = std::move(p.diags);
  return result;
}

bool canonically_equal(const GimlDocument& a, const GimlDocument& b) {
  GimlDocument x = a;
  GimlDocument y = b;
  x.source_language = y.source_language = Language::en;
  x.settings.language = y.settings.language = Language::en;
  return x == y;
}

// ------------------------------------------------------------------ paths

namespace {

bool is_windows_absolute(std::string_view p) {
  if (p.size() >= 3 && std::isalpha(static_cast<unsigned char>(p[0])) && p[1] == ':' && (p[2] == '\\' || p[2] == '/'))
    return true;
  return p.size() >= 2 && p[0] == '\\' && p[1] == '\\';
}

bool is_absolute(std::string_view p) {
  return is_windows_absolute(p) || (!p.empty() && (p[0] == '/' || p[0] == '\\'));
}

}  // namespace

std::string resolve_resource_path(const GimlDocument& doc, ResourceKind kind, std::string_view path) {
  const std::string p = trim_copy(path);
  if (is_absolute(p)) return p;

  const std::optional<std::string>& container = kind == ResourceKind::image   ? doc.images_folder
                                                : kind == ResourceKind::sound ? doc.sounds_folder
                                                                              : doc.movies_folder;
  std::vector<std::string> parts;
  if (container && is_absolute(*container)) {
    parts.push_back(*container);
  } else {
    if (doc.settings.folder && !doc.settings.folder->empty()) parts.push_back(*doc.settings.folder);
    if (container && !container->empty()) parts.push_back(*container);
  }
  parts.push_back(p);

  const char sep = is_windows_absolute(parts.front()) ? '\\' : '/';
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    std::string part = parts[i];
    std::replace(part.begin(), part.end(), sep == '/' ? '\\' : '/', sep);
    if (i > 0) {
      while (!part.empty() && part.front() == sep) part.erase(part.begin());
      if (!out.empty() && out.back() != sep) out += sep;
    }
    out += part;
  }
  return out;
}

// -------------------------------------------------------------- templates

SceneDecl merge_template(const SceneDecl& scene, const SceneDecl& tpl) {
  SceneDecl out = tpl;
  out.name = scene.name;
  out.template_ref = scene.template_ref;
  out.pos = scene.pos;
  auto take = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  take(out.background_color, scene.background_color);
  take(out.background_image, scene.background_image);
  take(out.background_sound, scene.background_sound);
  take(out.blackout_degree, scene.blackout_degree);
  take(out.blackout_color, scene.blackout_color);
  take(out.blocking_regions_during_blackout, scene.blocking_regions_during_blackout);
  take(out.regions_to_disable, scene.regions_to_disable);
  take(out.region_enabled_after_all_disabled, scene.region_enabled_after_all_disabled);
  take(out.reset_after_enter, scene.reset_after_enter);
  take(out.spotlight, scene.spotlight);
  take(out.spotlight_radius, scene.spotlight_radius);
  take(out.lists_switched_over_after_enter, scene.lists_switched_over_after_enter);
  take(out.region_enabled_after_list_finished, scene.region_enabled_after_list_finished);
  take(out.on_scene_changed, scene.on_scene_changed);

  for (const auto& r : scene.regions) {
    auto it = std::find_if(out.regions.begin(), out.regions.end(),
                           [&](const RegionDecl& t) { return t.name == r.name; });
    if (it != out.regions.end()) *it = r;
    else out.regions.push_back(r);
  }
  return out;
}

std::vector<SceneDecl> merged_scenes(const GimlDocument& doc, std::vector<Diagnostic>* diags) {
  auto note = [&](const SceneDecl& s, std::string_view code, std::string msg) {
    if (!diags) return;
    Diagnostic d;
    d.severity = Severity::error;
    d.code = std::string(code);
    d.location = {s.pos.path, s.pos.line, s.pos.column};
    d.message = std::move(msg);
    diags->push_back(std::move(d));
  };

  std::map<std::string, SceneDecl> done;
  std::function<std::optional<SceneDecl>(const SceneDecl&, std::vector<std::string>&)> resolve =
      [&](const SceneDecl& s, std::vector<std::string>& chain) -> std::optional<SceneDecl> {
    if (!s.template_ref) return s;
    if (std::find(chain.begin(), chain.end(), *s.template_ref) != chain.end()) return std::nullopt;
    const SceneDecl* t = doc.find_scene(*s.template_ref);
    if (!t) return s;
    chain.push_back(t->name);
    auto base = resolve(*t, chain);
    chain.pop_back();
    if (!base) return std::nullopt;
    return merge_template(s, *base);
  };

  std::vector<SceneDecl> out;
  for (const auto& s : doc.scenes) {
    if (!s.template_ref) {
      out.push_back(s);
      continue;
    }
    if (!doc.find_scene(*s.template_ref)) {
      note(s, codes::kTemplateMissing, "scene '" + s.name + "' uses missing template '" + *s.template_ref + "'");
      out.push_back(s);
      continue;
    }
    std::vector<std::string> chain{s.name};
    auto merged = resolve(s, chain);
    if (!merged) {
      note(s, codes::kTemplateCycle, "template chain of scene '" + s.name + "' is cyclic");
      out.push_back(s);
      continue;
    }
    out.push_back(std::move(*merged));
  }
  return out;
}

// ------------------------------------------------------------------- dump

namespace {

class Dumper {
 public:
  std::ostringstream os;

  template <class T>
  void field(std::string_view key, const std::optional<T>& v) {
    if (v) field(key, *v);
  }
  void field(std::string_view key, const AttrValue& v) { os << ' ' << key << "=\"" << v.raw << '"'; }
  void field(std::string_view key, const std::string& v) { os << ' ' << key << "=\"" << v << '"'; }
  void field(std::string_view key, long long v) { os << ' ' << key << '=' << v; }
  void field(std::string_view key, double v) { os << ' ' << key << '=' << v; }
  void field(std::string_view key, bool v) { os << ' ' << key << '=' << (v ? "yes" : "no"); }
  void field(std::string_view key, const std::vector<std::string>& v) {
    os << ' ' << key << "=[";
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ";" : "") << v[i];
    os << ']';
  }

  void state(std::string_view label, const StateOverlay& o, int indent) {
    os << std::string(indent, ' ') << "state " << label << ": action=" << to_string(o.action_type);
    field("border_width", o.border_width);
    field("border_color", o.border_color);
    if (!o.name_of_target_scene.empty()) field("target_scene", o.name_of_target_scene);
    field("image", o.name_of_image);
    field("sound", o.name_of_sound);
    if (!o.move_path.empty()) {
      os << " move_path=[";
      for (std::size_t i = 0; i < o.move_path.size(); ++i)
        os << (i ? ";" : "") << o.move_path[i].dx << ',' << o.move_path[i].dy;
      os << ']';
    }
    field("speed", o.speed);
    if (o.animation_type != AnimationType::none) os << " animation=" << to_string(o.animation_type);
    field("amplitude", o.animation_amplitude);
    field("period", o.animation_period_ms);
    field("tag", o.tag);
    field("delayed_tag", o.delayed_tag);
    field("delayed_tag_ms", o.delay_of_delayed_tag_ms);
    field("text", o.text);
    field("font", o.font);
    field("font_size", o.font_size);
    if (o.font_style != FontStyle{})
      os << " font_style=" << (o.font_style.italic ? "i" : "") << (o.font_style.bold ? "b" : "")
         << (o.font_style.underline ? "u" : "") << (o.font_style.strikeout ? "s" : "");
    field("font_color", o.font_color);
    if (o.turn_off_when_finished) field("turn_off_when_finished", true);
    if (!o.regions_enabled_when_started.empty()) field("enable_on_start", o.regions_enabled_when_started);
    if (!o.regions_disabled_when_started.empty()) field("disable_on_start", o.regions_disabled_when_started);
    if (!o.regions_enabled_when_finished.empty()) field("enable_on_finish", o.regions_enabled_when_finished);
    if (!o.regions_disabled_when_finished.empty()) field("disable_on_finish", o.regions_disabled_when_finished);
    os << '\n';
  }

  void region(const RegionDecl& r) {
    os << "    region " << r.name << ": shape=" << to_string(r.shape);
    field("center_x", r.center_x);
    field("center_y", r.center_y);
    field("size_x", r.size_x);
    field("size_y", r.size_y);
    field("enabled", r.enabled);
    field("image_offset_x", r.image_offset_x);
    field("image_offset_y", r.image_offset_y);
    field("image_size_x", r.image_size_x);
    field("image_size_y", r.image_size_y);
    field("text_offset_x", r.text_offset_x);
    field("text_offset_y", r.text_offset_y);
    field("bar_offset_x", r.bar_offset_x);
    field("bar_offset_y", r.bar_offset_y);
    if (!r.region_animation_enabled) field("region_animation", false);
    if (!r.image_animation_enabled) field("image_animation", false);
    os << " completion=" << to_string(r.completion);
    field("reaction_duration", r.reaction_duration_ms);
    if (r.hold_scene_transition) field("hold_transition", true);
    if (r.automatic_reaction_after_ms >= 0) field("automatic_reaction_after", r.automatic_reaction_after_ms);
    if (r.able_to_activate_blackout) field("blackout", true);
    if (r.reset_after_enabled) field("reset_after_enabled", true);
    if (r.ignore_gaze) field("ignore_gaze", true);
    if (r.enabling_delay_ms) field("enabling_delay", r.enabling_delay_ms);
    if (r.disabling_delay_ms) field("disabling_delay", r.disabling_delay_ms);
    field("reaction_key", r.reaction_key);
    field("dwell_time", r.dwell_time_ms);
    field("on_activation_completed", r.on_activation_completed);
    field("on_reaction_started", r.on_reaction_started);
    field("on_reaction_finished", r.on_reaction_finished);
    field("on_normal_state_return", r.on_normal_state_return);
    field("on_state_changed", r.on_state_changed);
    os << '\n';
    state("normal", r.base, 6);
    if (r.activation) state("activation", *r.activation, 6);
    if (r.reaction) state("reaction", *r.reaction, 6);
  }

  void scene(const SceneDecl& s) {
    os << "  scene " << s.name << ":";
    field("background_color", s.background_color);
    field("background_image", s.background_image);
    field("background_sound", s.background_sound);
    field("blackout_degree", s.blackout_degree);
    field("blackout_color", s.blackout_color);
    field("blocking_during_blackout", s.blocking_regions_during_blackout);
    field("regions_to_disable", s.regions_to_disable);
    field("enable_after_all_disabled", s.region_enabled_after_all_disabled);
    field("reset_after_enter", s.reset_after_enter);
    field("spotlight", s.spotlight);
    field("spotlight_radius", s.spotlight_radius);
    field("lists_switched_over", s.lists_switched_over_after_enter);
    field("enable_after_list_finished", s.region_enabled_after_list_finished);
    field("on_scene_changed", s.on_scene_changed);
    field("template", s.template_ref);
    os << " regions=" << s.regions.size() << '\n';
    for (const auto& r : s.regions) region(r);
  }
};

}  // namespace

std::string dump(const GimlDocument& doc) {
  Dumper d;
  auto& os = d.os;
  os << "language: " << to_string(doc.source_language) << " (declared " << to_string(doc.settings.language)
     << ")\n";
  os << "settings:";
  d.field("folder", doc.settings.folder);
  d.field("library", doc.settings.library);
  os << '\n';

  os << "images: " << doc.images.size();
  d.field("folder", doc.images_folder);
  os << '\n';
  for (const auto& i : doc.images) {
    os << "  image " << i.name << ":";
    d.field("path", i.path);
    d.field("resolved", resolve_resource_path(doc, ResourceKind::image, i.path));
    d.field("transparency_key", i.transparency_key);
    d.field("running_period", i.running_period_ms);
    d.field("run_from_frame", i.run_from_frame);
    d.field("run_to_frame", i.run_to_frame);
    if (i.keep_in_memory) d.field("keep_in_memory", true);
    os << '\n';
  }
  os << "sounds: " << doc.sounds.size();
  d.field("folder", doc.sounds_folder);
  os << '\n';
  for (const auto& s : doc.sounds) {
    os << "  sound " << s.name << ":";
    d.field("path", s.path);
    d.field("resolved", resolve_resource_path(doc, ResourceKind::sound, s.path));
    d.field("repetitions", s.repetition_number);
    d.field("in_background", s.in_background);
    d.field("volume", s.volume);
    os << '\n';
  }
  os << "movies: " << doc.movies.size();
  d.field("folder", doc.movies_folder);
  os << '\n';
  for (const auto& m : doc.movies) {
    os << "  movie " << m.name << ":";
    d.field("path", m.path);
    d.field("resolved", resolve_resource_path(doc, ResourceKind::movie, m.path));
    d.field("repetitions", m.repetition_number);
    d.field("in_background", m.in_background);
    d.field("volume", m.volume);
    d.field("transparency_key", m.transparency_key);
    os << '\n';
  }
  os << "lists: " << doc.lists.size() << '\n';
  for (const auto& l : doc.lists) {
    os << "  list " << l.name << ": type=" << to_string(l.element_type) << " drawing=" << to_string(l.drawing)
       << (l.drawing_explicit ? "" : " (default)");
    d.field("group", l.group);
    d.field("values", l.values);
    os << '\n';
  }
  const auto& h = doc.scenes_header;
  os << "scenes: " << doc.scenes.size();
  d.field("default", h.default_scene);
  d.field("screen_x", h.screen_x);
  d.field("screen_y", h.screen_y);
  d.field("pause", h.pause_scene);
  d.field("spotlight", h.spotlight);
  d.field("spotlight_radius", h.spotlight_radius);
  os << '\n';
  std::size_t regions = 0, overlays = 0;
  for (const auto& s : doc.scenes) {
    d.scene(s);
    regions += s.regions.size();
    for (const auto& r : s.regions) overlays += 1 + (r.activation ? 1 : 0) + (r.reaction ? 1 : 0);
  }
  os << "regions: " << regions << '\n';
  os << "state overlays: " << overlays << '\n';
  if (!doc.unknown.empty()) {
    os << "unknown: " << doc.unknown.size() << '\n';
    for (const auto& u : doc.unknown)
      os << "  " << u.element_path << ' ' << u.token << (u.value.empty() ? "" : "=\"" + u.value + "\"") << '\n';
  }
  return os.str();
}

}  // namespace giml
