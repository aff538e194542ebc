#include "giml/analyzer.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "giml/schema.hpp"
#include "giml/xml.hpp"

namespace giml {
namespace {

class Validator {
 public:
  Validator(const GimlDocument& doc, const ValidateOptions& opts) : doc_(doc), opts_(opts) {}

  std::vector<Diagnostic> run() {
    check_header();
    std::vector<Diagnostic> template_diags;
    const auto scenes = merged_scenes(doc_, &template_diags);
    for (auto& d : template_diags) add(std::move(d));
    check_lists();
    for (const auto& s : scenes) check_scene(s);
    check_resources();
    return std::move(out_);
  }

 private:
  void add(Diagnostic d) {
    auto key = std::make_tuple(d.code, d.location.element_path, d.message);
    if (!seen_.insert(key).second) return;
    out_.push_back(std::move(d));
  }

  void report(Severity sev, std::string_view code, const SourcePos& pos, std::string msg,
              std::optional<std::string> suggestion = std::nullopt) {
    Diagnostic d;
    d.severity = sev;
    d.code = std::string(code);
    d.location = {pos.path, pos.line, pos.column};
    d.message = std::move(msg);
    d.suggestion = std::move(suggestion);
    add(std::move(d));
  }

  std::optional<std::string> nearest(std::string_view name, const std::vector<std::string>& candidates) {
    std::optional<std::string> best;
    std::size_t best_d = 3;
    bool tie = false;
    for (const auto& c : candidates) {
      const auto d = edit_distance(name, c);
      if (d < best_d) {
        best_d = d;
        best = c;
        tie = false;
      } else if (d == best_d) {
        tie = true;
      }
    }
    if (tie) return std::nullopt;
    return best;
  }

  template <class T>
  static std::vector<std::string> names_of(const std::vector<T>& v) {
    std::vector<std::string> out;
    for (const auto& x : v) out.push_back(x.name);
    return out;
  }

  void check_scene_ref(const std::string& name, const SourcePos& pos, std::string_view what) {
    if (name.empty() || doc_.find_scene(name)) return;
    report(Severity::error, codes::kDanglingSceneRef, pos,
           std::string(what) + " refers to unknown scene '" + name + "'", nearest(name, names_of(doc_.scenes)));
  }

  void check_header() {
    const auto& h = doc_.scenes_header;
    check_scene_ref(h.default_scene, h.pos, "default scene");
    if (h.pause_scene) check_scene_ref(*h.pause_scene, h.pos, "pause scene");
  }

  void check_lists() {
    std::map<std::string, std::vector<const ListDecl*>> groups;
    std::vector<std::string> group_order;
    for (const auto& l : doc_.lists) {
      if (l.element_type == ListElementType::colors)
        for (const auto& v : l.values)
          if (!parse_color(v))
            report(Severity::error, codes::kListValueInvalid, l.pos,
                   "list '" + l.name + "' holds colors but '" + v + "' is not a color");
      if (l.group) {
        if (!groups.count(*l.group)) group_order.push_back(*l.group);
        groups[*l.group].push_back(&l);
      }
    }
    for (const auto& g : group_order) {
      const auto& members = groups[g];
      const auto* first = members.front();
      for (const auto* m : members) {
        if (m->values.size() != first->values.size()) {
          report(Severity::error, codes::kGroupLengthMismatch, m->pos,
                 "lists in group '" + g + "' differ in length: '" + first->name + "' has " +
                     std::to_string(first->values.size()) + " values, '" + m->name + "' has " +
                     std::to_string(m->values.size()));
          break;
        }
      }
      for (const auto* m : members)
        if (m != first && m->drawing_explicit && m->drawing != first->drawing)
          report(Severity::warning, codes::kGroupDrawingConflict, m->pos,
                 "list '" + m->name + "' declares drawing " + std::string(to_string(m->drawing)) + " but group '" +
                     g + "' follows '" + first->name + "' (" + std::string(to_string(first->drawing)) + ")");
    }
  }

  enum class RefKind { image, sound, color, other };

  bool resource_exists(RefKind kind, const std::string& name) const {
    if (kind == RefKind::image) return doc_.find_image(name) || doc_.find_movie(name);
    if (kind == RefKind::sound) return doc_.find_sound(name) != nullptr;
    return true;
  }

  void check_resource_name(RefKind kind, const std::string& raw, const SourcePos& pos, std::string_view attr) {
    const auto name = fold_case(raw);
    if (resource_exists(kind, name)) return;
    const bool image = kind == RefKind::image;
    auto candidates = image ? names_of(doc_.images) : names_of(doc_.sounds);
    if (image)
      for (const auto& m : doc_.movies) candidates.push_back(m.name);
    report(Severity::error, image ? codes::kDanglingImageRef : codes::kDanglingSoundRef, pos,
           std::string(attr) + " refers to unknown " + (image ? "image" : "sound") + " '" + raw + "'",
           nearest(name, candidates));
  }

  void check_value(const std::optional<AttrValue>& v, RefKind kind, const SourcePos& pos, std::string_view attr) {
    if (!v) return;
    if (auto lit = std::get_if<expr::Literal>(&v->expr)) {
      if (kind == RefKind::image || kind == RefKind::sound) check_resource_name(kind, lit->text, pos, attr);
    } else if (auto ch = std::get_if<expr::RandomChoice>(&v->expr)) {
      if (kind == RefKind::image || kind == RefKind::sound)
        for (const auto& alt : ch->alternatives) check_resource_name(kind, alt, pos, attr);
    } else if (auto ref = std::get_if<expr::ListRef>(&v->expr)) {
      const ListDecl* list = doc_.find_list(ref->list);
      if (!list) {
        report(Severity::error, codes::kDanglingListRef, pos,
               std::string(attr) + " refers to unknown list '" + ref->list + "'", nearest(ref->list, names_of(doc_.lists)));
        return;
      }
      for (const auto& value : list->values) {
        if (value.rfind("rand:", 0) == 0) continue;
        if (kind == RefKind::image || kind == RefKind::sound) {
          if (list->element_type == ListElementType::colors) {
            report(Severity::error, codes::kListValueInvalid, pos,
                   std::string(attr) + " draws names from color list '" + list->name + "'");
            return;
          }
          check_resource_name(kind, value, list->pos, "list '" + list->name + "'");
        } else if (kind == RefKind::color && !parse_color(value)) {
          report(Severity::error, codes::kListValueInvalid, pos,
                 std::string(attr) + " draws colors from list '" + list->name + "' but '" + value + "' is not a color");
          return;
        }
      }
    }
  }

  void check_region_names(const SceneDecl& s, const std::vector<std::string>& names, const SourcePos& pos,
                          std::string_view attr) {
    for (const auto& n : names)
      if (!s.find_region(n))
        report(Severity::error, codes::kDanglingRegionRef, pos,
               std::string(attr) + " refers to unknown region '" + n + "' in scene '" + s.name + "'",
               nearest(n, names_of(s.regions)));
  }

  void check_state(const SceneDecl& s, const StateOverlay& o) {
    const auto& pos = o.pos;
    check_value(o.name_of_image, RefKind::image, pos, "nameOfImage");
    check_value(o.name_of_sound, RefKind::sound, pos, "nameOfSound");
    check_value(o.border_color, RefKind::color, pos, "borderColor");
    check_value(o.font_color, RefKind::color, pos, "fontColor");
    for (const auto* v : {&o.border_width, &o.speed, &o.animation_amplitude, &o.animation_period_ms, &o.text,
                          &o.font, &o.font_size})
      check_value(*v, RefKind::other, pos, "attribute");
    if (o.action_type == ActionType::transition_to_scene && o.name_of_target_scene.empty())
      report(Severity::error, codes::kMissingAttribute, pos, "transition to scene without 'nameOfTargetScene'");
    check_scene_ref(o.name_of_target_scene, pos, "nameOfTargetScene");
    if (o.action_type == ActionType::move && o.move_path.empty())
      report(Severity::warning, codes::kMissingMovePath, pos, "move action without a path");
    if (o.action_type != ActionType::move && !o.move_path.empty())
      report(Severity::warning, codes::kMovePathUnused, pos, "path is only used by the move action");
    check_region_names(s, o.regions_enabled_when_started, pos, "nameOfRegionEnabledWhenStarted");
    check_region_names(s, o.regions_disabled_when_started, pos, "nameOfRegionDisabledWhenStarted");
    check_region_names(s, o.regions_enabled_when_finished, pos, "nameOfRegionEnabledWhenFinished");
    check_region_names(s, o.regions_disabled_when_finished, pos, "nameOfRegionDisabledWhenFinished");
  }

  void check_positive(const std::optional<AttrValue>& v, const SourcePos& pos, std::string_view attr) {
    if (!v) return;
    if (auto lit = std::get_if<expr::Literal>(&v->expr))
      if (auto n = parse_number(lit->text); n && *n <= 0)
        report(Severity::error, codes::kOutOfRange, pos, std::string(attr) + " must be positive");
  }

  void check_scene(const SceneDecl& s) {
    check_value(s.background_color, RefKind::color, s.pos, "backgroundColor");
    check_value(s.background_image, RefKind::image, s.pos, "nameOfBackgroundImage");
    check_value(s.background_sound, RefKind::sound, s.pos, "nameOfBackgroundSound");
    check_value(s.blackout_color, RefKind::color, s.pos, "blackoutColor");
    check_value(s.spotlight_radius, RefKind::other, s.pos, "spotlightRadius");
    if (s.regions_to_disable) check_region_names(s, *s.regions_to_disable, s.pos, "listOfRegionsToDisable");
    if (s.region_enabled_after_all_disabled)
      check_region_names(s, {*s.region_enabled_after_all_disabled}, s.pos,
                         "nameOfRegionEnabledAfterAllRegionsAreDisabled");
    if (s.region_enabled_after_list_finished)
      check_region_names(s, {*s.region_enabled_after_list_finished}, s.pos, "nameOfRegionEnabledAfterListFinished");
    if (s.lists_switched_over_after_enter)
      for (const auto& l : *s.lists_switched_over_after_enter)
        if (!doc_.find_list(l))
          report(Severity::error, codes::kDanglingListRef, s.pos,
                 "nameOfListsSwitchedOverAfterEnter refers to unknown list '" + l + "'", nearest(l, names_of(doc_.lists)));
    const auto& h = doc_.scenes_header;
    if (s.spotlight && h.spotlight && *s.spotlight != *h.spotlight)
      report(Severity::info, codes::kSpotlightConflict, s.pos,
             "scene spotlight setting overrides the one on the scenes container");

    for (const auto& r : s.regions) {
      for (const auto* v : {&r.center_x, &r.center_y, &r.image_offset_x, &r.image_offset_y, &r.image_size_x,
                            &r.image_size_y, &r.text_offset_x, &r.text_offset_y, &r.bar_offset_x, &r.bar_offset_y})
        check_value(*v, RefKind::other, r.pos, "geometry");
      check_value(r.size_x, RefKind::other, r.pos, "sizeX");
      check_value(r.size_y, RefKind::other, r.pos, "sizeY");
      check_positive(r.size_x, r.pos, "sizeX");
      check_positive(r.size_y, r.pos, "sizeY");
      if (r.completion == CompletionCondition::time_elapsed && !r.reaction_duration_ms)
        report(Severity::error, codes::kMissingReactionDuration, r.pos,
               "region '" + r.name + "' completes on elapsed time but has no reactionDuration");
      check_state(s, r.base);
      if (r.activation) check_state(s, *r.activation);
      if (r.reaction) check_state(s, *r.reaction);
    }
  }

  void check_resources() {
    if (doc_.images.empty() && doc_.sounds.empty() && doc_.movies.empty()) return;
    if (!opts_.resource_root) {
      report(Severity::info, codes::kResourceNotChecked, doc_.scenes_header.pos,
             "resource files were not checked (no filesystem root given)");
      return;
    }
    auto check = [&](ResourceKind kind, const std::string& path, const SourcePos& pos) {
      std::string resolved = resolve_resource_path(doc_, kind, path);
      std::replace(resolved.begin(), resolved.end(), '\\', '/');
      std::filesystem::path p(resolved);
      if (p.is_relative()) p = *opts_.resource_root / p;
      std::error_code ec;
      if (!std::filesystem::exists(p, ec))
        report(Severity::error, codes::kResourceFileMissing, pos, "resource file '" + p.string() + "' does not exist");
    };
    for (const auto& i : doc_.images) check(ResourceKind::image, i.path, i.pos);
    for (const auto& s : doc_.sounds) check(ResourceKind::sound, s.path, s.pos);
    for (const auto& m : doc_.movies) check(ResourceKind::movie, m.path, m.pos);
  }

  const GimlDocument& doc_;
  const ValidateOptions& opts_;
  std::vector<Diagnostic> out_;
  std::set<std::tuple<std::string, std::string, std::string>> seen_;
};

void translate_node(xml::Node& node, std::string_view element_id, Language from, Language to,
                    const KeywordRegistry& reg) {
  node.name = reg.render(element_id, to);
  for (auto& attr : node.attributes) {
    auto id = schema::lookup_attribute(reg, attr.name, from, element_id);
    if (!id) continue;
    attr.name = reg.render(*id, to);
    const auto info = schema::attribute_info(*id);
    if (info.shape == schema::ValueShape::language) {
      attr.value = std::string(to_string(to));
    } else if (info.shape == schema::ValueShape::boolean || info.shape == schema::ValueShape::enumeration) {
      if (auto v = reg.lookup(attr.value, from, KeywordKind::enum_value, info.enum_owner))
        attr.value = reg.render(*v, to);
    }
  }
  for (auto& child : node.children) {
    if (!child.is_element()) continue;
    if (auto id = schema::lookup_child(reg, child.name, from, element_id))
      translate_node(child, *id, from, to, reg);
  }
}

}  // namespace

std::vector<Diagnostic> validate(const GimlDocument& doc, const ValidateOptions& options) {
  return Validator(doc, options).run();
}

TranslateResult translate(std::string_view source, Language target, std::optional<Language> source_hint) {
  TranslateResult result;
  auto parsed = parse_document(source, source_hint);
  result.diagnostics = parsed.diagnostics;
  if (!parsed.ok() || has_errors(parsed.diagnostics)) return result;
  if (source.size() >= 3 && static_cast<unsigned char>(source[0]) == 0xEF) source.remove_prefix(3);
  auto tree = xml::parse(source);
  translate_node(tree.root, "SETTINGS", parsed.document->source_language, target, KeywordRegistry::builtin());
  result.text = xml::write(tree);
  return result;
}

}  // namespace giml
