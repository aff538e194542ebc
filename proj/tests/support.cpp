#include "support.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace giml::test {

std::filesystem::path fixture_dir() { return GIML_FIXTURE_DIR; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing test file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixture_text(const std::string& name) { return read_text(fixture_dir() / name); }

GimlDocument parse_ok(const std::string& text) {
  auto r = parse_document(text);
  if (!r.document) throw std::runtime_error("fixture does not parse");
  return std::move(*r.document);
}

GimlDocument load_fixture(const std::string& name) { return parse_ok(fixture_text(name)); }

const std::vector<std::string>& corpus() {
  static const std::vector<std::string> names{
      "fig04_resources.xml",  "fig05_scene.xml",    "fig06_region.xml",      "fig07_relative.xml",
      "fig08_states.xml",     "fig09_text.xml",     "fig10_completion.xml",  "fig11_navigation.xml",
      "fig12_lists.xml",      "fig13_groups.xml",   "fig16_states_text.xml", "fig17_two_scenes.xml"};
  return names;
}

void hold(std::vector<GazeSample>& out, long long from, long long to, Point p, long long step_ms) {
  for (long long t = from; t < to; t += step_ms) out.push_back(GazeSample{t, p.x, p.y, true, std::nullopt, {}});
}

std::vector<EngineEvent> drive(Engine& engine, long long from, long long to, std::optional<Point> gaze,
                               long long tick_ms) {
  std::vector<EngineEvent> out;
  for (long long t = from; t <= to; t += tick_ms) {
    InputTick in;
    in.t_ms = t;
    if (gaze) in.gaze = GazePoint{gaze->x, gaze->y, true};
    auto ev = engine.step(in);
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

std::vector<EngineEvent> only(const std::vector<EngineEvent>& events, EventKind kind) {
  std::vector<EngineEvent> out;
  for (const auto& e : events)
    if (e.kind == kind) out.push_back(e);
  return out;
}

const EngineEvent* first(const std::vector<EngineEvent>& events, EventKind kind, const std::string& region) {
  for (const auto& e : events)
    if (e.kind == kind && (region.empty() || e.region == region)) return &e;
  return nullptr;
}

namespace {
double spread(const std::vector<GazeSample>& s, std::size_t a, std::size_t b) {
  double minx = std::numeric_limits<double>::infinity(), maxx = -minx, miny = minx, maxy = -minx;
  for (std::size_t i = a; i <= b; ++i) {
    minx = std::min(minx, s[i].x);
    maxx = std::max(maxx, s[i].x);
    miny = std::min(miny, s[i].y);
    maxy = std::max(maxy, s[i].y);
  }
  return (maxx - minx) + (maxy - miny);
}
}  // namespace

std::vector<Fixation> brute_force_fixations(const std::vector<GazeSample>& s, double threshold,
                                            long long min_duration) {
  std::vector<Fixation> out;
  std::size_t i = 0;
  while (i < s.size()) {
    // Smallest all-valid window starting at i whose span reaches the minimum.
    std::optional<std::size_t> end;
    for (std::size_t j = i; j < s.size() && s[j].valid && s[i].valid; ++j) {
      if (s[j].t_ms - s[i].t_ms >= min_duration) {
        end = j;
        break;
      }
    }
    if (!end || spread(s, i, *end) > threshold) {
      ++i;
      continue;
    }
    std::size_t j = *end;
    while (j + 1 < s.size() && s[j + 1].valid && spread(s, i, j + 1) <= threshold) ++j;
    Fixation f;
    f.start_ms = s[i].t_ms;
    f.end_ms = s[j].t_ms;
    f.first_index = i;
    f.sample_count = j - i + 1;
    double sx = 0, sy = 0;
    for (std::size_t k = i; k <= j; ++k) {
      sx += s[k].x;
      sy += s[k].y;
    }
    f.x = sx / static_cast<double>(f.sample_count);
    f.y = sy / static_cast<double>(f.sample_count);
    f.dispersion = spread(s, i, j);
    out.push_back(f);
    i = j + 1;
  }
  return out;
}

}  // namespace giml::test

namespace giml::test {

const std::vector<Mutation>& dangling_mutations() {
  static const std::vector<Mutation> m{
      {"fig04_resources.xml", "nameOfDefaultScene=\"scene1\"", "nameOfDefaultScene=\"scene9\"", "DANGLING_SCENE_REF"},
      {"fig05_scene.xml", "nameOfDefaultScene=\"scene1\"", "nameOfDefaultScene=\"scene9\"", "DANGLING_SCENE_REF"},
      {"fig06_region.xml", "nameOfImage=\"img1\"", "nameOfImage=\"img9\"", "DANGLING_IMAGE_REF"},
      {"fig07_relative.xml", "nameOfImage=\"img1\"", "nameOfImage=\"img9\"", "DANGLING_IMAGE_REF"},
      {"fig08_states.xml", "<activation nameOfImage=\"img2\"", "<activation nameOfImage=\"img9\"", "DANGLING_IMAGE_REF"},
      {"fig09_text.xml", "nameOfDefaultScene=\"scene1\"", "nameOfDefaultScene=\"scene9\"", "DANGLING_SCENE_REF"},
      {"fig10_completion.xml", "<reaction nameOfImage=\"img3\"", "<reaction nameOfImage=\"img9\"", "DANGLING_IMAGE_REF"},
      {"fig11_navigation.xml", "nameOfTargetScene=\"scene1\"", "nameOfTargetScene=\"scene3\"", "DANGLING_SCENE_REF"},
      {"fig12_lists.xml", "nameOfImage=\"@imgs\"", "nameOfImage=\"@imgz\"", "DANGLING_LIST_REF"},
      {"fig13_groups.xml", "nameOfRegionEnabledAfterListFinished=\"region2\"",
       "nameOfRegionEnabledAfterListFinished=\"region9\"", "DANGLING_REGION_REF"},
      {"fig16_states_text.xml", "nameOfDefaultScene=\"first\"", "nameOfDefaultScene=\"second\"", "DANGLING_SCENE_REF"},
      {"fig17_two_scenes.xml", "nameOfTargetScene=\"end\"", "nameOfTargetScene=\"ending\"", "DANGLING_SCENE_REF"},
  };
  return m;
}

std::string apply(const Mutation& m) {
  auto text = fixture_text(m.fixture);
  const auto pos = text.find(m.from);
  if (pos == std::string::npos) throw std::runtime_error("mutation site not found in " + m.fixture);
  text.replace(pos, m.from.size(), m.to);
  return text;
}

std::string upper_case_names(const std::string& xml) {
  std::string out;
  out.reserve(xml.size());
  bool in_tag = false, in_quote = false, skip = false;
  char quote = 0;
  for (std::size_t i = 0; i < xml.size(); ++i) {
    char c = xml[i];
    if (!in_tag) {
      if (c == '<') {
        in_tag = true;
        skip = i + 1 < xml.size() && (xml[i + 1] == '?' || xml[i + 1] == '!');
      }
      out += c;
      continue;
    }
    if (in_quote) {
      if (c == quote) in_quote = false;
      out += c;
      continue;
    }
    if (c == '"' || c == '\'') {
      in_quote = true;
      quote = c;
    } else if (c == '>') {
      in_tag = false;
    } else if (!skip && c >= 'a' && c <= 'z') {
      c = static_cast<char>(c - 'a' + 'A');
    }
    out += c;
  }
  return out;
}

std::vector<std::string> text_values(const GimlDocument& doc) {
  std::vector<std::string> out;
  auto add = [&](const StateOverlay* o) {
    if (o && o->text) out.push_back(o->text->raw);
  };
  for (const auto& s : doc.scenes)
    for (const auto& r : s.regions) {
      add(&r.base);
      add(r.activation ? &*r.activation : nullptr);
      add(r.reaction ? &*r.reaction : nullptr);
    }
  return out;
}

std::vector<std::string> raw_text_attributes(const std::string& xml) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = xml.find("text=\"", pos)) != std::string::npos) {
    const bool word_start = pos == 0 || !std::isalnum(static_cast<unsigned char>(xml[pos - 1]));
    const auto end = xml.find('"', pos + 6);
    if (word_start) out.push_back(xml.substr(pos + 6, end - pos - 6));
    pos = end + 1;
  }
  return out;
}

}  // namespace giml::test

namespace giml::test {

namespace {

enum class Ref { normal, activated, reacting, finishing };

struct Reducer {
  std::map<std::pair<std::string, std::string>, Ref> state;
  std::map<std::pair<std::string, std::string>, int> open;
  std::size_t reactions = 0;
  std::vector<std::string> violations;

  void apply(const EngineEvent& e) {
    const auto key = std::make_pair(e.scene, e.region);
    auto& s = state[key];
    auto bad = [&](const char* what) {
      violations.push_back(std::string(what) + " at " + std::to_string(e.t_ms) + " " + e.scene + "/" + e.region);
    };
    switch (e.kind) {
      case EventKind::region_activated:
        if (s != Ref::normal) bad("activation from a non-normal state");
        s = Ref::activated;
        break;
      case EventKind::reaction_started:
        if (s != Ref::activated) bad("reaction not entered from activated");
        s = Ref::reacting;
        ++open[key];
        ++reactions;
        break;
      case EventKind::reaction_finished:
        if (s != Ref::reacting) bad("finish without a reaction");
        s = Ref::finishing;
        --open[key];
        break;
      case EventKind::returned_to_normal:
        if (s != Ref::activated && s != Ref::finishing) bad("reacting region returned without finishing");
        s = Ref::normal;
        break;
      default:
        break;
    }
  }

  static RegionState expected(Ref r) {
    if (r == Ref::activated) return RegionState::activated;
    if (r == Ref::reacting) return RegionState::reacting;
    return RegionState::normal;
  }
};

}  // namespace

std::string fuzz_document() {
  return R"(<settings language="en">
    <sounds><sound name="snd" path="s.wav"/></sounds>
    <scenes nameOfDefaultScene="a" originalScreenSizeX="1000" originalScreenSizeY="1000" nameOfPauseScene="p">
      <scene name="a" blackoutDegree="100" blockingRegionsDuringBlackout="yes">
        <region name="go" shape="rectangle" locationOfCenterX="100" locationOfCenterY="100" sizeX="150" sizeY="150">
          <reaction actionType="transitionToScene" nameOfTargetScene="b"/>
        </region>
        <region name="dark" shape="circle" locationOfCenterX="400" locationOfCenterY="100" sizeX="200" sizeY="200"
          ableToActivateBlackout="yes" conditionOfReactionCompletion="TimeElapsed" reactionDuration="700"/>
        <region name="snd" shape="ellipse" locationOfCenterX="700" locationOfCenterY="100" sizeX="200" sizeY="120"
          conditionOfReactionCompletion="SoundEnding" reactionKey="k">
          <reaction nameOfSound="snd" nameOfRegionDisabledWhenStarted="go" nameOfRegionEnabledWhenFinished="go"/>
        </region>
        <region name="mover" shape="rectangle" locationOfCenterX="100" locationOfCenterY="500" sizeX="150" sizeY="150"
          conditionOfReactionCompletion="TimeElapsed" reactionDuration="400" dwellTime="300">
          <reaction actionType="move" path="100,0;0,100" speed="300"/>
        </region>
        <region name="resetter" shape="rectangle" locationOfCenterX="500" locationOfCenterY="500" sizeX="150" sizeY="150">
          <reaction actionType="resetScene"/>
        </region>
      </scene>
      <scene name="b" resetAfterEnter="yes">
        <region name="back" shape="rectangle" locationOfCenterX="100" locationOfCenterY="100" sizeX="150" sizeY="150"
          holdSceneTransitionUntilReactionCompleted="yes" conditionOfReactionCompletion="TimeElapsed" reactionDuration="300">
          <reaction actionType="transitionToScene" nameOfTargetScene="a"/>
        </region>
        <region name="auto" shape="rectangle" locationOfCenterX="800" locationOfCenterY="800" sizeX="100" sizeY="100"
          automaticReactionAfterTime="1500">
          <reaction actionType="resetRegion"/>
        </region>
      </scene>
      <scene name="p">
        <region name="resume" shape="rectangle" locationOfCenterX="500" locationOfCenterY="500" sizeX="300" sizeY="300">
          <reaction actionType="transitionToScene" nameOfTargetScene="a"/>
        </region>
      </scene>
    </scenes></settings>)";
}

FuzzReport fuzz_fsm(const std::string& doc_text, std::uint64_t seed, int ticks) {
  const std::vector<Point> targets{{100, 100}, {400, 100}, {700, 100}, {100, 500}, {500, 500},
                                   {800, 800}, {300, 200}, {300, 600}, {950, 950}};
  FuzzReport report;
  auto doc = parse_ok(doc_text);
  EngineConfig cfg;
  cfg.seed = seed;
  cfg.media_durations_ms["snd"] = 900;
  Engine engine(doc, cfg);
  Reducer red;
  for (const auto& e : engine.initial_events()) red.apply(e);
  std::mt19937_64 gen(seed * 7919 + doc_text.size());
  Point gaze = targets[0];
  for (int i = 0; i < ticks; ++i) {
    InputTick in;
    in.t_ms = static_cast<long long>(i) * cfg.tick_ms;
    // Gaze holds a target for about 1.7 s on average, long enough to dwell.
    const auto roll = gen() % 1000;
    if (roll < 4) gaze = targets[gen() % targets.size()];
    else if (roll < 6) gaze = Point{static_cast<double>(gen() % 1000), static_cast<double>(gen() % 1000)};
    in.gaze = GazePoint{gaze.x, gaze.y, gen() % 500 != 0};
    if (gen() % 400 == 0) in.keys.push_back("k");
    if (gen() % 1500 == 0) in.keys.push_back("Pause");
    for (const auto& e : engine.step(in)) red.apply(e);
    ++report.ticks;
    for (const auto& snap : engine.snapshot()) {
      if (snap.dwell_accum_ms < 0)
        red.violations.push_back("negative dwell at " + std::to_string(in.t_ms) + " " + snap.region);
      const auto it = red.state.find({snap.scene, snap.region});
      const auto expect = it == red.state.end() ? RegionState::normal : Reducer::expected(it->second);
      if (snap.state != expect)
        red.violations.push_back("engine and reducer disagree at " + std::to_string(in.t_ms) + " " + snap.scene +
                                 "/" + snap.region);
    }
    if (!red.violations.empty()) break;
  }
  for (const auto& e : engine.stop(static_cast<long long>(ticks) * cfg.tick_ms, "end")) red.apply(e);
  for (const auto& [key, n] : red.open)
    if (n != 0) red.violations.push_back("unpaired ReactionStarted for " + key.first + "/" + key.second);
  report.reactions = red.reactions;
  report.violations = std::move(red.violations);
  return report;
}

}  // namespace giml::test

namespace giml::test {

std::vector<GazeSample> random_trace(std::mt19937_64& gen, std::size_t n) {
  std::vector<GazeSample> out;
  long long t = 0;
  double cx = 500, cy = 400;
  std::uniform_real_distribution<double> jitter(-15, 15);
  for (std::size_t i = 0; i < n; ++i) {
    t += 1 + static_cast<long long>(gen() % 20);
    const auto roll = gen() % 100;
    if (roll < 4) {
      cx = static_cast<double>(gen() % 1024);
      cy = static_cast<double>(gen() % 768);
    }
    GazeSample s;
    s.t_ms = t;
    s.x = roll < 10 ? static_cast<double>(gen() % 1024) : cx + jitter(gen);
    s.y = roll < 10 ? static_cast<double>(gen() % 768) : cy + jitter(gen);
    s.valid = gen() % 60 != 0;
    out.push_back(s);
  }
  return out;
}

}  // namespace giml::test
