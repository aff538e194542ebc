// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "giml/analyzer.hpp"
#include "giml/engine.hpp"
#include "giml/gaze_io.hpp"
#include "giml/session.hpp"
#include "support.hpp"

using namespace giml;
using namespace giml::test;
namespace fs = std::filesystem;

namespace {

// Collects the reasons a criterion failed.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool passed() const { return count_ == 0; }
  std::string summary() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "" : "; ") + f;
    if (count_ > failures_.size()) out += "; ... " + std::to_string(count_) + " failures in total";
    return out;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

constexpr Point kInside{300, 200};
constexpr Point kOutside{900, 700};

std::size_t error_count(const std::string& text, std::string* first_code = nullptr) {
  auto r = parse_document(text);
  std::size_t n = 0;
  auto note = [&](const Diagnostic& d) {
    if (d.severity != Severity::error) return;
    if (n++ == 0 && first_code) *first_code = d.code;
  };
  for (const auto& d : r.diagnostics) note(d);
  if (r.document)
    for (const auto& d : validate(*r.document)) note(d);
  return n;
}

void corpus_fidelity(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& name : corpus()) c.expect(error_count(fixture_text(name)) == 0, name + " has errors");
  for (const auto& m : dangling_mutations()) {
    std::string code;
    const auto n = error_count(apply(m), &code);
    c.expect(n == 1 && code == m.code, m.fixture + " mutated to '" + m.to + "' gave " + std::to_string(n) +
                                           " errors (" + code + "), expected one " + m.code);
  }
  const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.expect(elapsed < 1.0, "took " + std::to_string(elapsed) + " s");
}

void dwell_timing(Check& c) {
  auto doc = load_fixture("fig16_states_text.xml");
  const Point inside{150, 100};
  {
    Engine engine(doc, EngineConfig{});
    auto ev = drive(engine, 0, 1500, inside);
    const auto* start = first(ev, EventKind::reaction_started);
    c.expect(start && start->t_ms >= 1000 && start->t_ms < 1010,
             "ReactionStarted at " + (start ? std::to_string(start->t_ms) : std::string("never")));
  }
  {
    Engine engine(doc, EngineConfig{});
    auto ev = drive(engine, 0, 490, inside);
    auto more = drive(engine, 500, 3000, kOutside);
    ev.insert(ev.end(), more.begin(), more.end());
    c.expect(only(ev, EventKind::reaction_started).empty(), "leaving at 500 ms still reacted");
  }
}

void navigation_golden(Check& c) {
  auto doc = load_fixture("fig11_navigation.xml");
  std::vector<GazeSample> s;
  for (long long base = 0; base < 4000; base += 2000) {
    hold(s, base, base + 1600, kInside);
    hold(s, base + 1600, base + 2000, kOutside);
  }
  RunOptions ro;
  ro.config.seed = 11;
  ro.document_label = "fig11_navigation.xml";
  auto out = run_trace(doc, s, ro);

  struct Expected {
    EventKind kind;
    std::string scene;
  };
  const std::vector<Expected> golden{
      {EventKind::scene_entered, "scene1"},     {EventKind::region_activated, "scene1"},
      {EventKind::reaction_started, "scene1"},  {EventKind::scene_left, "scene1"},
      {EventKind::scene_entered, "scene2"},     {EventKind::region_activated, "scene2"},
      {EventKind::returned_to_normal, "scene2"}, {EventKind::region_activated, "scene2"},
      {EventKind::reaction_started, "scene2"},  {EventKind::scene_left, "scene2"},
      {EventKind::scene_entered, "scene1"}};
  std::vector<EngineEvent> seq;
  for (const auto& e : out.events)
    if (e.kind != EventKind::warning) seq.push_back(e);
  c.expect(seq.size() >= golden.size(), "only " + std::to_string(seq.size()) + " events");
  for (std::size_t i = 0; i < golden.size() && i < seq.size(); ++i)
    c.expect(seq[i].kind == golden[i].kind && seq[i].scene == golden[i].scene,
             "event " + std::to_string(i) + " is " + std::string(to_string(seq[i].kind)) + "(" + seq[i].scene +
                 "), expected " + std::string(to_string(golden[i].kind)) + "(" + golden[i].scene + ")");

  const auto dir = fs::temp_directory_path() / "giml_acceptance_fig11";
  fs::remove_all(dir);
  const auto a = write_run(run_trace(doc, s, ro), dir / "a");
  const auto b = write_run(run_trace(doc, s, ro), dir / "b");
  c.expect(read_text(a.events) == read_text(b.events), "events.csv differs between runs");
  fs::remove_all(dir);
}

std::vector<std::string> imgs_draws(const std::vector<EngineEvent>& ev) {
  std::vector<std::string> out;
  for (const auto& e : ev)
    if (e.kind == EventKind::list_switched_over && e.payload.rfind("imgs[", 0) == 0)
      out.push_back(e.payload.substr(e.payload.find('=') + 1));
  return out;
}

void list_exhaustion(Check& c) {
  auto doc = load_fixture("fig12_lists.xml");
  const std::multiset<std::string> expected{"img1", "img2", "img3"};
  std::set<std::vector<std::string>> orders;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto tag = "seed " + std::to_string(seed) + ": ";
    EngineConfig cfg;
    cfg.seed = seed;
    Engine engine(doc, cfg);
    std::vector<EngineEvent> ev = engine.initial_events();
    for (long long base = 0; base < 12000; base += 2000) {
      auto a = drive(engine, base, base + 1590, kInside);
      auto b = drive(engine, base + 1600, base + 1990, kOutside);
      ev.insert(ev.end(), a.begin(), a.end());
      ev.insert(ev.end(), b.begin(), b.end());
    }
    std::vector<long long> entries;
    for (const auto& e : ev)
      if (e.kind == EventKind::scene_entered && e.scene == "scene1") entries.push_back(e.t_ms);
    if (entries.size() < 4) {
      c.expect(false, tag + "only " + std::to_string(entries.size()) + " entries");
      continue;
    }
    const auto exhausted = only(ev, EventKind::list_exhausted);
    c.expect(!exhausted.empty() && exhausted.front().t_ms == entries[3], tag + "ListExhausted not on entry 4");
    const auto* enabled = first(ev, EventKind::region_enabled, "region2");
    c.expect(enabled && enabled->t_ms == entries[3], tag + "region2 not enabled on entry 4");
    const auto draws = imgs_draws(ev);
    if (draws.size() < 3) {
      c.expect(false, tag + "fewer than three draws");
      continue;
    }
    const std::vector<std::string> firsts(draws.begin(), draws.begin() + 3);
    c.expect(std::multiset<std::string>(firsts.begin(), firsts.end()) == expected, tag + "draws not a permutation");
    orders.insert(firsts);
  }
  c.expect(orders.size() > 1, "every seed drew the same order");
}

void group_synchrony(Check& c) {
  auto doc = load_fixture("fig13_groups.xml");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    EngineConfig cfg;
    cfg.seed = seed;
    Engine engine(doc, cfg);
    std::vector<EngineEvent> ev = engine.initial_events();
    for (long long base = 0; base < 16000; base += 2000) {
      auto a = drive(engine, base, base + 1590, kInside);
      auto b = drive(engine, base + 1600, base + 1990, kOutside);
      ev.insert(ev.end(), a.begin(), a.end());
      ev.insert(ev.end(), b.begin(), b.end());
    }
    // Each switch-over emits one event per member at the same instant.
    std::map<long long, std::map<std::string, std::string>> index_at;
    std::size_t switches = 0;
    for (const auto& e : ev) {
      if (e.kind != EventKind::list_switched_over) continue;
      const auto open = e.payload.find('[');
      const auto close = e.payload.find(']');
      const auto list = e.payload.substr(0, open);
      if (list == "imgs") ++switches;
      index_at[e.t_ms][list] = e.payload.substr(open + 1, close - open - 1);
    }
    c.expect(switches >= 3, "seed " + std::to_string(seed) + ": only " + std::to_string(switches) + " switch-overs");
    for (const auto& [t, lists] : index_at) {
      const auto a = lists.find("imgs");
      const auto b = lists.find("captions");
      c.expect(a != lists.end() && b != lists.end() && a->second == b->second,
               "seed " + std::to_string(seed) + " t=" + std::to_string(t) + ": grouped indices differ");
    }
  }
}

void translation_round_trip(Check& c) {
  for (const auto& name : corpus()) {
    const auto source = fixture_text(name);
    const auto original = load_fixture(name);
    for (auto l1 : kAllLanguages)
      for (auto l2 : kAllLanguages) {
        const auto tag = name + " " + std::string(to_string(l1)) + "->" + std::string(to_string(l2)) + ": ";
        auto t1 = translate(source, l1);
        if (!t1.ok()) {
          c.expect(false, tag + "first translation failed");
          continue;
        }
        auto t2 = translate(*t1.text, l2);
        if (!t2.ok()) {
          c.expect(false, tag + "second translation failed");
          continue;
        }
        auto back = translate(*t2.text, original.source_language);
        auto p = back.ok() ? parse_document(*back.text) : ParseResult{};
        c.expect(p.ok() && canonically_equal(*p.document, original), tag + "not canonically equal");
        c.expect(back.ok() && raw_text_attributes(*back.text) == raw_text_attributes(source),
                 tag + "text values changed");
      }
  }
}

const EngineEvent* finish_of(const std::vector<EngineEvent>& ev) { return first(ev, EventKind::reaction_finished); }

std::string region_doc(const std::string& attrs, const std::string& inner, const std::string& decls) {
  return R"(<settings language="en">)" + decls +
         R"(<scenes nameOfDefaultScene="s" originalScreenSizeX="1024" originalScreenSizeY="768">
      <scene name="s"><region name="r" shape="rectangle" locationOfCenterX="300" locationOfCenterY="200"
        sizeX="200" sizeY="200" )" + attrs + ">" + inner + "</region></scene></scenes></settings>";
}

// Runs inside until `leave`, outside afterwards, and reports when the reaction finished.
std::optional<long long> finish_time(const GimlDocument& doc, const EngineConfig& cfg, long long leave,
                                     long long until) {
  Engine engine(doc, cfg);
  auto ev = drive(engine, 0, leave - cfg.tick_ms, kInside);
  auto more = drive(engine, leave, until, kOutside);
  ev.insert(ev.end(), more.begin(), more.end());
  const auto* fin = finish_of(ev);
  if (!fin) return std::nullopt;
  return fin->t_ms;
}

void completion_matrix(Check& c) {
  struct Case {
    std::string label;
    const GimlDocument* doc;
    EngineConfig cfg;
    long long leave;
    long long expected;
  };
  const auto leave_doc = parse_ok(region_doc("", "", ""));
  const auto sound_doc = parse_ok(region_doc(R"(conditionOfReactionCompletion="SoundEnding")",
                                             R"(<reaction nameOfSound="snd"/>)",
                                             R"(<sounds><sound name="snd" path="snd.wav"/></sounds>)"));
  const auto time_doc = load_fixture("fig10_completion.xml");
  EngineConfig sound_cfg;
  sound_cfg.media_durations_ms["snd"] = 3000;
  // Dwell completes at 1000 ms, so sounds end at 4000 and the 5000 ms reaction duration at 6000.
  const std::vector<Case> cases{
      {"region_leave, leave at 1500", &leave_doc, {}, 1500, 1500},
      {"region_leave, leave at 5000", &leave_doc, {}, 5000, 5000},
      {"sound_ending, leave before the sound ends", &sound_doc, sound_cfg, 1500, 4000},
      {"sound_ending, leave after the sound ends", &sound_doc, sound_cfg, 5000, 5000},
      {"time_elapsed, leave before the duration", &time_doc, {}, 2000, 6000},
      {"time_elapsed, leave after the duration", &time_doc, {}, 8000, 8000},
  };
  for (const auto& k : cases) {
    const auto t = finish_time(*k.doc, k.cfg, k.leave, 10000);
    c.expect(t && *t >= k.expected && *t < k.expected + k.cfg.tick_ms,
             k.label + ": finished at " + (t ? std::to_string(*t) : std::string("never")));
    c.expect(!t || *t >= k.leave, k.label + ": finished before the gaze left");
  }
  // Never leaving never finishes, whatever the secondary condition.
  for (const auto* d : {&leave_doc, &sound_doc, &time_doc}) {
    Engine engine(*d, sound_cfg);
    c.expect(!finish_of(drive(engine, 0, 12000, kInside)), "finished while the gaze stayed inside");
  }
}

void idt_oracle(Check& c) {
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    auto trace = random_trace(gen, 1 + gen() % 1000);
    const double threshold = 20 + static_cast<double>(gen() % 100);
    const long long min_dur = 40 + static_cast<long long>(gen() % 150);
    c.expect(detect_fixations(trace, threshold, min_dur).fixations == brute_force_fixations(trace, threshold, min_dur),
             "trial " + std::to_string(trial) + " differs from the oracle");
  }
}

void fsm_properties(Check& c) {
  const std::vector<std::pair<std::string, std::string>> docs{
      {"synthetic", fuzz_document()},
      {"fig11", fixture_text("fig11_navigation.xml")},
      {"fig12", fixture_text("fig12_lists.xml")},
      {"fig13", fixture_text("fig13_groups.xml")},
      {"fig10", fixture_text("fig10_completion.xml")}};
  for (const auto& [label, text] : docs)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const auto report = fuzz_fsm(text, seed, 10000);
      c.expect(report.ticks == 10000, label + ": stopped after " + std::to_string(report.ticks) + " ticks");
      c.expect(report.reactions > 0, label + ": no reaction was ever started");
      for (const auto& v : report.violations) c.expect(false, label + " seed " + std::to_string(seed) + ": " + v);
    }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"corpus fidelity", corpus_fidelity},
      {"dwell timing", dwell_timing},
      {"fig11 navigation golden run", navigation_golden},
      {"fig12 list exhaustion", list_exhaustion},
      {"fig13 group synchrony", group_synchrony},
      {"translation round trip", translation_round_trip},
      {"reaction completion matrix", completion_matrix},
      {"I-DT oracle", idt_oracle},
      {"FSM property suite", fsm_properties},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    if (c.passed()) {
      std::cout << "PASS " << name << "\n";
    } else {
      ++failed;
      std::cout << "FAIL " << name << ": " << c.summary() << "\n";
    }
  }
  return failed == 0 ? 0 : 1;
}
