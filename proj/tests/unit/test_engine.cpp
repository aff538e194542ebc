#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "giml/engine.hpp"
#include "giml/protocol.hpp"
#include "support.hpp"

using namespace giml;
using namespace giml::test;

namespace {

// One scene with one 200x200 region at (300,200) plus whatever the caller adds.
std::string one_region(const std::string& region_attrs, const std::string& inner = "",
                       const std::string& decls = "", const std::string& scene_attrs = "",
                       const std::string& more_regions = "") {
  return R"(<settings language="en">)" + decls +
         R"(<scenes nameOfDefaultScene="s" originalScreenSizeX="1024" originalScreenSizeY="768">
      <scene name="s" )" + scene_attrs + R"(>
        <region name="r" shape="rectangle" locationOfCenterX="300" locationOfCenterY="200"
          sizeX="200" sizeY="200" )" + region_attrs + ">" + inner + "</region>" + more_regions +
         "</scene></scenes></settings>";
}

constexpr Point kInside{300, 200};
constexpr Point kOutside{900, 700};

std::vector<EngineEvent> all_events(Engine& e, std::vector<EngineEvent> more) {
  auto out = e.initial_events();
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

}  // namespace

TEST_CASE("dwell of one second starts the reaction and states change the text") {
  auto doc = load_fixture("fig16_states_text.xml");
  Engine engine(doc, EngineConfig{});
  const auto& f0 = engine.current_frame();
  REQUIRE(f0.regions.size() == 1);
  CHECK(f0.regions[0].text == "Navy");
  CHECK(f0.regions[0].font == "Times");
  CHECK(f0.regions[0].font_size == 30);
  CHECK(f0.background_color == to_hex(*parse_color("Beige")));

  auto ev = drive(engine, 0, 0, Point{150, 100});
  const auto* act = first(ev, EventKind::region_activated);
  REQUIRE(act);
  CHECK(act->t_ms == 0);
  CHECK(engine.current_frame().regions[0].text == "Blue");

  ev = drive(engine, 10, 1500, Point{150, 100});
  const auto* start = first(ev, EventKind::reaction_started);
  REQUIRE(start);
  CHECK(start->t_ms >= 1000);
  CHECK(start->t_ms < 1010);
  CHECK(engine.current_frame().regions[0].text == "Cyan");
}

TEST_CASE("leaving before the dwell threshold never reacts") {
  auto doc = load_fixture("fig16_states_text.xml");
  Engine engine(doc, EngineConfig{});
  auto ev = drive(engine, 0, 490, Point{150, 100});
  auto more = drive(engine, 500, 3000, kOutside);
  ev.insert(ev.end(), more.begin(), more.end());
  CHECK(only(ev, EventKind::reaction_started).empty());
  REQUIRE(first(ev, EventKind::returned_to_normal));
  CHECK(first(ev, EventKind::returned_to_normal)->t_ms == 500);
  CHECK(engine.current_frame().regions[0].text == "Navy");
}

TEST_CASE("dwell exactness over random entry times, thresholds and ticks") {
  std::mt19937_64 gen(42);
  auto doc = parse_ok(one_region(""));
  for (int trial = 0; trial < 200; ++trial) {
    EngineConfig cfg;
    cfg.tick_ms = std::uniform_int_distribution<long long>(1, 40)(gen);
    cfg.dwell_ms = std::uniform_int_distribution<long long>(50, 3000)(gen);
    const long long t0 = std::uniform_int_distribution<long long>(0, 200)(gen) * cfg.tick_ms;
    Engine engine(doc, cfg);
    std::vector<EngineEvent> ev;
    if (t0 > 0) {
      auto a = drive(engine, 0, t0 - cfg.tick_ms, kOutside, cfg.tick_ms);
      ev.insert(ev.end(), a.begin(), a.end());
    }
    auto b = drive(engine, t0, t0 + cfg.dwell_ms + 2 * cfg.tick_ms, kInside, cfg.tick_ms);
    ev.insert(ev.end(), b.begin(), b.end());
    const auto* start = first(ev, EventKind::reaction_started);
    INFO("tick " << cfg.tick_ms << " dwell " << cfg.dwell_ms << " t0 " << t0);
    REQUIRE(start);
    CHECK(start->t_ms >= t0 + cfg.dwell_ms);
    CHECK(start->t_ms < t0 + cfg.dwell_ms + cfg.tick_ms);
  }
}

TEST_CASE("two-way navigation keeps the state of the left scene") {
  auto doc = load_fixture("fig11_navigation.xml");
  Engine engine(doc, EngineConfig{});
  CHECK(engine.current_scene() == "scene1");
  CHECK(engine.current_frame().regions[0].image == "img1");

  auto ev = drive(engine, 0, 1000, kInside);
  REQUIRE(first(ev, EventKind::reaction_started));
  // Transition happens in the same tick as the reaction.
  const auto* left = first(ev, EventKind::scene_left);
  const auto* entered = first(ev, EventKind::scene_entered);
  REQUIRE(left);
  REQUIRE(entered);
  CHECK(left->t_ms == 1000);
  CHECK(entered->scene == "scene2");
  CHECK(entered->t_ms == 1000);
  CHECK(engine.region("scene1", "region1")->state == RegionState::reacting);

  drive(engine, 1010, 1590, kInside);
  drive(engine, 1600, 1990, kOutside);
  ev = drive(engine, 2000, 3000, kInside);
  entered = first(ev, EventKind::scene_entered);
  REQUIRE(entered);
  CHECK(entered->scene == "scene1");
  CHECK(engine.region("scene1", "region1")->state == RegionState::reacting);
  ev = drive(engine, 3010, 3600, kOutside);
  const auto* finished = first(ev, EventKind::reaction_finished, "region1");
  REQUIRE(finished);
  CHECK(finished->scene == "scene1");
  CHECK(finished->t_ms == 3010);
}

TEST_CASE("list exhaustion on the fourth entry enables the end region") {
  auto doc = load_fixture("fig12_lists.xml");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EngineConfig cfg;
    cfg.seed = seed;
    Engine engine(doc, cfg);
    std::vector<std::string> draws;
    for (const auto& e : engine.initial_events())
      if (e.kind == EventKind::list_switched_over && e.payload.rfind("imgs[", 0) == 0)
        draws.push_back(e.payload.substr(e.payload.find('=') + 1));
    REQUIRE(draws.size() == 1);
    CHECK(engine.current_frame().regions[0].image == draws[0]);

    std::vector<EngineEvent> ev = engine.initial_events();
    for (long long base = 0; base < 12000; base += 2000) {
      auto a = drive(engine, base == 0 ? 0 : base, base + 1590, kInside);
      auto b = drive(engine, base + 1600, base + 1990, kOutside);
      ev.insert(ev.end(), a.begin(), a.end());
      ev.insert(ev.end(), b.begin(), b.end());
    }
    std::vector<long long> entries;
    for (const auto& e : ev)
      if (e.kind == EventKind::scene_entered && e.scene == "scene1") entries.push_back(e.t_ms);
    REQUIRE(entries.size() >= 4);
    const auto exhausted = only(ev, EventKind::list_exhausted);
    REQUIRE_FALSE(exhausted.empty());
    CHECK(exhausted.front().t_ms == entries[3]);
    const auto* enabled = first(ev, EventKind::region_enabled, "region2");
    REQUIRE(enabled);
    CHECK(enabled->t_ms >= entries[3]);
    CHECK(enabled->t_ms < entries[3] + cfg.tick_ms);
    for (const auto& e : ev)
      if (e.kind == EventKind::list_switched_over && e.payload.rfind("imgs[", 0) == 0 && e.t_ms > 0)
        draws.push_back(e.payload.substr(e.payload.find('=') + 1));
    REQUIRE(draws.size() >= 3);
    std::multiset<std::string> firsts(draws.begin(), draws.begin() + 3);
    CHECK(firsts == std::multiset<std::string>{"img1", "img2", "img3"});
  }
}

TEST_CASE("region leave completion finishes on the first outside tick") {
  auto doc = parse_ok(one_region(""));
  Engine engine(doc, EngineConfig{});
  drive(engine, 0, 1500, kInside);
  auto ev = drive(engine, 1510, 1600, kOutside);
  const auto* fin = first(ev, EventKind::reaction_finished);
  REQUIRE(fin);
  CHECK(fin->t_ms == 1510);
  CHECK(fin->payload == "region_leave");
}

TEST_CASE("time elapsed completion waits for both the duration and the leave") {
  auto doc = load_fixture("fig10_completion.xml");
  SUBCASE("leave early, finish at the end of the duration") {
    Engine engine(doc, EngineConfig{});
    drive(engine, 0, 2000, kInside);
    auto ev = drive(engine, 2010, 8000, kOutside);
    const auto* fin = first(ev, EventKind::reaction_finished);
    REQUIRE(fin);
    CHECK(fin->t_ms >= 6000);
    CHECK(fin->t_ms < 6010);
  }
  SUBCASE("leave late, finish at the leave") {
    Engine engine(doc, EngineConfig{});
    auto ev = drive(engine, 0, 8000, kInside);
    CHECK(only(ev, EventKind::reaction_finished).empty());
    ev = drive(engine, 8010, 8100, kOutside);
    const auto* fin = first(ev, EventKind::reaction_finished);
    REQUIRE(fin);
    CHECK(fin->t_ms == 8010);
  }
}

TEST_CASE("sound ending completion uses the virtual sound duration") {
  const std::string decls = R"(<sounds><sound name="snd" path="snd.wav"/></sounds>)";
  auto doc = parse_ok(one_region(R"(conditionOfReactionCompletion="SoundEnding")", R"(<reaction nameOfSound="snd"/>)", decls));
  EngineConfig cfg;
  cfg.media_durations_ms["snd"] = 3000;
  SUBCASE("leave before the sound ends") {
    Engine engine(doc, cfg);
    drive(engine, 0, 1200, kInside);
    auto ev = drive(engine, 1210, 6000, kOutside);
    const auto* fin = first(ev, EventKind::reaction_finished);
    REQUIRE(fin);
    CHECK(fin->t_ms >= 4000);
    CHECK(fin->t_ms < 4010);
  }
  SUBCASE("leave after the sound ended") {
    Engine engine(doc, cfg);
    drive(engine, 0, 5000, kInside);
    auto ev = drive(engine, 5010, 5100, kOutside);
    const auto* fin = first(ev, EventKind::reaction_finished);
    REQUIRE(fin);
    CHECK(fin->t_ms == 5010);
  }
}

TEST_CASE("automatic reaction starts without gaze") {
  auto doc = parse_ok(one_region(R"(automaticReactionAfterTime="500")"));
  Engine engine(doc, EngineConfig{});
  auto ev = drive(engine, 0, 700, std::nullopt);
  const auto* start = first(ev, EventKind::reaction_started);
  REQUIRE(start);
  CHECK(start->t_ms >= 500);
  CHECK(start->t_ms < 510);
  CHECK(first(ev, EventKind::region_activated));
}

TEST_CASE("blackout covers the scene while the region reacts") {
  auto doc = parse_ok(one_region(R"(ableToActivateBlackout="yes")", "", "",
                                 R"(blackoutDegree="128" blackoutColor="Black" blockingRegionsDuringBlackout="yes")",
                                 R"(<region name="other" shape="rectangle" locationOfCenterX="700" locationOfCenterY="500" sizeX="100" sizeY="100"/>)"));
  Engine engine(doc, EngineConfig{});
  auto ev = drive(engine, 0, 1000, kInside);
  REQUIRE(first(ev, EventKind::blackout_on));
  const auto& f = engine.current_frame();
  CHECK(f.blackout);
  CHECK(f.blackout_degree == 128);
  CHECK(f.blackout_color == to_hex(*parse_color("Black")));
  ev = drive(engine, 1010, 1500, Point{700, 500});
  CHECK(first(ev, EventKind::blackout_off));
}

TEST_CASE("spotlight follows the gaze") {
  auto doc = parse_ok(one_region("", "", "", R"(spotlight="yes" spotlightRadius="150")"));
  Engine engine(doc, EngineConfig{});
  drive(engine, 0, 0, Point{500, 400});
  const auto& f = engine.current_frame();
  CHECK(f.spotlight);
  CHECK(f.spotlight_radius == 150);
  REQUIRE(f.spotlight_center);
  CHECK(f.spotlight_center->x == 500);
  CHECK(f.spotlight_center->y == 400);
}

TEST_CASE("escape stops the engine") {
  auto doc = load_fixture("fig16_states_text.xml");
  Engine engine(doc, EngineConfig{});
  InputTick in{10, GazePoint{1, 1, true}, {"Escape"}};
  auto ev = engine.step(in);
  const auto* stop = first(ev, EventKind::engine_stopped);
  REQUIRE(stop);
  CHECK(stop->payload == "escape");
  CHECK(engine.stopped());
  CHECK(engine.step(InputTick{20, std::nullopt, {}}).empty());
}

TEST_CASE("time must increase between ticks") {
  auto doc = load_fixture("fig16_states_text.xml");
  Engine engine(doc, EngineConfig{});
  engine.step(InputTick{100, std::nullopt, {}});
  CHECK_THROWS_AS(engine.step(InputTick{100, std::nullopt, {}}), std::invalid_argument);
  CHECK_THROWS_AS(engine.step(InputTick{50, std::nullopt, {}}), std::invalid_argument);
}

TEST_CASE("same seed and input give identical events and frames") {
  auto doc = load_fixture("fig13_groups.xml");
  auto run = [&](std::uint64_t seed) {
    EngineConfig cfg;
    cfg.seed = seed;
    Engine engine(doc, cfg);
    std::string log;
    for (const auto& e : engine.initial_events()) log += protocol::event_json(e) + "\n";
    std::mt19937_64 gen(9);
    for (long long t = 0; t < 20000; t += 10) {
      InputTick in{t, GazePoint{std::uniform_real_distribution<double>(0, 1024)(gen) < 600 ? 300.0 : 800.0, 200, true}, {}};
      for (const auto& e : engine.step(in)) log += protocol::event_json(e) + "\n";
      log += protocol::frame_json(engine.current_frame()) + "\n";
    }
    return log;
  };
  CHECK(run(5) == run(5));
}

TEST_CASE("frames are stable without a step and frame_seq moves only on change") {
  auto doc = load_fixture("fig16_states_text.xml");
  Engine engine(doc, EngineConfig{});
  const auto a = protocol::frame_json(engine.current_frame());
  CHECK(a == protocol::frame_json(engine.current_frame()));
  const auto seq0 = engine.current_frame().frame_seq;
  drive(engine, 0, 100, kOutside);
  CHECK(engine.current_frame().frame_seq == seq0);
  drive(engine, 110, 110, Point{150, 100});
  CHECK(engine.current_frame().frame_seq > seq0);
}

TEST_CASE("hit testing of the three shapes") {
  CHECK(hit_test(Shape::rectangle, 300, 200, 200, 200, 300, 200));
  CHECK(hit_test(Shape::rectangle, 300, 200, 200, 200, 400, 200));
  CHECK_FALSE(hit_test(Shape::rectangle, 300, 200, 200, 200, 401, 200));
  CHECK(hit_test(Shape::ellipse, 0, 0, 200, 100, 99, 0));
  CHECK_FALSE(hit_test(Shape::ellipse, 0, 0, 200, 100, 0, 51));
  // Grid comparison against the defining inequalities.
  for (int x = -120; x <= 120; x += 3)
    for (int y = -120; y <= 120; y += 3) {
      const bool rect = std::abs(x) <= 100 && std::abs(y) <= 50;
      const bool ell = std::pow(2.0 * x / 200, 2) + std::pow(2.0 * y / 100, 2) <= 1;
      const bool circ = std::pow(2.0 * x / 100, 2) + std::pow(2.0 * y / 100, 2) <= 1;
      CHECK(hit_test(Shape::rectangle, 0, 0, 200, 100, x, y) == rect);
      CHECK(hit_test(Shape::ellipse, 0, 0, 200, 100, x, y) == ell);
      CHECK(hit_test(Shape::circle, 0, 0, 200, 100, x, y) == circ);
    }
}

TEST_CASE("animation transforms") {
  for (auto type : {AnimationType::size_changing, AnimationType::rotation_cw, AnimationType::rotation_ccw,
                    AnimationType::swinging_horizontal, AnimationType::swinging_vertical}) {
    auto t = animation_transform(type, 0.5, true, 1000, 0, 100, 100);
    CHECK(t == AnimationTransform{});
  }
  CHECK(animation_transform(AnimationType::size_changing, 0.5, true, 1000, 250, 100, 100).scale ==
        doctest::Approx(1.5));
  CHECK(animation_transform(AnimationType::rotation_cw, 0, false, 1000, 500, 100, 100).angle_deg ==
        doctest::Approx(180));
  CHECK(animation_transform(AnimationType::rotation_ccw, 0, false, 1000, 250, 100, 100).angle_deg ==
        doctest::Approx(-90));
  CHECK(animation_transform(AnimationType::swinging_horizontal, 20, false, 1000, 250, 100, 100).offset_x ==
        doctest::Approx(20));
}

TEST_CASE("move kinematics along a waypoint path") {
  const std::vector<MoveStep> path{{0, -400}, {500, 0}};
  CHECK(path_length(path) == doctest::Approx(900));
  auto [dx, dy] = move_offset(path, 200);
  CHECK(dx == doctest::Approx(0));
  CHECK(dy == doctest::Approx(-200));
  auto end = move_offset(path, 900);
  CHECK(end.first == doctest::Approx(500));
  CHECK(end.second == doctest::Approx(-400));

  auto doc = parse_ok(one_region(R"(conditionOfReactionCompletion="TimeElapsed" reactionDuration="100000")",
                                 R"(<reaction actionType="move" path="0,-400;500,0" speed="200"/>)"));
  Engine engine(doc, EngineConfig{});
  auto ev = drive(engine, 0, 1000, kInside);
  const auto* start = first(ev, EventKind::reaction_started);
  REQUIRE(start);
  ev = drive(engine, 1010, start->t_ms + 1000, kOutside);
  CHECK(engine.region("s", "r")->center_y == doctest::Approx(0.0));
  ev = drive(engine, start->t_ms + 1010, start->t_ms + 5000, kOutside);
  const auto* done = first(ev, EventKind::move_completed);
  REQUIRE(done);
  CHECK(done->t_ms >= start->t_ms + 4500);
  CHECK(done->t_ms < start->t_ms + 4510);
  CHECK(engine.region("s", "r")->center_x == doctest::Approx(800));
  CHECK(engine.region("s", "r")->center_y == doctest::Approx(-200));
}

TEST_CASE("stopping closes every open reaction") {
  auto doc = load_fixture("fig10_completion.xml");
  Engine engine(doc, EngineConfig{});
  auto ev = drive(engine, 0, 1500, kInside);
  REQUIRE(first(ev, EventKind::reaction_started));
  ev = engine.stop(1510, "end");
  const auto* fin = first(ev, EventKind::reaction_finished);
  REQUIRE(fin);
  CHECK(fin->payload == "stopped");
  CHECK(ev.back().kind == EventKind::engine_stopped);
}

TEST_CASE("randomized input never leaves the state diagram") {
  std::vector<std::string> docs{fuzz_document(), fixture_text("fig11_navigation.xml"), fixture_text("fig12_lists.xml"),
                                fixture_text("fig13_groups.xml"), fixture_text("fig10_completion.xml")};
  for (std::size_t d = 0; d < docs.size(); ++d)
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      INFO("doc " << d << " seed " << seed);
      auto report = fuzz_fsm(docs[d], seed, 10000);
      CHECK(report.ticks == 10000);
      CHECK(report.reactions > 0);
      for (const auto& v : report.violations) FAIL_CHECK(v);
    }
}
