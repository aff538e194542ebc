#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "giml/document.hpp"
#include "giml/engine.hpp"
#include "giml/gaze_io.hpp"

namespace giml::test {

std::filesystem::path fixture_dir();
std::string read_text(const std::filesystem::path& path);
std::string fixture_text(const std::string& name);
GimlDocument load_fixture(const std::string& name);
GimlDocument parse_ok(const std::string& text);

/// File names of the figure fixtures.
const std::vector<std::string>& corpus();

struct Point {
  double x;
  double y;
};

/// Samples every `step_ms` in [from, to) at one point.
void hold(std::vector<GazeSample>& out, long long from, long long to, Point p, long long step_ms = 10);

/// Feeds the engine one tick per `tick_ms` from `from` to `to` inclusive with a
/// fixed gaze; returns the events produced.
std::vector<EngineEvent> drive(Engine& engine, long long from, long long to, std::optional<Point> gaze,
                               long long tick_ms = 10);

std::vector<EngineEvent> only(const std::vector<EngineEvent>& events, EventKind kind);
const EngineEvent* first(const std::vector<EngineEvent>& events, EventKind kind, const std::string& region = {});

/// Exhaustive I-DT oracle: scans every start index, grows the smallest window
/// reaching the minimum duration, then extends it while it stays in the
/// dispersion threshold. Quadratic, written for clarity.
std::vector<Fixation> brute_force_fixations(const std::vector<GazeSample>& samples, double threshold,
                                            long long min_duration);

}  // namespace giml::test

namespace giml::test {

/// A single-edit corruption of a clean fixture and the one error it must cause.
struct Mutation {
  std::string fixture;
  std::string from;
  std::string to;
  std::string code;
};
const std::vector<Mutation>& dangling_mutations();
/// Replaces the first occurrence; throws when `from` is absent.
std::string apply(const Mutation& m);

/// Upper-cases element and attribute names, leaving values and text alone.
std::string upper_case_names(const std::string& xml);

/// Every text attribute value of regions and their states, in document order.
std::vector<std::string> text_values(const GimlDocument& doc);
/// Raw `text="..."` values found in the markup, in order.
std::vector<std::string> raw_text_attributes(const std::string& xml);

}  // namespace giml::test

namespace giml::test {

/// Synthetic document exercising blackout, sounds, keys, moves, resets,
/// held transitions, automatic reactions and a pause scene.
std::string fuzz_document();

struct FuzzReport {
  long long ticks = 0;
  std::size_t reactions = 0;
  std::vector<std::string> violations;
};

/// Drives an engine with random gaze, validity and key input. Every event is
/// replayed through a reference reducer of the region state diagram; after
/// each tick the reducer must agree with the engine's snapshot, dwell must be
/// non-negative, and at the end every ReactionStarted must be closed.
FuzzReport fuzz_fsm(const std::string& doc_text, std::uint64_t seed, int ticks);

}  // namespace giml::test

namespace giml::test {

/// Fixation-like clusters with jitter, outliers, jumps and occasional
/// invalid samples; timestamps strictly increase.
std::vector<GazeSample> random_trace(std::mt19937_64& gen, std::size_t n);

}  // namespace giml::test
