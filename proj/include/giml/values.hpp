#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "giml/document.hpp"
#include "giml/expr.hpp"

namespace giml {

/// mt19937_64 with hand-written range reductions, so a seed yields the same
/// draws with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next() { return gen_(); }
  /// Uniform in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  long long uniform_int(long long lo, long long hi);
  /// Uniform real in [lo, hi).
  double uniform_real(double lo, double hi);

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

struct ListEvent {
  enum class Kind : std::uint8_t { switched_over, exhausted };
  Kind kind = Kind::switched_over;
  std::string list;
  std::size_t index = 0;
  std::string value;
  bool operator==(const ListEvent&) const = default;
};

struct ListState {
  const ListDecl* decl = nullptr;
  std::optional<std::size_t> index;  // empty until the first switch-over
  bool exhausted = false;

  /// The list's current element; before any switch-over this is the first value.
  const std::string& current_value() const;
};

/// All lists of a document with their drawing state. Grouped lists share one
/// cursor driven by the first-declared member's drawing mode.
class ListBank {
 public:
  ListBank() = default;
  explicit ListBank(const GimlDocument& doc);

  /// Advances the named lists. A group advances once however many of its
  /// members are named. Unknown names are ignored.
  std::vector<ListEvent> switch_over(const std::vector<std::string>& names, Rng& rng);

  const ListState* state(std::string_view name) const;
  std::optional<std::string> current_value(std::string_view name) const;
  bool exhausted(std::string_view name) const;

  /// Restore the never-drawn state of every list.
  void reset();

 private:
  struct Unit {
    std::vector<std::size_t> members;  // indices into states_
    DrawMode mode = DrawMode::draw_no_returns;
    std::size_t length = 0;
    std::vector<std::size_t> pool;  // unused indices for draw_no_returns
    std::optional<std::size_t> index;
    bool exhausted = false;
  };
  void init_unit(Unit& u);

  std::vector<ListState> states_;
  std::vector<Unit> units_;
  std::map<std::string, std::size_t, std::less<>> by_name_;  // list -> state
  std::vector<std::size_t> unit_of_;                          // state -> unit
};

struct MaterializeContext {
  double extent_x = 0;
  double extent_y = 0;
  const ListBank* lists = nullptr;
};

/// A concrete attribute value.
struct Value {
  std::string text;
  std::optional<double> number;
  bool operator==(const Value&) const = default;
};

/// Replaces random variants by one draw; other variants are returned as they are.
/// Integer-kind ranges draw inclusive integers, real-kind ranges draw in [lo, hi).
ValueExpr freeze(const ValueExpr& e, ValueKind kind, Rng& rng);

/// Evaluates a (frozen) expression. Percent values resolve against the extent of
/// their axis, scalar percents against the smaller extent. A random variant that
/// was not frozen is evaluated with its first alternative or lower bound.
Value materialize(const ValueExpr& e, const MaterializeContext& ctx);

}  // namespace giml
