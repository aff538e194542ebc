#include "giml/values.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace giml {

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Rejection sampling keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

long long Rng::uniform_int(long long lo, long long hi) {
  if (hi <= lo) return lo;
  const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (span == 0) return static_cast<long long>(gen_());
  return lo + static_cast<long long>(below(span));
}

double Rng::uniform_real(double lo, double hi) {
  if (!(hi > lo)) return lo;
  const double unit = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  const double v = lo + (hi - lo) * unit;
  return v < hi ? v : lo;
}

const std::string& ListState::current_value() const {
  return decl->values[index.value_or(0)];
}

ListBank::ListBank(const GimlDocument& doc) {
  std::map<std::string, std::size_t> group_unit;
  for (const auto& l : doc.lists) {
    if (l.values.empty()) continue;
    const std::size_t si = states_.size();
    states_.push_back(ListState{&l, std::nullopt, false});
    by_name_.emplace(l.name, si);
    std::size_t ui;
    if (l.group) {
      auto it = group_unit.find(*l.group);
      if (it == group_unit.end()) {
        ui = units_.size();
        units_.push_back(Unit{});
        units_[ui].mode = l.drawing;
        units_[ui].length = l.values.size();
        group_unit.emplace(*l.group, ui);
      } else {
        ui = it->second;
        units_[ui].length = std::min(units_[ui].length, l.values.size());
      }
    } else {
      ui = units_.size();
      units_.push_back(Unit{});
      units_[ui].mode = l.drawing;
      units_[ui].length = l.values.size();
    }
    units_[ui].members.push_back(si);
    unit_of_.push_back(ui);
  }
  for (auto& u : units_) init_unit(u);
}

void ListBank::init_unit(Unit& u) {
  u.pool.resize(u.length);
  std::iota(u.pool.begin(), u.pool.end(), std::size_t{0});
  u.index.reset();
  u.exhausted = false;
  for (auto m : u.members) {
    states_[m].index.reset();
    states_[m].exhausted = false;
  }
}

void ListBank::reset() {
  for (auto& u : units_) init_unit(u);
}

std::vector<ListEvent> ListBank::switch_over(const std::vector<std::string>& names, Rng& rng) {
  std::vector<ListEvent> events;
  std::vector<bool> advanced(units_.size(), false);
  for (const auto& name : names) {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) continue;
    const std::size_t ui = unit_of_[it->second];
    if (advanced[ui]) continue;
    advanced[ui] = true;
    Unit& u = units_[ui];
    if (u.exhausted) continue;

    std::optional<std::size_t> next;
    switch (u.mode) {
      case DrawMode::draw_no_returns:
        if (!u.pool.empty()) {
          const auto k = static_cast<std::size_t>(rng.below(u.pool.size()));
          next = u.pool[k];
          u.pool.erase(u.pool.begin() + static_cast<std::ptrdiff_t>(k));
        }
        break;
      case DrawMode::sequentially: {
        const std::size_t n = u.index ? *u.index + 1 : 0;
        if (n < u.length) next = n;
        break;
      }
      case DrawMode::draw_with_returns:
        next = static_cast<std::size_t>(rng.below(u.length));
        break;
    }

    if (!next) {
      u.exhausted = true;
      for (auto m : u.members) {
        states_[m].exhausted = true;
        events.push_back({ListEvent::Kind::exhausted, states_[m].decl->name, states_[m].index.value_or(0),
                          states_[m].current_value()});
      }
      continue;
    }
    u.index = next;
    for (auto m : u.members) {
      states_[m].index = next;
      events.push_back({ListEvent::Kind::switched_over, states_[m].decl->name, *next, states_[m].current_value()});
    }
  }
  return events;
}

const ListState* ListBank::state(std::string_view name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : &states_[it->second];
}

std::optional<std::string> ListBank::current_value(std::string_view name) const {
  const auto* s = state(name);
  if (!s) return std::nullopt;
  return s->current_value();
}

bool ListBank::exhausted(std::string_view name) const {
  const auto* s = state(name);
  return s && s->exhausted;
}

ValueExpr freeze(const ValueExpr& e, ValueKind kind, Rng& rng) {
  if (auto c = std::get_if<expr::RandomChoice>(&e)) {
    if (c->alternatives.empty()) return expr::Literal{};
    return expr::Literal{c->alternatives[static_cast<std::size_t>(rng.below(c->alternatives.size()))]};
  }
  if (auto r = std::get_if<expr::RandomRange>(&e)) {
    if (kind == ValueKind::integer) {
      const auto lo = static_cast<long long>(std::ceil(r->lo));
      const auto hi = static_cast<long long>(std::floor(r->hi));
      return expr::Literal{std::to_string(rng.uniform_int(lo, std::max(lo, hi)))};
    }
    char buf[64];
    const double v = rng.uniform_real(r->lo, r->hi);
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return expr::Literal{std::string(buf, res.ptr)};
  }
  return e;
}

namespace {
Value from_text(std::string text) {
  Value v;
  v.number = parse_number(text);
  v.text = std::move(text);
  return v;
}
Value from_number(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return Value{std::string(buf, res.ptr), d};
}
}  // namespace

Value materialize(const ValueExpr& e, const MaterializeContext& ctx) {
  return std::visit(
      [&](const auto& v) -> Value {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, expr::Literal>) {
          return from_text(v.text);
        } else if constexpr (std::is_same_v<T, expr::RandomChoice>) {
          return from_text(v.alternatives.empty() ? std::string() : v.alternatives.front());
        } else if constexpr (std::is_same_v<T, expr::RandomRange>) {
          return from_number(v.lo);
        } else if constexpr (std::is_same_v<T, expr::ListRef>) {
          if (!ctx.lists) return Value{};
          auto cur = ctx.lists->current_value(v.list);
          return cur ? from_text(*cur) : Value{};
        } else {
          double extent = std::min(ctx.extent_x, ctx.extent_y);
          if (v.axis == Axis::x) extent = ctx.extent_x;
          if (v.axis == Axis::y) extent = ctx.extent_y;
          return from_number(v.fraction * extent);
        }
      },
      e);
}

}  // namespace giml
