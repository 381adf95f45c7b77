#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mfotl/core.hpp"

namespace mfotl {

struct GroundAtom {
  std::string relation;
  std::vector<Value> args;

  auto operator<=>(const GroundAtom&) const = default;
};

[[nodiscard]] std::string to_string(const GroundAtom& a);

struct Position {
  Time time = 0;
  std::vector<GroundAtom> atoms;  // sorted, unique

  friend bool operator==(const Position&, const Position&) = default;
};

struct TimedAtom {
  Time time = 0;
  GroundAtom atom;

  auto operator<=>(const TimedAtom&) const = default;
};

// Positions have strictly increasing, non-negative timestamps. Canonical
// traces additionally have no empty positions; the only empty position ever
// built is the implicit time-0 position added by anchored().
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::vector<Position> positions);

  // Groups atoms by time; duplicates collapse.
  static Trace from_atoms(std::vector<TimedAtom> atoms);

  [[nodiscard]] const std::vector<Position>& positions() const { return positions_; }
  [[nodiscard]] std::size_t length() const { return positions_.size(); }
  [[nodiscard]] bool empty() const { return positions_.empty(); }
  [[nodiscard]] std::vector<TimedAtom> atoms() const;
  [[nodiscard]] bool canonical() const;

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<Position> positions_;
};

[[nodiscard]] std::string to_string(const Trace& t);

// The trace as evaluated: position 0 is at time 0, prepending an empty
// position when the trace does not start there.
[[nodiscard]] Trace anchored(const Trace& t);

using Valuation = std::map<std::string, Value>;

[[nodiscard]] Value evaluate(const Term& t, const Valuation& val);

// Semantics of a (possibly sugared) formula at position `pos`.
[[nodiscard]] bool evaluate(const Trace& trace, const Formula& f, const Valuation& val, std::size_t pos);

// Closed formula on the anchored trace, at time 0.
[[nodiscard]] bool satisfies(const Trace& trace, const Formula& f);

[[nodiscard]] std::size_t volume(const Trace& t);

// Index of the first requirement the trace violates.
[[nodiscard]] std::optional<std::size_t> check_requirements(const Trace& trace, const std::vector<Formula>& reqs);

[[nodiscard]] bool satisfies_data(const GroundAtom& a, Time time, const std::vector<DataConstraint>& data);
[[nodiscard]] bool satisfies_data(const Trace& trace, const std::vector<DataConstraint>& data);

// Requirements, negated property and data constraints.
[[nodiscard]] bool is_counterexample(const Trace& trace, const Spec& spec);

}  // namespace mfotl
