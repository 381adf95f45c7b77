#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfotl/core.hpp"
#include "mfotl/search.hpp"
#include "mfotl/smt.hpp"
#include "mfotl/trace.hpp"

namespace mfotl {

struct NbscResult {
  Verdict verdict;        // Sat or Unsat (within n objects per class, volume <= n)
  int depth = 0;          // maximal quantifier nesting of the translated formulas
  std::size_t atoms = 0;  // arithmetic atoms in the grounded formulas
  std::size_t objects = 0;
};

// Naive bounded check: n symbolic objects per relation, every universal
// expanded over all of them, existential witnesses forced onto them.
[[nodiscard]] NbscResult nbsc(const Spec& spec, std::size_t n, const smt::Options& solver = {});

struct EnumerationBudget {
  std::size_t max_volume = 3;
  Value value_lo = 0;
  Value value_hi = 2;
  Time time_lo = 0;
  Time time_hi = 6;
};

class BudgetError : public std::runtime_error {
 public:
  BudgetError(double estimate, double limit);
  [[nodiscard]] double estimate() const { return estimate_; }

 private:
  double estimate_;
};

struct EnumerationResult {
  std::optional<Trace> witness;  // minimal volume, lexicographically first; none = Unsat within budget
  std::size_t checked = 0;
};

// Every atom the budget allows that satisfies the data constraints, sorted.
[[nodiscard]] std::vector<TimedAtom> atom_universe(const Spec& spec, const EnumerationBudget& budget);
[[nodiscard]] double enumeration_estimate(const Spec& spec, const EnumerationBudget& budget);

[[nodiscard]] EnumerationResult enumerate_check(const Spec& spec, const EnumerationBudget& budget,
                                                unsigned threads = 1, double limit = 1e7);

}  // namespace mfotl
