#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mfotl/core.hpp"
#include "mfotl/smt.hpp"
#include "mfotl/trace.hpp"

namespace mfotl {

struct Sat {
  Trace trace;
  std::size_t volume = 0;
};
struct Unsat {};
struct BoundedUnsat {
  std::uint64_t bound = 0;
  std::uint64_t min_volume_lower_bound = 0;
};
using Verdict = std::variant<Sat, Unsat, BoundedUnsat>;

[[nodiscard]] std::string verdict_name(const Verdict& v);  // "sat", "unsat", "bounded-unsat"

enum class SearchMode { optimal, greedy };

// Solver gave up, or the iteration ceiling was hit. Never a verdict.
class InconclusiveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IterationReport {
  std::size_t iteration = 0;
  std::size_t domain_size = 0;
  std::size_t active_requirements = 0;
  std::optional<std::size_t> sigma_min;
  std::string event;  // "expand", "lesson <name>", "sat", "unsat", "bounded-unsat"
};

struct SearchOptions {
  SearchMode mode = SearchMode::optimal;
  std::size_t max_iterations = 10000;
  // Extra iterations spent trying to prove Unsat once the bound is exceeded;
  // 0 returns BoundedUnsat immediately.
  std::size_t prove_unsat_iterations = 200;
  smt::Options solver;
  std::function<void(const IterationReport&)> progress;
};

struct SearchStats {
  std::size_t iterations = 0;
  std::size_t queries = 0;
  std::vector<std::string> lessons;
  std::vector<std::size_t> domain_sizes;  // at the start of each iteration
  std::vector<std::size_t> sigma_min;     // every computed minimum, in order
  std::size_t objects = 0;
  std::chrono::milliseconds wall{0};
};

struct SearchResult {
  Verdict verdict;
  SearchStats stats;
};

[[nodiscard]] SearchResult check(const Spec& spec, Bound bound, const SearchOptions& options = {});

// Assuming `label` forces the 0/1 integer `cost` to 0.
struct SoftConstraint {
  std::string label;
  std::string cost;
};

struct Minimum {
  std::size_t cost = 0;
  qf::Model model;
};

// Minimum total cost over models of the solver's assertions plus the `hard`
// assumptions, or nothing when those are unsatisfiable. `lower_bound` must be
// a proven lower bound; `labels` numbers the cardinality labels it adds.
[[nodiscard]] std::optional<Minimum> minimize(smt::Solver& solver, const std::vector<SoftConstraint>& softs,
                                              const std::vector<std::string>& hard, std::size_t lower_bound,
                                              std::size_t& labels);

}  // namespace mfotl
