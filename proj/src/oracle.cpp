#include "mfotl/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "mfotl/fol.hpp"
#include "mfotl/grounding.hpp"

namespace mfotl {

NbscResult nbsc(const Spec& spec, std::size_t n, const smt::Options& solver_opts) {
  GroundingSession session(spec.signature);
  std::vector<int> domain;
  for (const auto& r : spec.signature.relations())
    for (std::size_t i = 0; i < n; ++i) domain.push_back(session.make_object(r.name).id);

  fol::Translator tr(spec.signature);
  std::vector<fol::Formula> fs{fol::simplify(tr.translate(spec.property.formula, fol::LinTerm(0), false))};
  for (const auto& r : spec.requirements) fs.push_back(tr.translate_top(r.formula));

  Grounder g(session);
  for (int d : domain) g.add_domain_object(d);
  g.add_root(fs[0], spec.property.name);
  for (std::size_t i = 1; i < fs.size(); ++i) g.add_root(fs[i], spec.requirements[i - 1].name);

  NbscResult out;
  for (const auto& f : fs) out.depth = std::max(out.depth, fol::quantifier_depth(f));
  for (const auto& a : g.assertions()) out.atoms += qf::arithmetic_atoms(a.expr);

  GroundedQuery q{g.assertions(), g.domain(), g.new_objects()};
  for (int id : q.new_objects) q.assertions.push_back({no_new_r(session, id, q.domain), "NoNewR"});
  qf::LinExpr vol;
  std::vector<int> earlier;
  for (int id : q.domain) {
    q.assertions.push_back({volume_indicator(session, id, earlier), "volume"});
    vol += qf::LinExpr::var(volume_var(session.object(id)));
    earlier.push_back(id);
  }
  q.assertions.push_back({qf::le(vol, static_cast<Value>(n)), "volume"});
  out.objects = q.objects().size();

  smt::Solver solver(solver_opts);
  smt::SolveResult r = smt::solve(solver, session, q, spec.data);
  if (auto* u = std::get_if<smt::Unknown>(&r)) throw InconclusiveError("solver returned unknown: " + u->reason);
  if (auto* sat = std::get_if<smt::Sat>(&r)) {
    Trace t = smt::decode_trace(sat->model, session, q.objects());
    if (!is_counterexample(t, spec)) throw std::logic_error("nbsc model is not a counterexample: " + to_string(t));
    std::size_t v = volume(t);
    out.verdict = Sat{std::move(t), v};
  } else {
    out.verdict = Unsat{};
  }
  return out;
}

BudgetError::BudgetError(double estimate, double limit)
    : std::runtime_error("enumeration budget too large: about " + std::to_string(static_cast<long long>(estimate)) +
                         " traces, limit " + std::to_string(static_cast<long long>(limit))),
      estimate_(estimate) {}

std::vector<TimedAtom> atom_universe(const Spec& spec, const EnumerationBudget& b) {
  if (b.value_lo > b.value_hi || b.time_lo > b.time_hi || b.time_lo < 0)
    throw std::invalid_argument("empty or negative enumeration range");
  std::vector<TimedAtom> out;
  for (const auto& r : spec.signature.relations()) {
    std::vector<Value> args(r.arity, b.value_lo);
    for (;;) {
      for (Time t = b.time_lo; t <= b.time_hi; ++t) {
        GroundAtom a{r.name, args};
        if (satisfies_data(a, t, spec.data)) out.push_back({t, a});
      }
      std::size_t k = 0;
      while (k < args.size() && args[k] == b.value_hi) args[k++] = b.value_lo;
      if (k == args.size()) break;
      ++args[k];
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  double r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Advances a strictly increasing index vector whose first entry is fixed.
bool next_tail(std::vector<std::size_t>& c, std::size_t n) {
  std::size_t k = c.size();
  for (std::size_t i = k; i-- > 1;) {
    if (c[i] < n - (k - i)) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

double enumeration_estimate(const Spec& spec, const EnumerationBudget& b) {
  std::size_t u = atom_universe(spec, b).size();
  double total = 0;
  for (std::size_t v = 0; v <= b.max_volume; ++v) total += binomial(u, v);
  return total;
}

EnumerationResult enumerate_check(const Spec& spec, const EnumerationBudget& budget, unsigned threads, double limit) {
  const std::vector<TimedAtom> universe = atom_universe(spec, budget);
  double estimate = 0;
  for (std::size_t v = 0; v <= budget.max_volume; ++v) estimate += binomial(universe.size(), v);
  if (estimate > limit) throw BudgetError(estimate, limit);

  auto build = [&](const std::vector<std::size_t>& c) {
    std::vector<TimedAtom> atoms;
    for (std::size_t i : c) atoms.push_back(universe[i]);
    return Trace::from_atoms(std::move(atoms));
  };

  EnumerationResult out;
  if (is_counterexample(Trace{}, spec)) {
    out.witness = Trace{};
    out.checked = 1;
    return out;
  }
  std::atomic<std::size_t> checked{1};
  const std::size_t n = universe.size();
  for (std::size_t v = 1; v <= budget.max_volume && v <= n; ++v) {
    std::atomic<std::size_t> next_first{0};
    std::atomic<std::size_t> best_first{std::numeric_limits<std::size_t>::max()};
    std::mutex mu;
    std::vector<std::size_t> best;

    auto worker = [&] {
      for (;;) {
        std::size_t first = next_first.fetch_add(1);
        if (first + v > n || first > best_first.load()) return;
        std::vector<std::size_t> c(v);
        for (std::size_t i = 0; i < v; ++i) c[i] = first + i;
        do {
          checked.fetch_add(1, std::memory_order_relaxed);
          if (is_counterexample(build(c), spec)) {
            std::lock_guard<std::mutex> lock(mu);
            if (first < best_first.load()) {
              best_first = first;
              best = c;
            }
            break;
          }
        } while (next_tail(c, n));
      }
    };

    unsigned t = std::max(1u, threads);
    if (t == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (unsigned i = 0; i < t; ++i) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (!best.empty()) {
      out.witness = build(best);
      break;
    }
  }
  out.checked = checked.load();
  return out;
}

}  // namespace mfotl
