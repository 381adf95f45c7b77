#include "mfotl/search.hpp"

#include <map>
#include <set>

#include "mfotl/fol.hpp"
#include "mfotl/grounding.hpp"

namespace mfotl {

std::string verdict_name(const Verdict& v) {
  if (std::holds_alternative<Sat>(v)) return "sat";
  if (std::holds_alternative<Unsat>(v)) return "unsat";
  return "bounded-unsat";
}

namespace {

using Soft = SoftConstraint;

using AtomKey = std::pair<std::string, std::vector<Value>>;

class Search {
 public:
  Search(const Spec& spec, Bound bound, const SearchOptions& o)
      : spec_(spec), bound_(bound), opts_(o), session_(spec.signature), g_(session_), solver_(o.solver) {}

  SearchResult run();

 private:
  void sync();
  void ensure_pool(std::size_t k);
  qf::Expr covered(const GroundObject& o) const;
  std::vector<std::string> volume_at_most(std::size_t k);
  std::size_t distinct_volume(const qf::Model& m) const;
  smt::SolveResult query(const std::vector<std::string>& assumptions);
  std::pair<std::size_t, qf::Model> sigma_min();
  std::vector<Soft> new_object_softs();
  std::optional<Verdict> examine(const qf::Model& m, std::optional<std::size_t> expected_volume);
  void expand(const qf::Model& m);
  AtomKey atom_of(const GroundObject& o, const qf::Model& m) const;
  void report(std::string event);
  SearchResult finish(Verdict v);
  Verdict bounded() const { return BoundedUnsat{*bound_, lower_bound_}; }

  const Spec& spec_;
  Bound bound_;
  const SearchOptions& opts_;
  GroundingSession session_;
  Grounder g_;
  smt::Solver solver_;

  std::vector<fol::Formula> reqs_f_;
  std::vector<bool> active_;
  std::size_t cursor_ = 0;
  std::vector<int> known_;
  std::map<std::string, Soft> nnr_;
  std::size_t labels_ = 0;  // cardinality labels issued by minimize

  // Volume is bounded through per-class pools of slot atoms: every present
  // object equals a used slot of its class, and used slots are counted.
  struct Slot {
    std::string used, time;
    std::vector<std::string> args;
  };
  std::map<std::string, std::vector<Slot>> slots_;
  std::size_t pool_ = 0;
  std::string pool_label_;
  std::map<std::pair<std::size_t, std::size_t>, std::string> at_most_;  // (k, pool size)

  std::size_t iteration_ = 0;
  std::optional<std::size_t> last_sigma_;
  bool exceeded_ = false;
  std::size_t extra_left_ = 0;
  std::uint64_t lower_bound_ = 0;
  SearchStats stats_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void Search::sync() {
  for (int id : g_.created()) {
    if (!known_.empty() && id <= known_.back()) continue;
    const GroundObject& o = session_.object(id);
    solver_.add(object_axioms(o, spec_.data));
    if (pool_ > 0) solver_.add(qf::implies(qf::var(pool_label_), covered(o)));
    known_.push_back(id);
  }
  const auto& as = g_.assertions();
  for (; cursor_ < as.size(); ++cursor_) solver_.add(as[cursor_].expr);
}

void Search::ensure_pool(std::size_t k) {
  if (k <= pool_ && pool_ > 0) return;
  std::size_t size = std::max<std::size_t>({k, 2 * pool_, 4});
  for (const auto& r : spec_.signature.relations()) {
    auto& pool = slots_[r.name];
    while (pool.size() < size) {
      std::string base = "slot#" + r.name + "#" + std::to_string(pool.size() + 1);
      Slot s{base + ".used", base + ".time", {}};
      for (std::size_t a = 1; a <= r.arity; ++a) s.args.push_back(base + ".arg" + std::to_string(a));
      qf::LinExpr u = qf::LinExpr::var(s.used);
      std::vector<qf::Expr> cs{qf::ge(u, 0), qf::le(u, 1)};
      if (!pool.empty()) cs.push_back(qf::le(u, qf::LinExpr::var(pool.back().used)));
      solver_.add(qf::all_of(std::move(cs)));
      pool.push_back(std::move(s));
    }
  }
  pool_ = size;
  pool_label_ = "pool#" + std::to_string(pool_);
  for (int id : known_) solver_.add(qf::implies(qf::var(pool_label_), covered(session_.object(id))));
}

qf::Expr Search::covered(const GroundObject& o) const {
  std::vector<qf::Expr> alts;
  const auto& pool = slots_.at(o.cls);
  for (std::size_t i = 0; i < pool_; ++i) {
    const Slot& s = pool[i];
    std::vector<qf::Expr> eq{qf::eq(qf::LinExpr::var(s.used), 1),
                             qf::eq(qf::LinExpr::var(o.time()), qf::LinExpr::var(s.time))};
    for (std::size_t a = 0; a < o.arity; ++a) eq.push_back(qf::eq(qf::LinExpr::var(o.arg(a)), qf::LinExpr::var(s.args[a])));
    alts.push_back(qf::all_of(std::move(eq)));
  }
  return qf::implies(qf::var(o.presence()), qf::any_of(std::move(alts)));
}

// Assumptions restricting the query to traces of volume at most k.
std::vector<std::string> Search::volume_at_most(std::size_t k) {
  ensure_pool(k);
  auto it = at_most_.find({k, pool_});
  if (it == at_most_.end()) {
    std::string label = "atmost#" + std::to_string(k) + "@" + std::to_string(pool_);
    qf::LinExpr sum;
    for (const auto& [cls, pool] : slots_)
      for (std::size_t i = 0; i < pool_; ++i) sum += qf::LinExpr::var(pool[i].used);
    solver_.add(qf::implies(qf::var(label), qf::le(sum, static_cast<Value>(k))));
    it = at_most_.emplace(std::make_pair(k, pool_), label).first;
  }
  return {pool_label_, it->second};
}

std::size_t Search::distinct_volume(const qf::Model& m) const {
  std::set<AtomKey> atoms;
  for (int id : known_) {
    const GroundObject& o = session_.object(id);
    if (m.bool_value(o.presence())) atoms.insert(atom_of(o, m));
  }
  return atoms.size();
}

smt::SolveResult Search::query(const std::vector<std::string>& assumptions) {
  smt::SolveResult r = solver_.check(assumptions);
  if (auto* u = std::get_if<smt::Unknown>(&r)) throw InconclusiveError("solver returned unknown: " + u->reason);
  return r;
}

// Linear search upwards from the previous minimum, which stays a lower bound
// because the over-approximation only ever gains constraints.
std::pair<std::size_t, qf::Model> Search::sigma_min() {
  for (std::size_t k = last_sigma_.value_or(0);; ++k) {
    if (k > known_.size()) throw std::logic_error("no volume bound admits the satisfiable over-approximation");
    smt::SolveResult r = query(volume_at_most(k));
    auto* sat = std::get_if<smt::Sat>(&r);
    if (!sat) continue;
    std::size_t v = distinct_volume(sat->model);
    if (v != k)
      throw std::logic_error("sigma_min dropped to " + std::to_string(v) + " below the proven bound " +
                             std::to_string(k));
    last_sigma_ = k;
    stats_.sigma_min.push_back(k);
    return {k, std::move(sat->model)};
  }
}

// NoNewR for every new object against the current domain, behind labels.
std::vector<Soft> Search::new_object_softs() {
  std::vector<Soft> out;
  const std::string d = std::to_string(g_.domain().size());
  for (int id : g_.new_objects()) {
    const GroundObject& o = session_.object(id);
    std::string key = o.name + "@" + d;
    auto it = nnr_.find(key);
    if (it == nnr_.end()) {
      Soft s{"nnr#" + key, "miss#" + key};
      qf::LinExpr miss = qf::LinExpr::var(s.cost);
      solver_.add(qf::all_of({qf::ge(miss, 0), qf::le(miss, 1),
                              qf::implies(qf::eq(miss, 0), no_new_r(session_, id, g_.domain())),
                              qf::implies(qf::var(s.label), qf::eq(miss, 0))}));
      it = nnr_.emplace(key, s).first;
    }
    out.push_back(it->second);
  }
  return out;
}

AtomKey Search::atom_of(const GroundObject& o, const qf::Model& m) const {
  std::vector<Value> v{m.int_value(o.time())};
  for (std::size_t k = 0; k < o.arity; ++k) v.push_back(m.int_value(o.arg(k)));
  return {o.cls, v};
}

std::optional<Verdict> Search::examine(const qf::Model& m, std::optional<std::size_t> expected_volume) {
  Trace t = smt::decode_trace(m, session_, g_.objects());
  std::vector<Formula> reqs;
  for (const auto& r : spec_.requirements) reqs.push_back(r.formula);
  if (auto bad = check_requirements(t, reqs)) {
    if (active_[*bad])
      throw std::logic_error("under-approximation model violates active requirement " +
                             spec_.requirements[*bad].name);
    active_[*bad] = true;
    g_.add_root(reqs_f_[*bad], spec_.requirements[*bad].name);
    stats_.lessons.push_back(spec_.requirements[*bad].name);
    if (stats_.lessons.size() > spec_.requirements.size()) throw std::logic_error("more lessons than requirements");
    report("lesson " + spec_.requirements[*bad].name);
    return std::nullopt;
  }
  if (!is_counterexample(t, spec_)) throw std::logic_error("soundness check failed for trace " + to_string(t));
  std::size_t v = volume(t);
  if (expected_volume && v != *expected_volume)
    throw std::logic_error("trace volume " + std::to_string(v) + " differs from sigma_min " +
                           std::to_string(*expected_volume));
  return Sat{std::move(t), v};
}

// Promotes one present new object per atom not already denoted by a present
// domain object.
void Search::expand(const qf::Model& m) {
  std::set<AtomKey> seen;
  for (int id : g_.domain()) {
    const GroundObject& o = session_.object(id);
    if (m.bool_value(o.presence())) seen.insert(atom_of(o, m));
  }
  std::vector<int> promote;
  for (int id : g_.new_objects()) {
    const GroundObject& o = session_.object(id);
    if (m.bool_value(o.presence()) && seen.insert(atom_of(o, m)).second) promote.push_back(id);
  }
  if (promote.empty()) throw std::logic_error("domain expansion found no object to promote");
  for (int id : promote) g_.add_domain_object(id);
  report("expand");
}

void Search::report(std::string event) {
  if (!opts_.progress) return;
  IterationReport r;
  r.iteration = iteration_;
  r.domain_size = g_.domain().size();
  r.active_requirements = static_cast<std::size_t>(std::count(active_.begin(), active_.end(), true));
  r.sigma_min = last_sigma_;
  r.event = std::move(event);
  opts_.progress(r);
}

SearchResult Search::finish(Verdict v) {
  report(verdict_name(v));
  stats_.iterations = iteration_;
  stats_.queries = solver_.queries();
  stats_.objects = session_.object_count();
  stats_.wall = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start_);
  return {std::move(v), std::move(stats_)};
}

SearchResult Search::run() {
  fol::Translator tr(spec_.signature);
  fol::Formula phi_f = fol::simplify(tr.translate(spec_.property.formula, fol::LinTerm(0), false));
  for (const auto& r : spec_.requirements) reqs_f_.push_back(tr.translate_top(r.formula));
  active_.assign(reqs_f_.size(), false);
  g_.add_root(phi_f, spec_.property.name);

  const bool optimal = opts_.mode == SearchMode::optimal;
  for (;;) {
    if (++iteration_ > opts_.max_iterations)
      throw InconclusiveError("iteration limit " + std::to_string(opts_.max_iterations) + " reached");
    stats_.domain_sizes.push_back(g_.domain().size());
    sync();
    if (std::holds_alternative<smt::Unsat>(query({}))) return finish(Unsat{});

    std::vector<std::string> extra;
    std::optional<std::size_t> sigma;
    qf::Model min_model;
    bool over_bound = false;
    if (optimal) {
      auto [s, m] = sigma_min();
      sigma = s;
      min_model = std::move(m);
      over_bound = bound_ && s > *bound_;
    } else if (bound_ && !exceeded_) {
      std::vector<std::string> cb = volume_at_most(*bound_);
      if (std::holds_alternative<smt::Unsat>(query(cb)))
        over_bound = true;
      else
        extra = cb;
    }
    if (over_bound && !exceeded_) {
      lower_bound_ = optimal ? *sigma : sigma_min().first;
      if (opts_.prove_unsat_iterations == 0) return finish(bounded());
      exceeded_ = true;
      extra_left_ = opts_.prove_unsat_iterations;
    }
    if (exceeded_) {
      if (optimal) lower_bound_ = std::max<std::uint64_t>(lower_bound_, *sigma);
      if (extra_left_ == 0) return finish(bounded());
      --extra_left_;
    }

    std::vector<Soft> softs = new_object_softs();
    if (optimal) {
      std::vector<std::string> as = volume_at_most(*sigma);
      for (const auto& s : softs) as.push_back(s.label);
      smt::SolveResult r = query(as);
      if (auto* sat = std::get_if<smt::Sat>(&r)) {
        auto v = examine(sat->model, sigma);
        if (!v) continue;
        if (exceeded_) {
          lower_bound_ = std::get<Sat>(*v).volume;
          return finish(bounded());
        }
        return finish(std::move(*v));
      }
      expand(min_model);
    } else {
      auto r = minimize(solver_, softs, extra, 0, labels_);
      if (!r) throw std::logic_error("greedy minimization failed on a satisfiable query");
      if (r->cost == 0) {
        auto v = examine(r->model, std::nullopt);
        if (!v) continue;
        if (exceeded_) return finish(bounded());
        return finish(std::move(*v));
      }
      expand(r->model);
    }
  }
}

}  // namespace

// Core-guided linear search from a known lower bound. Softs named in a core
// are relaxed into a cardinality constraint; the bound only rises when a
// core needs nothing but that constraint, so every bound is a proven lower
// bound and the first model is optimal.
std::optional<Minimum> minimize(smt::Solver& solver, const std::vector<SoftConstraint>& softs,
                                const std::vector<std::string>& hard, std::size_t lower_bound,
                                std::size_t& labels) {
  auto ask = [&](const std::vector<std::string>& as) {
    smt::SolveResult r = solver.check(as);
    if (auto* u = std::get_if<smt::Unknown>(&r)) throw InconclusiveError("solver returned unknown: " + u->reason);
    return r;
  };
  std::set<std::string> relaxed;
  std::size_t lambda = lower_bound;
  for (;;) {
    std::vector<std::string> as = hard;
    qf::LinExpr sum;
    for (const auto& s : softs) {
      if (relaxed.count(s.label))
        sum += qf::LinExpr::var(s.cost);
      else
        as.push_back(s.label);
    }
    std::string cl;
    if (!relaxed.empty()) {
      cl = "card#" + std::to_string(++labels);
      solver.add(qf::implies(qf::var(cl), qf::le(sum, static_cast<Value>(lambda))));
      as.push_back(cl);
    }
    smt::SolveResult r = ask(as);
    if (auto* sat = std::get_if<smt::Sat>(&r)) {
      std::size_t cost = 0;
      for (const auto& s : softs) cost += static_cast<std::size_t>(sat->model.int_value(s.cost));
      return Minimum{cost, std::move(sat->model)};
    }
    std::set<std::string> core(std::get<smt::Unsat>(r).core.begin(), std::get<smt::Unsat>(r).core.end());
    bool grew = false;
    for (const auto& s : softs)
      if (!relaxed.count(s.label) && core.count(s.label)) grew = relaxed.insert(s.label).second || grew;
    if (grew) continue;
    if (cl.empty() || !core.count(cl) || lambda >= softs.size()) return std::nullopt;
    ++lambda;
  }
}

SearchResult check(const Spec& spec, Bound bound, const SearchOptions& options) {
  Search s(spec, bound, options);
  return s.run();
}

}  // namespace mfotl
