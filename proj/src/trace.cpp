#include <algorithm>
#include <stdexcept>

#include "mfotl/json_io.hpp"
#include "mfotl/trace.hpp"

namespace mfotl {

std::string to_string(const GroundAtom& a) {
  std::string s = a.relation + "(";
  for (std::size_t i = 0; i < a.args.size(); ++i) s += (i ? "," : "") + std::to_string(a.args[i]);
  return s + ")";
}

Trace::Trace(std::vector<Position> positions) : positions_(std::move(positions)) {
  for (std::size_t i = 0; i < positions_.size(); ++i) {
    auto& p = positions_[i];
    if (p.time < 0) throw std::invalid_argument("trace timestamps must be >= 0");
    if (i > 0 && p.time <= positions_[i - 1].time)
      throw std::invalid_argument("trace timestamps must be strictly increasing");
    std::sort(p.atoms.begin(), p.atoms.end());
    p.atoms.erase(std::unique(p.atoms.begin(), p.atoms.end()), p.atoms.end());
  }
}

Trace Trace::from_atoms(std::vector<TimedAtom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  std::vector<Position> ps;
  for (auto& a : atoms) {
    if (ps.empty() || ps.back().time != a.time) ps.push_back({a.time, {}});
    ps.back().atoms.push_back(std::move(a.atom));
  }
  return Trace(std::move(ps));
}

std::vector<TimedAtom> Trace::atoms() const {
  std::vector<TimedAtom> out;
  for (const auto& p : positions_)
    for (const auto& a : p.atoms) out.push_back({p.time, a});
  return out;
}

bool Trace::canonical() const {
  return std::all_of(positions_.begin(), positions_.end(), [](const Position& p) { return !p.atoms.empty(); });
}

std::string to_string(const Trace& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.positions().size(); ++i) {
    const auto& p = t.positions()[i];
    s += (i ? ", " : "") + std::string("(") + std::to_string(p.time) + ", {";
    for (std::size_t j = 0; j < p.atoms.size(); ++j) s += (j ? ", " : "") + to_string(p.atoms[j]);
    s += "})";
  }
  return s + "]";
}

Trace anchored(const Trace& t) {
  if (!t.empty() && t.positions().front().time == 0) return t;
  std::vector<Position> ps{{0, {}}};
  ps.insert(ps.end(), t.positions().begin(), t.positions().end());
  return Trace(std::move(ps));
}

Value evaluate(const Term& t, const Valuation& val) {
  switch (t.kind()) {
    case Term::Kind::constant:
      return t.value();
    case Term::Kind::variable: {
      auto it = val.find(t.name());
      if (it == val.end()) throw std::invalid_argument("unbound variable " + t.name());
      return it->second;
    }
    case Term::Kind::sum:
      return evaluate(t.lhs(), val) + evaluate(t.rhs(), val);
    case Term::Kind::scale:
      return t.value() * evaluate(t.lhs(), val);
  }
  return 0;
}

namespace {

using K = Formula::Kind;

struct Evaluator {
  const Trace& trace;

  Time time(std::size_t i) const { return trace.positions()[i].time; }

  bool until(const Formula& f, const Formula& g, const Interval& iv, Valuation& val, std::size_t i) {
    for (std::size_t j = i; j < trace.length(); ++j) {
      Time d = time(j) - time(i);
      if (iv.hi() && d > *iv.hi()) return false;
      if (iv.contains(d) && eval(g, val, j)) return true;
      if (!eval(f, val, j)) return false;
    }
    return false;
  }

  bool since(const Formula& f, const Formula& g, const Interval& iv, Valuation& val, std::size_t i) {
    for (std::size_t j = i + 1; j-- > 0;) {
      Time d = time(i) - time(j);
      if (iv.hi() && d > *iv.hi()) return false;
      if (iv.contains(d) && eval(g, val, j)) return true;
      if (!eval(f, val, j)) return false;
    }
    return false;
  }

  bool exists(const Formula& f, Valuation& val, std::size_t i) {
    const Formula& g = f.guard();
    const auto& vars = f.variables();
    std::vector<std::size_t> at(vars.size());
    for (std::size_t v = 0; v < vars.size(); ++v) at[v] = *binding_position(g, vars[v]);

    std::vector<std::optional<Value>> saved;
    for (const auto& v : vars) {
      auto it = val.find(v);
      saved.push_back(it == val.end() ? std::nullopt : std::optional<Value>(it->second));
    }
    bool result = false;
    for (const auto& a : trace.positions()[i].atoms) {
      if (a.relation != g.relation() || a.args.size() != g.terms().size()) continue;
      for (std::size_t v = 0; v < vars.size(); ++v) val[vars[v]] = a.args[at[v]];
      bool match = true;
      for (std::size_t k = 0; k < a.args.size() && match; ++k) match = evaluate(g.terms()[k], val) == a.args[k];
      if (match && eval(f.body(), val, i)) {
        result = true;
        break;
      }
    }
    for (std::size_t v = 0; v < vars.size(); ++v) {
      if (saved[v])
        val[vars[v]] = *saved[v];
      else
        val.erase(vars[v]);
    }
    return result;
  }

  bool eval(const Formula& f, Valuation& val, std::size_t i) {
    switch (f.kind()) {
      case K::truth:
        return true;
      case K::falsity:
        return false;
      case K::equal:
        return evaluate(f.terms()[0], val) == evaluate(f.terms()[1], val);
      case K::greater:
        return evaluate(f.terms()[0], val) > evaluate(f.terms()[1], val);
      case K::atom: {
        GroundAtom a{f.relation(), {}};
        for (const auto& t : f.terms()) a.args.push_back(evaluate(t, val));
        const auto& atoms = trace.positions()[i].atoms;
        return std::binary_search(atoms.begin(), atoms.end(), a);
      }
      case K::negation:
        return !eval(f.child(), val, i);
      case K::conjunction:
        return eval(f.child(0), val, i) && eval(f.child(1), val, i);
      case K::disjunction:
        return eval(f.child(0), val, i) || eval(f.child(1), val, i);
      case K::implication:
        return !eval(f.child(0), val, i) || eval(f.child(1), val, i);
      case K::exists:
        return exists(f, val, i);
      case K::until:
        return until(f.child(0), f.child(1), f.interval(), val, i);
      case K::since:
        return since(f.child(0), f.child(1), f.interval(), val, i);
      case K::eventually:
        return until(truth(), f.child(), f.interval(), val, i);
      case K::once:
        return since(truth(), f.child(), f.interval(), val, i);
      case K::always:
        for (std::size_t j = i; j < trace.length(); ++j) {
          Time d = time(j) - time(i);
          if (f.interval().hi() && d > *f.interval().hi()) break;
          if (f.interval().contains(d) && !eval(f.child(), val, j)) return false;
        }
        return true;
      case K::next:
        return i + 1 < trace.length() && f.interval().contains(time(i + 1) - time(i)) && eval(f.child(), val, i + 1);
      case K::prev:
        return i >= 1 && f.interval().contains(time(i) - time(i - 1)) && eval(f.child(), val, i - 1);
    }
    return false;
  }
};

}  // namespace

bool evaluate(const Trace& trace, const Formula& f, const Valuation& val, std::size_t pos) {
  if (pos >= trace.length()) throw std::out_of_range("trace position out of range");
  Valuation v = val;
  return Evaluator{trace}.eval(f, v, pos);
}

bool satisfies(const Trace& trace, const Formula& f) { return evaluate(anchored(trace), f, {}, 0); }

std::size_t volume(const Trace& t) {
  std::size_t n = 0;
  for (const auto& p : t.positions()) n += p.atoms.size();
  return n;
}

std::optional<std::size_t> check_requirements(const Trace& trace, const std::vector<Formula>& reqs) {
  Trace a = anchored(trace);
  for (std::size_t i = 0; i < reqs.size(); ++i)
    if (!evaluate(a, reqs[i], {}, 0)) return i;
  return std::nullopt;
}

bool satisfies_data(const GroundAtom& a, Time time, const std::vector<DataConstraint>& data) {
  Valuation val{{"time", time}};
  for (std::size_t k = 0; k < a.args.size(); ++k) val["arg" + std::to_string(k + 1)] = a.args[k];
  Trace point(std::vector<Position>{{0, {}}});
  for (const auto& d : data)
    if (d.relation == a.relation && !evaluate(point, d.constraint, val, 0)) return false;
  return true;
}

bool satisfies_data(const Trace& trace, const std::vector<DataConstraint>& data) {
  if (data.empty()) return true;
  for (const auto& p : trace.positions())
    for (const auto& a : p.atoms)
      if (!satisfies_data(a, p.time, data)) return false;
  return true;
}

bool is_counterexample(const Trace& trace, const Spec& spec) {
  std::vector<Formula> reqs;
  for (const auto& r : spec.requirements) reqs.push_back(r.formula);
  return satisfies_data(trace, spec.data) && !check_requirements(trace, reqs) &&
         !satisfies(trace, spec.property.formula);
}

// ---------------------------------------------------------------- json

nlohmann::json to_json(const Trace& t) {
  nlohmann::json positions = nlohmann::json::array();
  for (const auto& p : t.positions()) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : p.atoms) atoms.push_back({{"rel", a.relation}, {"args", a.args}});
    positions.push_back({{"time", p.time}, {"atoms", atoms}});
  }
  return {{"positions", positions}};
}

Trace trace_from_json(const nlohmann::json& j) {
  std::vector<Position> ps;
  for (const auto& p : j.at("positions")) {
    Position pos{p.at("time").get<Time>(), {}};
    for (const auto& a : p.at("atoms"))
      pos.atoms.push_back({a.at("rel").get<std::string>(), a.at("args").get<std::vector<Value>>()});
    ps.push_back(std::move(pos));
  }
  return Trace(std::move(ps));
}

Trace parse_trace_json(std::string_view text) { return trace_from_json(nlohmann::json::parse(text)); }

}  // namespace mfotl
