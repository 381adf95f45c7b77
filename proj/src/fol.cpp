#include "mfotl/fol.hpp"

#include <algorithm>
#include <stdexcept>

namespace mfotl::fol {

bool LinTerm::mentions(int var) const {
  return std::any_of(coeffs_.begin(), coeffs_.end(), [&](const auto& kv) { return kv.first.var == var; });
}

LinTerm& LinTerm::operator+=(const LinTerm& o) {
  for (const auto& [s, c] : o.coeffs_) {
    Value& v = coeffs_[s];
    v += c;
    if (v == 0) coeffs_.erase(s);
  }
  constant_ += o.constant_;
  return *this;
}

LinTerm& LinTerm::operator*=(Value c) {
  if (c == 0) {
    coeffs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& kv : coeffs_) kv.second *= c;
  constant_ *= c;
  return *this;
}

LinTerm LinTerm::substitute(const Symbol& s, const LinTerm& by) const {
  auto it = coeffs_.find(s);
  if (it == coeffs_.end()) return *this;
  LinTerm out = *this;
  Value c = it->second;
  out.coeffs_.erase(s);
  return out + c * by;
}

// ---------------------------------------------------------------- formulas

using FK = Formula::Kind;

Formula::Kind Formula::kind() const { return node_->kind; }
Cmp Formula::op() const { return node_->op; }
const LinTerm& Formula::term() const { return node_->term; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const ObjectVar& Formula::object() const { return node_->object; }
int Formula::position() const { return node_->position; }

bool Formula::is_quantifier() const {
  switch (kind()) {
    case FK::exists_obj:
    case FK::forall_obj:
    case FK::exists_pos:
    case FK::forall_pos:
      return true;
    default:
      return false;
  }
}

bool Formula::mentions(int var) const {
  if (kind() == FK::compare) return term().mentions(var);
  return std::any_of(children().begin(), children().end(), [&](const Formula& c) { return c.mentions(var); });
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.op == y.op && x.term == y.term && x.object == y.object && x.position == y.position &&
         x.children == y.children;
}

namespace {

Formula make(FK k, std::vector<Formula> children = {}) {
  Formula::Node n;
  n.kind = k;
  n.children = std::move(children);
  return Formula(std::move(n));
}

void flatten(const Formula& f, FK k, std::vector<Formula>& out) {
  if (f.kind() == k) {
    for (const auto& c : f.children()) flatten(c, k, out);
  } else {
    out.push_back(f);
  }
}

}  // namespace

Formula top() { return make(FK::truth); }
Formula bottom() { return make(FK::falsity); }

Formula compare(LinTerm lhs, std::string_view op, LinTerm rhs) {
  LinTerm t = lhs - rhs;
  Cmp c;
  if (op == "=") {
    c = Cmp::eq;
  } else if (op == "!=") {
    c = Cmp::ne;
  } else if (op == "<=") {
    c = Cmp::le;
  } else if (op == ">=") {
    c = Cmp::ge;
  } else if (op == "<") {
    t += LinTerm(1);
    c = Cmp::le;
  } else if (op == ">") {
    t += LinTerm(-1);
    c = Cmp::ge;
  } else {
    throw std::invalid_argument("unknown comparison " + std::string(op));
  }
  if (!t.coeffs().empty() && t.coeffs().begin()->second < 0) {
    t *= -1;
    if (c == Cmp::le)
      c = Cmp::ge;
    else if (c == Cmp::ge)
      c = Cmp::le;
  }
  Formula::Node n;
  n.kind = FK::compare;
  n.op = c;
  n.term = std::move(t);
  return Formula(std::move(n));
}

Formula all_of(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (const auto& f : fs) flatten(f, FK::conjunction, flat);
  if (flat.empty()) return top();
  if (flat.size() == 1) return flat.front();
  return make(FK::conjunction, std::move(flat));
}

Formula any_of(std::vector<Formula> fs) {
  std::vector<Formula> flat;
  for (const auto& f : fs) flatten(f, FK::disjunction, flat);
  if (flat.empty()) return bottom();
  if (flat.size() == 1) return flat.front();
  return make(FK::disjunction, std::move(flat));
}

namespace {

Formula quant(FK k, ObjectVar o, int pos, Formula body) {
  Formula::Node n;
  n.kind = k;
  n.object = std::move(o);
  n.position = pos;
  n.children = {std::move(body)};
  return Formula(std::move(n));
}

}  // namespace

Formula exists_obj(ObjectVar o, Formula body) { return quant(FK::exists_obj, std::move(o), -1, std::move(body)); }
Formula forall_obj(ObjectVar o, Formula body) { return quant(FK::forall_obj, std::move(o), -1, std::move(body)); }
Formula exists_pos(int u, Formula body) { return quant(FK::exists_pos, {}, u, std::move(body)); }
Formula forall_pos(int u, Formula body) { return quant(FK::forall_pos, {}, u, std::move(body)); }

Formula substitute(const Formula& f, const Symbol& s, const LinTerm& by) {
  switch (f.kind()) {
    case FK::truth:
    case FK::falsity:
      return f;
    case FK::compare: {
      if (!f.term().coeffs().count(s)) return f;
      Formula::Node n;
      n.kind = FK::compare;
      n.op = f.op();
      n.term = f.term().substitute(s, by);
      // re-normalize the sign
      LinTerm t = n.term;
      if (!t.coeffs().empty() && t.coeffs().begin()->second < 0) {
        t *= -1;
        if (n.op == Cmp::le)
          n.op = Cmp::ge;
        else if (n.op == Cmp::ge)
          n.op = Cmp::le;
        n.term = t;
      }
      return Formula(std::move(n));
    }
    case FK::conjunction:
    case FK::disjunction: {
      std::vector<Formula> cs;
      for (const auto& c : f.children()) cs.push_back(substitute(c, s, by));
      return make(f.kind(), std::move(cs));
    }
    default:
      return quant(f.kind(), f.object(), f.position(), substitute(f.body(), s, by));
  }
}

// ---------------------------------------------------------------- simplify

namespace {

std::optional<bool> fold(const LinTerm& t, Cmp op) {
  Value k = t.constant();
  if (t.is_constant()) {
    switch (op) {
      case Cmp::eq:
        return k == 0;
      case Cmp::ne:
        return k != 0;
      case Cmp::le:
        return k <= 0;
      case Cmp::ge:
        return k >= 0;
    }
  }
  // All symbols are times (>= 0) with positive coefficients.
  bool nonneg = std::all_of(t.coeffs().begin(), t.coeffs().end(),
                            [](const auto& kv) { return kv.first.is_time_like() && kv.second > 0; });
  if (!nonneg) return std::nullopt;
  switch (op) {
    case Cmp::eq:
      if (k > 0) return false;
      break;
    case Cmp::ne:
      if (k > 0) return true;
      break;
    case Cmp::le:
      if (k > 0) return false;
      break;
    case Cmp::ge:
      if (k >= 0) return true;
      break;
  }
  return std::nullopt;
}

bool is_time_equation(const Formula& f, int obj, int u, Cmp op) {
  return f.kind() == FK::compare && f.op() == op &&
         f.term() == LinTerm(Symbol::time_of(obj)) - LinTerm(Symbol::position(u));
}

std::vector<Formula> dedupe(std::vector<Formula> fs) {
  std::vector<Formula> out;
  for (auto& f : fs)
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(std::move(f));
  return out;
}

// exists u.(C(u) AND exists o.(o.time = u AND B)) => exists o.(C AND B)[u := o.time]
std::optional<Formula> pin_exists(int u, const Formula& body) {
  std::vector<Formula> cs;
  flatten(body, FK::conjunction, cs);
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].kind() != FK::exists_obj) continue;
    int o = cs[i].object().id;
    std::vector<Formula> inner;
    flatten(cs[i].body(), FK::conjunction, inner);
    auto eq = std::find_if(inner.begin(), inner.end(), [&](const Formula& f) { return is_time_equation(f, o, u, Cmp::eq); });
    if (eq == inner.end()) continue;
    inner.erase(eq);
    for (std::size_t j = 0; j < cs.size(); ++j)
      if (j != i) inner.push_back(cs[j]);
    Formula merged = substitute(all_of(std::move(inner)), Symbol::position(u), LinTerm(Symbol::time_of(o)));
    return exists_obj(cs[i].object(), merged);
  }
  return std::nullopt;
}

// forall u.(D(u) OR forall o.(o.time != u OR X)) => forall o.(D OR X)[u := o.time]
std::optional<Formula> pin_forall(int u, const Formula& body) {
  std::vector<Formula> ds;
  flatten(body, FK::disjunction, ds);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (ds[i].kind() != FK::forall_obj) continue;
    int o = ds[i].object().id;
    std::vector<Formula> inner;
    flatten(ds[i].body(), FK::disjunction, inner);
    auto ne = std::find_if(inner.begin(), inner.end(), [&](const Formula& f) { return is_time_equation(f, o, u, Cmp::ne); });
    if (ne == inner.end()) continue;
    inner.erase(ne);
    for (std::size_t j = 0; j < ds.size(); ++j)
      if (j != i) inner.push_back(ds[j]);
    Formula merged = substitute(any_of(std::move(inner)), Symbol::position(u), LinTerm(Symbol::time_of(o)));
    return forall_obj(ds[i].object(), merged);
  }
  return std::nullopt;
}

}  // namespace

Formula simplify(const Formula& f) {
  switch (f.kind()) {
    case FK::truth:
    case FK::falsity:
      return f;
    case FK::compare: {
      if (auto v = fold(f.term(), f.op())) return *v ? top() : bottom();
      return f;
    }
    case FK::conjunction: {
      std::vector<Formula> cs;
      for (const auto& c : f.children()) {
        Formula s = simplify(c);
        if (s.kind() == FK::falsity) return bottom();
        if (s.kind() != FK::truth) flatten(s, FK::conjunction, cs);
      }
      return all_of(dedupe(std::move(cs)));
    }
    case FK::disjunction: {
      std::vector<Formula> ds;
      for (const auto& c : f.children()) {
        Formula s = simplify(c);
        if (s.kind() == FK::truth) return top();
        if (s.kind() != FK::falsity) flatten(s, FK::disjunction, ds);
      }
      return any_of(dedupe(std::move(ds)));
    }
    case FK::exists_obj: {
      Formula b = simplify(f.body());
      if (b.kind() == FK::falsity) return b;
      return exists_obj(f.object(), b);
    }
    case FK::forall_obj: {
      Formula b = simplify(f.body());
      if (b.kind() == FK::truth) return b;
      return forall_obj(f.object(), b);
    }
    case FK::exists_pos: {
      Formula b = simplify(f.body());
      if (b.kind() == FK::falsity || !b.mentions(f.position())) return b;
      if (auto r = pin_exists(f.position(), b)) return simplify(*r);
      return exists_pos(f.position(), b);
    }
    case FK::forall_pos: {
      Formula b = simplify(f.body());
      if (b.kind() == FK::truth || !b.mentions(f.position())) return b;
      if (auto r = pin_forall(f.position(), b)) return simplify(*r);
      return forall_pos(f.position(), b);
    }
  }
  return f;
}

bool forces_position(const Formula& f, int u) {
  switch (f.kind()) {
    case FK::conjunction:
      return std::any_of(f.children().begin(), f.children().end(), [&](const Formula& c) { return forces_position(c, u); });
    case FK::disjunction:
      return std::all_of(f.children().begin(), f.children().end(), [&](const Formula& c) { return forces_position(c, u); });
    case FK::exists_obj: {
      std::vector<Formula> inner;
      flatten(f.body(), FK::conjunction, inner);
      for (const auto& c : inner)
        if (is_time_equation(c, f.object().id, u, Cmp::eq)) return true;
      return forces_position(f.body(), u);
    }
    case FK::exists_pos:
      return forces_position(f.body(), u);
    default:
      return false;
  }
}

std::size_t size(const Formula& f) {
  std::size_t n = 1;
  for (const auto& c : f.children()) n += size(c);
  return n;
}

int quantifier_depth(const Formula& f) {
  int d = 0;
  for (const auto& c : f.children()) d = std::max(d, quantifier_depth(c));
  return d + (f.is_quantifier() ? 1 : 0);
}

bool has_position_quantifier(const Formula& f) {
  if (f.kind() == FK::exists_pos || f.kind() == FK::forall_pos) return true;
  return std::any_of(f.children().begin(), f.children().end(), has_position_quantifier);
}

// ---------------------------------------------------------------- printing

namespace {

std::string symbol_string(const Symbol& s) {
  if (s.kind == Symbol::Kind::position) return "t" + std::to_string(s.var);
  std::string o = "o" + std::to_string(s.var);
  return s.attr == Symbol::time_attr ? o + ".time" : o + ".arg" + std::to_string(s.attr + 1);
}

std::string monomial(const Symbol& s, Value c) {
  return c == 1 ? symbol_string(s) : "(* " + std::to_string(c) + " " + symbol_string(s) + ")";
}

std::string vars_string(const LinTerm& t) {
  const auto& cs = t.coeffs();
  if (cs.empty()) return "0";
  if (cs.size() == 1) return monomial(cs.begin()->first, cs.begin()->second);
  if (cs.size() == 2 && cs.begin()->second == 1 && std::next(cs.begin())->second == -1)
    return "(- " + symbol_string(cs.begin()->first) + " " + symbol_string(std::next(cs.begin())->first) + ")";
  std::string s = "(+";
  for (const auto& [sym, c] : cs) s += " " + monomial(sym, c);
  return s + ")";
}

void print(const Formula& f, std::string& out) {
  switch (f.kind()) {
    case FK::truth:
      out += "true";
      return;
    case FK::falsity:
      out += "false";
      return;
    case FK::compare: {
      const char* op = f.op() == Cmp::eq ? "=" : f.op() == Cmp::ne ? "!=" : f.op() == Cmp::le ? "<=" : ">=";
      out += std::string("(") + op + " " + vars_string(f.term()) + " " + std::to_string(-f.term().constant()) + ")";
      return;
    }
    case FK::conjunction:
    case FK::disjunction:
      out += f.kind() == FK::conjunction ? "(and" : "(or";
      for (const auto& c : f.children()) {
        out += " ";
        print(c, out);
      }
      out += ")";
      return;
    case FK::exists_obj:
    case FK::forall_obj:
      out += f.kind() == FK::exists_obj ? "(exists (o" : "(forall (o";
      out += std::to_string(f.object().id) + " " + f.object().cls + ") ";
      print(f.body(), out);
      out += ")";
      return;
    case FK::exists_pos:
    case FK::forall_pos:
      out += f.kind() == FK::exists_pos ? "(exists-pos t" : "(forall-pos t";
      out += std::to_string(f.position()) + " ";
      print(f.body(), out);
      out += ")";
      return;
  }
}

}  // namespace

std::string to_string(const LinTerm& t) {
  if (t.is_constant()) return std::to_string(t.constant());
  std::string v = vars_string(t);
  if (t.constant() == 0) return v;
  return "(+ " + v + " " + std::to_string(t.constant()) + ")";
}

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

// ---------------------------------------------------------------- translation

using MK = mfotl::Formula::Kind;

LinTerm Translator::term(const Term& t, const Env& env) const {
  switch (t.kind()) {
    case Term::Kind::constant:
      return LinTerm(t.value());
    case Term::Kind::variable: {
      auto it = env.find(t.name());
      if (it == env.end()) throw std::invalid_argument("free variable " + t.name() + " in translated formula");
      return it->second;
    }
    case Term::Kind::sum:
      return term(t.lhs(), env) + term(t.rhs(), env);
    case Term::Kind::scale:
      return t.value() * term(t.lhs(), env);
  }
  return {};
}

std::vector<Formula> Translator::interval_holds(const LinTerm& d, const Interval& i) {
  std::vector<Formula> out;
  if (i.lo() > 0) out.push_back(compare(d, ">=", LinTerm(i.lo())));
  if (i.hi()) out.push_back(compare(d, "<=", LinTerm(*i.hi())));
  return out;
}

Formula Translator::interval_fails(const LinTerm& d, const Interval& i) {
  std::vector<Formula> out;
  if (i.lo() > 0) out.push_back(compare(d, "<", LinTerm(i.lo())));
  if (i.hi()) out.push_back(compare(d, ">", LinTerm(*i.hi())));
  return any_of(std::move(out));
}

Formula Translator::translate(const mfotl::Formula& phi, const LinTerm& at, bool positive) {
  return go(desugar(phi), at, positive, {});
}

Formula Translator::translate_top(const mfotl::Formula& phi) { return simplify(translate(phi, LinTerm(0))); }

Formula Translator::go(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env) {
  switch (f.kind()) {
    case MK::truth:
      return pos ? top() : bottom();
    case MK::falsity:
      return pos ? bottom() : top();
    case MK::equal:
      return compare(term(f.terms()[0], env), pos ? "=" : "!=", term(f.terms()[1], env));
    case MK::greater:
      return compare(term(f.terms()[0], env), pos ? ">" : "<=", term(f.terms()[1], env));
    case MK::atom:
      return atom_at(f, at, pos, env);
    case MK::negation:
      return go(f.child(), at, !pos, env);
    case MK::conjunction:
      if (pos) return all_of({go(f.child(0), at, true, env), go(f.child(1), at, true, env)});
      return any_of({go(f.child(0), at, false, env), go(f.child(1), at, false, env)});
    case MK::exists:
      return exists_at(f, at, pos, env);
    case MK::until:
      return until_at(f, at, pos, env);
    case MK::since:
      return since_at(f, at, pos, env);
    case MK::next:
      return step_at(f, at, pos, env, true);
    case MK::prev:
      return step_at(f, at, pos, env, false);
    default:
      throw std::logic_error("translate: formula not desugared");
  }
}

Formula Translator::atom_at(const mfotl::Formula& a, const LinTerm& at, bool pos, const Env& env) {
  ObjectVar o{next_var_++, a.relation()};
  const char* eq = pos ? "=" : "!=";
  std::vector<Formula> parts{compare(Symbol::time_of(o.id), eq, at)};
  for (std::size_t k = 0; k < a.terms().size(); ++k)
    parts.push_back(compare(Symbol::arg_of(o.id, static_cast<int>(k)), eq, term(a.terms()[k], env)));
  if (pos) return exists_obj(o, all_of(std::move(parts)));
  return forall_obj(o, any_of(std::move(parts)));
}

Formula Translator::exists_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env) {
  const mfotl::Formula& g = f.guard();
  ObjectVar o{next_var_++, g.relation()};
  Env inner = env;
  std::vector<std::size_t> binding;
  for (const auto& x : f.variables()) {
    std::size_t k = *binding_position(g, x);
    binding.push_back(k);
    inner[x] = LinTerm(Symbol::arg_of(o.id, static_cast<int>(k)));
  }
  const char* eq = pos ? "=" : "!=";
  std::vector<Formula> parts{compare(Symbol::time_of(o.id), eq, at)};
  for (std::size_t k = 0; k < g.terms().size(); ++k) {
    if (std::find(binding.begin(), binding.end(), k) != binding.end()) continue;
    parts.push_back(compare(Symbol::arg_of(o.id, static_cast<int>(k)), eq, term(g.terms()[k], inner)));
  }
  parts.push_back(go(f.body(), at, pos, inner));
  if (pos) return exists_obj(o, all_of(std::move(parts)));
  return forall_obj(o, any_of(std::move(parts)));
}

Formula Translator::until_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env) {
  const int u = next_var_++;
  const int w = next_var_++;
  const LinTerm U(Symbol::position(u)), W(Symbol::position(w));
  const Interval& iv = f.interval();
  if (pos) {
    std::vector<Formula> cs{compare(U, ">=", at)};
    for (auto& c : interval_holds(U - at, iv)) cs.push_back(c);
    cs.push_back(go(f.child(1), U, true, env));
    cs.push_back(forall_pos(w, any_of({compare(W, "<", at), compare(W, ">=", U), go(f.child(0), W, true, env)})));
    return exists_pos(u, all_of(std::move(cs)));
  }
  return forall_pos(u, any_of({compare(U, "<", at), interval_fails(U - at, iv), go(f.child(1), U, false, env),
                               exists_pos(w, all_of({compare(W, ">=", at), compare(W, "<", U),
                                                     go(f.child(0), W, false, env)}))}));
}

Formula Translator::since_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env) {
  const int u = next_var_++;
  const int w = next_var_++;
  const LinTerm U(Symbol::position(u)), W(Symbol::position(w));
  const Interval& iv = f.interval();
  if (pos) {
    std::vector<Formula> cs{compare(U, "<=", at)};
    for (auto& c : interval_holds(at - U, iv)) cs.push_back(c);
    cs.push_back(go(f.child(1), U, true, env));
    cs.push_back(forall_pos(w, any_of({compare(W, "<=", U), compare(W, ">", at), go(f.child(0), W, true, env)})));
    return exists_pos(u, all_of(std::move(cs)));
  }
  return forall_pos(u, any_of({compare(U, ">", at), interval_fails(at - U, iv), go(f.child(1), U, false, env),
                               exists_pos(w, all_of({compare(W, ">", U), compare(W, "<=", at),
                                                     go(f.child(0), W, false, env)}))}));
}

Formula Translator::gap(const LinTerm& lo, const LinTerm& hi, bool none_between) {
  std::vector<Formula> parts;
  for (const auto& r : sig_.relations()) {
    ObjectVar o{next_var_++, r.name};
    LinTerm t(Symbol::time_of(o.id));
    if (none_between)
      parts.push_back(forall_obj(o, any_of({compare(t, "<=", lo), compare(t, ">=", hi)})));
    else
      parts.push_back(exists_obj(o, all_of({compare(t, ">", lo), compare(t, "<", hi)})));
  }
  return none_between ? all_of(std::move(parts)) : any_of(std::move(parts));
}

Formula Translator::step_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env, bool forward) {
  const int u = next_var_++;
  const LinTerm U(Symbol::position(u));
  const LinTerm d = forward ? U - at : at - U;
  const LinTerm& lo = forward ? at : U;
  const LinTerm& hi = forward ? U : at;
  if (pos) {
    std::vector<Formula> cs{compare(U, forward ? ">" : "<", at)};
    for (auto& c : interval_holds(d, f.interval())) cs.push_back(c);
    cs.push_back(gap(lo, hi, true));
    cs.push_back(go(f.child(), U, true, env));
    return exists_pos(u, all_of(std::move(cs)));
  }
  return forall_pos(u, any_of({compare(U, forward ? "<=" : ">=", at), gap(lo, hi, false),
                               interval_fails(d, f.interval()), go(f.child(), U, false, env)}));
}

}  // namespace mfotl::fol
