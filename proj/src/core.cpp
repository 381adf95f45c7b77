#include "mfotl/core.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace mfotl {

Interval::Interval(Time lo, std::optional<Time> hi) : lo_(lo), hi_(hi) {
  if (lo < 0) throw std::invalid_argument("interval lower bound must be >= 0");
  if (hi && *hi < lo) throw std::invalid_argument("interval lower bound exceeds upper bound");
}

std::string to_string(const Interval& i) {
  std::string s = "[" + std::to_string(i.lo()) + ",";
  if (i.hi()) return s + std::to_string(*i.hi()) + "]";
  return s + ")";
}

void Signature::add_relation(std::string name, std::size_t arity) {
  if (arity == 0) throw std::invalid_argument("relation " + name + " must have arity >= 1");
  if (find_relation(name)) throw std::invalid_argument("duplicate relation " + name);
  relations_.push_back({std::move(name), arity});
}

void Signature::add_constant(std::string name, Value value) {
  if (find_constant(name)) throw std::invalid_argument("duplicate constant " + name);
  constants_.push_back({std::move(name), value});
}

const RelationDecl* Signature::find_relation(std::string_view name) const {
  for (const auto& r : relations_)
    if (r.name == name) return &r;
  return nullptr;
}

std::optional<Value> Signature::find_constant(std::string_view name) const {
  for (const auto& c : constants_)
    if (c.name == name) return c.value;
  return std::nullopt;
}

// ---------------------------------------------------------------- terms

struct Term::Node {
  Kind kind;
  Value value = 0;
  std::string name;
  std::vector<Term> operands;
};

Term Term::constant(Value v) { return Term(std::make_shared<const Node>(Node{Kind::constant, v, {}, {}})); }
Term Term::variable(std::string name) {
  return Term(std::make_shared<const Node>(Node{Kind::variable, 0, std::move(name), {}}));
}
Term Term::sum(Term a, Term b) {
  return Term(std::make_shared<const Node>(Node{Kind::sum, 0, {}, {std::move(a), std::move(b)}}));
}
Term Term::scale(Value c, Term t) {
  return Term(std::make_shared<const Node>(Node{Kind::scale, c, {}, {std::move(t)}}));
}

Term::Kind Term::kind() const { return node_->kind; }
Value Term::value() const { return node_->value; }
const std::string& Term::name() const { return node_->name; }
const Term& Term::lhs() const { return node_->operands.at(0); }
const Term& Term::rhs() const { return node_->operands.at(1); }

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.value == y.value && x.name == y.name && x.operands == y.operands;
}

namespace {

std::string term_string(const Term& t, bool operand) {
  switch (t.kind()) {
    case Term::Kind::constant:
      return std::to_string(t.value());
    case Term::Kind::variable:
      return t.name();
    case Term::Kind::sum: {
      std::string s = term_string(t.lhs(), false);
      const Term& r = t.rhs();
      if (r.kind() == Term::Kind::scale && r.value() == -1)
        s += " - " + term_string(r.lhs(), true);
      else
        s += " + " + term_string(r, true);
      return operand ? "(" + s + ")" : s;
    }
    case Term::Kind::scale: {
      std::string s = std::to_string(t.value()) + " * " + term_string(t.lhs(), true);
      return operand ? "(" + s + ")" : s;
    }
  }
  return {};
}

}  // namespace

std::string to_string(const Term& t) { return term_string(t, false); }

// ---------------------------------------------------------------- formulas

Formula make_formula(Formula::Node n) { return Formula(std::make_shared<const Formula::Node>(std::move(n))); }

Formula::Kind Formula::kind() const { return node_->kind; }
const std::string& Formula::relation() const { return node_->relation; }
const std::vector<Term>& Formula::terms() const { return node_->terms; }
const std::vector<Formula>& Formula::children() const { return node_->children; }
const Interval& Formula::interval() const { return node_->interval; }
const std::vector<std::string>& Formula::variables() const { return node_->variables; }

bool Formula::is_temporal() const {
  switch (kind()) {
    case Kind::until:
    case Kind::since:
    case Kind::next:
    case Kind::prev:
    case Kind::eventually:
    case Kind::always:
    case Kind::once:
      return true;
    default:
      return false;
  }
}

bool Formula::is_sugar() const {
  switch (kind()) {
    case Kind::disjunction:
    case Kind::implication:
    case Kind::eventually:
    case Kind::always:
    case Kind::once:
      return true;
    default:
      return false;
  }
}

std::size_t Formula::size() const {
  std::size_t n = 1;
  for (const auto& c : children()) n += c.size();
  return n;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.relation == y.relation && x.terms == y.terms && x.interval == y.interval &&
         x.variables == y.variables && x.children == y.children;
}

namespace {

using K = Formula::Kind;

Formula node(K k, std::vector<Formula> children = {}, Interval i = {}) {
  Formula::Node n;
  n.kind = k;
  n.children = std::move(children);
  n.interval = i;
  return make_formula(std::move(n));
}

}  // namespace

Formula truth() { return node(K::truth); }
Formula falsity() { return node(K::falsity); }

Formula equal(Term a, Term b) {
  Formula::Node n;
  n.kind = K::equal;
  n.terms = {std::move(a), std::move(b)};
  return make_formula(std::move(n));
}

Formula greater(Term a, Term b) {
  Formula::Node n;
  n.kind = K::greater;
  n.terms = {std::move(a), std::move(b)};
  return make_formula(std::move(n));
}

Formula atom(std::string relation, std::vector<Term> args) {
  Formula::Node n;
  n.kind = K::atom;
  n.relation = std::move(relation);
  n.terms = std::move(args);
  return make_formula(std::move(n));
}

Formula neg(Formula f) { return node(K::negation, {std::move(f)}); }
Formula conj(Formula a, Formula b) { return node(K::conjunction, {std::move(a), std::move(b)}); }
Formula disj(Formula a, Formula b) { return node(K::disjunction, {std::move(a), std::move(b)}); }
Formula implies(Formula a, Formula b) { return node(K::implication, {std::move(a), std::move(b)}); }

Formula exists(std::vector<std::string> vars, Formula guard, Formula body) {
  Formula::Node n;
  n.kind = K::exists;
  n.variables = std::move(vars);
  n.children = {std::move(guard), std::move(body)};
  return make_formula(std::move(n));
}

Formula forall(std::vector<std::string> vars, Formula guard, Formula body) {
  return neg(exists(std::move(vars), std::move(guard), neg(std::move(body))));
}

Formula until(Formula a, Formula b, Interval i) { return node(K::until, {std::move(a), std::move(b)}, i); }
Formula since(Formula a, Formula b, Interval i) { return node(K::since, {std::move(a), std::move(b)}, i); }
Formula next(Formula f, Interval i) { return node(K::next, {std::move(f)}, i); }
Formula prev(Formula f, Interval i) { return node(K::prev, {std::move(f)}, i); }
Formula eventually(Formula f, Interval i) { return node(K::eventually, {std::move(f)}, i); }
Formula always(Formula f, Interval i) { return node(K::always, {std::move(f)}, i); }
Formula once(Formula f, Interval i) { return node(K::once, {std::move(f)}, i); }

// ---------------------------------------------------------------- printing

namespace {

// Binding strength, loosest first; mirrors the parser.
enum Level { l_quant = 0, l_temporal_binary, l_implies, l_or, l_and, l_unary, l_primary };

std::string interval_suffix(const Interval& i) { return i.is_full() ? "" : to_string(i); }

bool is_forall_shape(const Formula& f) {
  return f.kind() == K::negation && f.child().kind() == K::exists && f.child().body().kind() == K::negation;
}

std::string vars_string(const std::vector<std::string>& vs) {
  std::string s;
  for (std::size_t i = 0; i < vs.size(); ++i) s += (i ? "," : "") + vs[i];
  return s;
}

std::string print(const Formula& f, int ctx);

std::string wrap(std::string s, int level, int ctx) { return level < ctx ? "(" + s + ")" : s; }

std::string print_atom(const Formula& f) {
  std::string s = f.relation() + "(";
  for (std::size_t i = 0; i < f.terms().size(); ++i) s += (i ? ", " : "") + to_string(f.terms()[i]);
  return s + ")";
}

std::string print(const Formula& f, int ctx) {
  switch (f.kind()) {
    case K::truth:
      return "TRUE";
    case K::falsity:
      return "FALSE";
    case K::atom:
      return print_atom(f);
    case K::equal:
      return to_string(f.terms()[0]) + " = " + to_string(f.terms()[1]);
    case K::greater:
      return to_string(f.terms()[0]) + " > " + to_string(f.terms()[1]);
    case K::negation: {
      const Formula& c = f.child();
      if (c.kind() == K::equal) return to_string(c.terms()[0]) + " != " + to_string(c.terms()[1]);
      if (c.kind() == K::greater) return to_string(c.terms()[0]) + " <= " + to_string(c.terms()[1]);
      if (is_forall_shape(f)) {
        const Formula& e = f.child();
        std::string s = "FORALL " + vars_string(e.variables()) + " . " + print_atom(e.guard()) + " -> " +
                        print(e.body().child(), l_implies);
        return wrap(std::move(s), l_quant, ctx);
      }
      return wrap("NOT " + print(c, l_unary), l_unary, ctx);
    }
    case K::conjunction:
      return wrap(print(f.child(0), l_and) + " AND " + print(f.child(1), l_unary), l_and, ctx);
    case K::disjunction:
      return wrap(print(f.child(0), l_or) + " OR " + print(f.child(1), l_and), l_or, ctx);
    case K::implication:
      return wrap(print(f.child(0), l_or) + " -> " + print(f.child(1), l_implies), l_implies, ctx);
    case K::exists: {
      std::string s = "EXISTS " + vars_string(f.variables()) + " . " + print_atom(f.guard());
      if (f.body().kind() != K::truth) s += " AND " + print(f.body(), l_unary);
      return wrap(std::move(s), l_quant, ctx);
    }
    case K::until:
    case K::since: {
      std::string op = f.kind() == K::until ? " UNTIL" : " SINCE";
      return wrap(print(f.child(0), l_implies) + op + interval_suffix(f.interval()) + " " +
                      print(f.child(1), l_implies),
                  l_temporal_binary, ctx);
    }
    case K::next:
    case K::prev:
    case K::eventually:
    case K::always:
    case K::once: {
      const char* op = f.kind() == K::next         ? "NEXT"
                       : f.kind() == K::prev       ? "PREV"
                       : f.kind() == K::eventually ? "EVENTUALLY"
                       : f.kind() == K::always     ? "ALWAYS"
                                                   : "ONCE";
      return wrap(std::string(op) + interval_suffix(f.interval()) + " " + print(f.child(), l_unary), l_unary, ctx);
    }
  }
  return {};
}

}  // namespace

std::string to_string(const Formula& f) { return print(f, l_quant); }

// ---------------------------------------------------------------- desugar

Formula desugar(const Formula& f) {
  switch (f.kind()) {
    case K::truth:
    case K::falsity:
    case K::equal:
    case K::greater:
    case K::atom:
      return f;
    case K::negation:
      return neg(desugar(f.child()));
    case K::conjunction:
      return conj(desugar(f.child(0)), desugar(f.child(1)));
    case K::disjunction:
      return neg(conj(neg(desugar(f.child(0))), neg(desugar(f.child(1)))));
    case K::implication:
      return neg(conj(desugar(f.child(0)), neg(desugar(f.child(1)))));
    case K::exists:
      return exists(f.variables(), f.guard(), desugar(f.body()));
    case K::until:
      return until(desugar(f.child(0)), desugar(f.child(1)), f.interval());
    case K::since:
      return since(desugar(f.child(0)), desugar(f.child(1)), f.interval());
    case K::next:
      return next(desugar(f.child()), f.interval());
    case K::prev:
      return prev(desugar(f.child()), f.interval());
    case K::eventually:
      return until(truth(), desugar(f.child()), f.interval());
    case K::always:
      return neg(until(truth(), neg(desugar(f.child())), f.interval()));
    case K::once:
      return since(truth(), desugar(f.child()), f.interval());
  }
  return f;
}

// ---------------------------------------------------------------- validation

std::optional<std::size_t> binding_position(const Formula& guard, const std::string& var) {
  const auto& ts = guard.terms();
  for (std::size_t k = 0; k < ts.size(); ++k)
    if (ts[k].is_variable() && ts[k].name() == var) return k;
  return std::nullopt;
}

namespace {

void term_variables(const Term& t, std::vector<std::string>& out) {
  switch (t.kind()) {
    case Term::Kind::constant:
      return;
    case Term::Kind::variable:
      out.push_back(t.name());
      return;
    case Term::Kind::sum:
      term_variables(t.lhs(), out);
      term_variables(t.rhs(), out);
      return;
    case Term::Kind::scale:
      term_variables(t.lhs(), out);
      return;
  }
}

struct Validator {
  const Signature& sig;
  std::vector<Diagnostic> out;
  std::set<std::string> reported_free;

  void diag(std::string rule, const Formula& f, std::string message) {
    out.push_back({std::move(rule), to_string(f), std::move(message)});
  }

  void check_terms(const Formula& f, const std::vector<std::string>& bound) {
    std::vector<std::string> vs;
    for (const auto& t : f.terms()) term_variables(t, vs);
    for (const auto& v : vs)
      if (std::find(bound.begin(), bound.end(), v) == bound.end() && reported_free.insert(v).second)
        diag("free variable", f, "free variable " + v);
  }

  void check_atom(const Formula& f, const std::vector<std::string>& bound) {
    const RelationDecl* r = sig.find_relation(f.relation());
    if (!r)
      diag("unknown relation", f, "unknown relation " + f.relation());
    else if (r->arity != f.terms().size())
      diag("arity", f,
           "relation " + f.relation() + " has arity " + std::to_string(r->arity) + ", used with " +
               std::to_string(f.terms().size()) + " arguments");
    check_terms(f, bound);
  }

  void visit(const Formula& f, std::vector<std::string>& bound) {
    switch (f.kind()) {
      case K::truth:
      case K::falsity:
        return;
      case K::equal:
      case K::greater:
        check_terms(f, bound);
        return;
      case K::atom:
        check_atom(f, bound);
        return;
      case K::exists: {
        const Formula& g = f.guard();
        if (f.variables().empty()) diag("unguarded quantifier", f, "quantifier binds no variables");
        if (g.kind() != K::atom) {
          diag("unguarded quantifier", f, "quantifier guard must be a relational atom");
          return;
        }
        std::set<std::string> seen;
        for (const auto& v : f.variables()) {
          if (!seen.insert(v).second) diag("unguarded quantifier", f, "variable " + v + " bound twice");
          if (!binding_position(g, v))
            diag("unguarded quantifier", f, "variable " + v + " is not an argument of guard " + g.relation());
        }
        std::size_t mark = bound.size();
        bound.insert(bound.end(), f.variables().begin(), f.variables().end());
        check_atom(g, bound);
        visit(f.body(), bound);
        bound.resize(mark);
        return;
      }
      default:
        for (const auto& c : f.children()) visit(c, bound);
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Formula& f, const Signature& sig) {
  Validator v{sig, {}, {}};
  std::vector<std::string> bound;
  v.visit(f, bound);
  return std::move(v.out);
}

std::vector<std::string> free_variables(const Formula& f) {
  std::vector<std::string> out;
  struct Walk {
    std::vector<std::string>& out;
    void terms(const Formula& f, const std::vector<std::string>& bound) {
      std::vector<std::string> vs;
      for (const auto& t : f.terms()) term_variables(t, vs);
      for (auto& v : vs)
        if (std::find(bound.begin(), bound.end(), v) == bound.end() &&
            std::find(out.begin(), out.end(), v) == out.end())
          out.push_back(v);
    }
    void go(const Formula& f, std::vector<std::string>& bound) {
      if (f.kind() == K::exists) {
        std::size_t mark = bound.size();
        bound.insert(bound.end(), f.variables().begin(), f.variables().end());
        terms(f.guard(), bound);
        go(f.body(), bound);
        bound.resize(mark);
        return;
      }
      terms(f, bound);
      for (const auto& c : f.children()) go(c, bound);
    }
  } w{out};
  std::vector<std::string> bound;
  w.go(f, bound);
  return out;
}

std::vector<Diagnostic> validate(const DataConstraint& d, const Signature& sig) {
  std::vector<Diagnostic> out;
  const RelationDecl* r = sig.find_relation(d.relation);
  if (!r) {
    out.push_back({"unknown relation", d.relation, "data constraint on unknown relation " + d.relation});
    return out;
  }
  std::vector<std::string> allowed{"time"};
  for (std::size_t k = 1; k <= r->arity; ++k) allowed.push_back("arg" + std::to_string(k));

  struct Walk {
    const std::vector<std::string>& allowed;
    std::vector<Diagnostic>& out;
    void go(const Formula& f) {
      switch (f.kind()) {
        case K::truth:
        case K::falsity:
          return;
        case K::equal:
        case K::greater: {
          std::vector<std::string> vs;
          for (const auto& t : f.terms()) term_variables(t, vs);
          for (const auto& v : vs)
            if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
              out.push_back({"data constraint", to_string(f), "unknown attribute " + v});
          return;
        }
        case K::negation:
        case K::conjunction:
        case K::disjunction:
        case K::implication:
          for (const auto& c : f.children()) go(c);
          return;
        default:
          out.push_back({"data constraint", to_string(f), "data constraints must be quantifier-free arithmetic"});
      }
    }
  } w{allowed, out};
  w.go(d.constraint);
  return out;
}

std::vector<Diagnostic> validate(const Spec& s) {
  std::vector<Diagnostic> out;
  auto add = [&](const std::vector<Diagnostic>& ds, const std::string& where) {
    for (auto d : ds) {
      d.message = where + ": " + d.message;
      out.push_back(std::move(d));
    }
  };
  for (const auto& r : s.requirements) add(validate(r.formula, s.signature), r.name);
  add(validate(s.property.formula, s.signature), s.property.name);
  for (const auto& d : s.data) add(validate(d, s.signature), "data " + d.relation);
  return out;
}

}  // namespace mfotl
