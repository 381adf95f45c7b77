#include "mfotl/qf.hpp"

#include <algorithm>
#include <cctype>

namespace mfotl::qf {

LinExpr LinExpr::var(const std::string& name, Value coeff) {
  LinExpr e;
  if (coeff != 0) e.coeffs_[name] = coeff;
  return e;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [s, c] : o.coeffs_) {
    Value& v = coeffs_[s];
    v += c;
    if (v == 0) coeffs_.erase(s);
  }
  constant_ += o.constant_;
  return *this;
}

LinExpr& LinExpr::operator*=(Value c) {
  if (c == 0) {
    coeffs_.clear();
    constant_ = 0;
    return *this;
  }
  for (auto& kv : coeffs_) kv.second *= c;
  constant_ *= c;
  return *this;
}

Value Model::int_value(const std::string& name) const {
  auto it = ints.find(name);
  return it == ints.end() ? 0 : it->second;
}

bool Model::bool_value(const std::string& name) const {
  auto it = bools.find(name);
  return it != bools.end() && it->second;
}

Value Model::value(const LinExpr& e) const {
  Value v = e.constant();
  for (const auto& [s, c] : e.coeffs()) v += c * int_value(s);
  return v;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.value == y.value && x.name == y.name && x.term == y.term && x.children == y.children;
}

using EK = Expr::Kind;

namespace {

Expr node(EK k, std::vector<Expr> children) {
  Expr::Node n;
  n.kind = k;
  n.children = std::move(children);
  return Expr(std::move(n));
}

Expr arith(EK k, LinExpr t) {
  if (t.is_constant()) return constant(k == EK::eq ? t.constant() == 0 : t.constant() <= 0);
  Expr::Node n;
  n.kind = k;
  n.term = std::move(t);
  return Expr(std::move(n));
}

}  // namespace

Expr constant(bool b) {
  Expr::Node n;
  n.kind = EK::constant;
  n.value = b;
  return Expr(std::move(n));
}

Expr var(std::string name) {
  Expr::Node n;
  n.kind = EK::var;
  n.name = std::move(name);
  return Expr(std::move(n));
}

Expr eq(const LinExpr& a, const LinExpr& b) { return arith(EK::eq, a - b); }
Expr ne(const LinExpr& a, const LinExpr& b) { return negate(eq(a, b)); }
Expr le(const LinExpr& a, const LinExpr& b) { return arith(EK::le, a - b); }
Expr lt(const LinExpr& a, const LinExpr& b) { return arith(EK::le, a - b + LinExpr(1)); }
Expr ge(const LinExpr& a, const LinExpr& b) { return le(b, a); }
Expr gt(const LinExpr& a, const LinExpr& b) { return lt(b, a); }

Expr negate(const Expr& e) {
  if (e.kind() == EK::constant) return constant(!e.value());
  if (e.kind() == EK::negation) return e.children().front();
  return node(EK::negation, {e});
}

Expr all_of(std::vector<Expr> es) {
  std::vector<Expr> out;
  for (auto& e : es) {
    if (e.is_false()) return e;
    if (e.is_true()) continue;
    if (e.kind() == EK::conjunction)
      out.insert(out.end(), e.children().begin(), e.children().end());
    else
      out.push_back(std::move(e));
  }
  if (out.empty()) return constant(true);
  if (out.size() == 1) return out.front();
  return node(EK::conjunction, std::move(out));
}

Expr any_of(std::vector<Expr> es) {
  std::vector<Expr> out;
  for (auto& e : es) {
    if (e.is_true()) return e;
    if (e.is_false()) continue;
    if (e.kind() == EK::disjunction)
      out.insert(out.end(), e.children().begin(), e.children().end());
    else
      out.push_back(std::move(e));
  }
  if (out.empty()) return constant(false);
  if (out.size() == 1) return out.front();
  return node(EK::disjunction, std::move(out));
}

Expr implies(const Expr& a, const Expr& b) { return any_of({negate(a), b}); }

Expr iff(const Expr& a, const Expr& b) { return all_of({implies(a, b), implies(b, a)}); }

bool evaluate(const Expr& e, const Model& m) {
  switch (e.kind()) {
    case EK::constant:
      return e.value();
    case EK::var:
      return m.bool_value(e.name());
    case EK::eq:
      return m.value(e.term()) == 0;
    case EK::le:
      return m.value(e.term()) <= 0;
    case EK::negation:
      return !evaluate(e.children().front(), m);
    case EK::conjunction:
      return std::all_of(e.children().begin(), e.children().end(), [&](const Expr& c) { return evaluate(c, m); });
    case EK::disjunction:
      return std::any_of(e.children().begin(), e.children().end(), [&](const Expr& c) { return evaluate(c, m); });
  }
  return false;
}

void collect_symbols(const Expr& e, Symbols& out) {
  switch (e.kind()) {
    case EK::constant:
      return;
    case EK::var:
      out.bools.insert(e.name());
      return;
    case EK::eq:
    case EK::le:
      for (const auto& kv : e.term().coeffs()) out.ints.insert(kv.first);
      return;
    default:
      for (const auto& c : e.children()) collect_symbols(c, out);
  }
}

std::size_t arithmetic_atoms(const Expr& e) {
  if (e.kind() == EK::eq || e.kind() == EK::le) return 1;
  std::size_t n = 0;
  for (const auto& c : e.children()) n += arithmetic_atoms(c);
  return n;
}

std::string smt_symbol(const std::string& name) {
  static const std::string extra = "~!@$%^&*_-+=<>.?/";
  bool simple = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
  for (char c : name)
    if (!std::isalnum(static_cast<unsigned char>(c)) && extra.find(c) == std::string::npos) simple = false;
  return simple ? name : "|" + name + "|";
}

namespace {

std::string number(Value v) { return v < 0 ? "(- " + std::to_string(-v) + ")" : std::to_string(v); }

std::string monomial(const std::string& s, Value c) {
  if (c == 1) return smt_symbol(s);
  return "(* " + number(c) + " " + smt_symbol(s) + ")";
}

std::string sum(const LinExpr& e) {
  const auto& cs = e.coeffs();
  if (cs.size() == 1) return monomial(cs.begin()->first, cs.begin()->second);
  std::string s = "(+";
  for (const auto& [sym, c] : cs) s += " " + monomial(sym, c);
  return s + ")";
}

void print(const Expr& e, std::string& out) {
  switch (e.kind()) {
    case EK::constant:
      out += e.value() ? "true" : "false";
      return;
    case EK::var:
      out += smt_symbol(e.name());
      return;
    case EK::eq:
    case EK::le:
      out += e.kind() == EK::eq ? "(= " : "(<= ";
      out += sum(e.term()) + " " + number(-e.term().constant()) + ")";
      return;
    case EK::negation:
      out += "(not ";
      print(e.children().front(), out);
      out += ")";
      return;
    case EK::conjunction:
    case EK::disjunction:
      out += e.kind() == EK::conjunction ? "(and" : "(or";
      for (const auto& c : e.children()) {
        out += " ";
        print(c, out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string to_smtlib(const LinExpr& e) {
  if (e.is_constant()) return number(e.constant());
  if (e.constant() == 0) return sum(e);
  return "(+ " + sum(e) + " " + number(e.constant()) + ")";
}

std::string to_smtlib(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace mfotl::qf
