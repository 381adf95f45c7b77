#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mfotl/core.hpp"

namespace mfotl::qf {

// Linear expression over integer symbols.
class LinExpr {
 public:
  LinExpr() = default;
  LinExpr(Value c) : constant_(c) {}  // NOLINT
  static LinExpr var(const std::string& name, Value coeff = 1);

  [[nodiscard]] const std::map<std::string, Value>& coeffs() const { return coeffs_; }
  [[nodiscard]] Value constant() const { return constant_; }
  [[nodiscard]] bool is_constant() const { return coeffs_.empty(); }

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator*=(Value c);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, LinExpr b) { return a += (b *= -1); }
  friend LinExpr operator*(Value c, LinExpr a) { return a *= c; }

  friend bool operator==(const LinExpr&, const LinExpr&) = default;

 private:
  std::map<std::string, Value> coeffs_;
  Value constant_ = 0;
};

struct Model {
  std::map<std::string, Value> ints;
  std::map<std::string, bool> bools;

  [[nodiscard]] Value int_value(const std::string& name) const;
  [[nodiscard]] bool bool_value(const std::string& name) const;
  [[nodiscard]] Value value(const LinExpr& e) const;
};

class Expr {
 public:
  enum class Kind { constant, var, eq, le, negation, conjunction, disjunction };

  [[nodiscard]] Kind kind() const { return node_->kind; }
  [[nodiscard]] bool value() const { return node_->value; }                 // constant
  [[nodiscard]] const std::string& name() const { return node_->name; }     // var
  [[nodiscard]] const LinExpr& term() const { return node_->term; }         // eq/le: term op 0
  [[nodiscard]] const std::vector<Expr>& children() const { return node_->children; }

  [[nodiscard]] bool is_true() const { return kind() == Kind::constant && value(); }
  [[nodiscard]] bool is_false() const { return kind() == Kind::constant && !value(); }

  friend bool operator==(const Expr& a, const Expr& b);

  struct Node {
    Kind kind = Kind::constant;
    bool value = true;
    std::string name;
    LinExpr term;
    std::vector<Expr> children;
  };
  explicit Expr(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

 private:
  std::shared_ptr<const Node> node_;
};

[[nodiscard]] Expr constant(bool b);
[[nodiscard]] Expr var(std::string name);
[[nodiscard]] Expr eq(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr ne(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr le(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr lt(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr ge(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr gt(const LinExpr& a, const LinExpr& b);
[[nodiscard]] Expr negate(const Expr& e);
[[nodiscard]] Expr all_of(std::vector<Expr> es);
[[nodiscard]] Expr any_of(std::vector<Expr> es);
[[nodiscard]] Expr implies(const Expr& a, const Expr& b);
[[nodiscard]] Expr iff(const Expr& a, const Expr& b);

[[nodiscard]] bool evaluate(const Expr& e, const Model& m);

struct Symbols {
  std::set<std::string> bools;
  std::set<std::string> ints;
};
void collect_symbols(const Expr& e, Symbols& out);

[[nodiscard]] std::size_t arithmetic_atoms(const Expr& e);

// SMT-LIB 2.6 rendering.
[[nodiscard]] std::string smt_symbol(const std::string& name);
[[nodiscard]] std::string to_smtlib(const LinExpr& e);
[[nodiscard]] std::string to_smtlib(const Expr& e);

}  // namespace mfotl::qf
