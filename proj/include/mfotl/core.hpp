#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mfotl {

using Value = std::int64_t;
using Time = std::int64_t;

// Closed interval [lo, hi]; hi absent means unbounded.
class Interval {
 public:
  Interval() = default;
  Interval(Time lo, std::optional<Time> hi);

  [[nodiscard]] Time lo() const { return lo_; }
  [[nodiscard]] const std::optional<Time>& hi() const { return hi_; }
  [[nodiscard]] bool contains(Time d) const { return d >= lo_ && (!hi_ || d <= *hi_); }
  [[nodiscard]] bool is_full() const { return lo_ == 0 && !hi_; }

  friend bool operator==(const Interval&, const Interval&) = default;

 private:
  Time lo_ = 0;
  std::optional<Time> hi_;
};

[[nodiscard]] std::string to_string(const Interval& i);

struct RelationDecl {
  std::string name;
  std::size_t arity = 0;
};

struct ConstantDecl {
  std::string name;
  Value value = 0;
};

class Signature {
 public:
  void add_relation(std::string name, std::size_t arity);
  void add_constant(std::string name, Value value);

  [[nodiscard]] const std::vector<RelationDecl>& relations() const { return relations_; }
  [[nodiscard]] const std::vector<ConstantDecl>& constants() const { return constants_; }
  [[nodiscard]] const RelationDecl* find_relation(std::string_view name) const;
  [[nodiscard]] std::optional<Value> find_constant(std::string_view name) const;

 private:
  std::vector<RelationDecl> relations_;
  std::vector<ConstantDecl> constants_;
};

class Term {
 public:
  enum class Kind { constant, variable, sum, scale };

  static Term constant(Value v);
  static Term variable(std::string name);
  static Term sum(Term a, Term b);
  static Term scale(Value c, Term t);

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] Value value() const;              // constant value, or scale factor
  [[nodiscard]] const std::string& name() const;  // variable
  [[nodiscard]] const Term& lhs() const;          // sum lhs, scale operand
  [[nodiscard]] const Term& rhs() const;

  [[nodiscard]] bool is_variable() const { return kind() == Kind::variable; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

[[nodiscard]] std::string to_string(const Term& t);

class Formula {
 public:
  enum class Kind {
    truth,
    falsity,
    equal,
    greater,
    atom,
    negation,
    conjunction,
    exists,
    until,
    since,
    next,
    prev,
    // sugar, removed by desugar()
    disjunction,
    implication,
    eventually,
    always,
    once,
  };

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] const std::string& relation() const;       // atom
  [[nodiscard]] const std::vector<Term>& terms() const;    // atom, equal, greater
  [[nodiscard]] const std::vector<Formula>& children() const;
  [[nodiscard]] const Formula& child(std::size_t i = 0) const { return children()[i]; }
  [[nodiscard]] const Interval& interval() const;
  [[nodiscard]] const std::vector<std::string>& variables() const;  // exists

  // exists: child(0) is the guard atom, child(1) the body
  [[nodiscard]] const Formula& guard() const { return child(0); }
  [[nodiscard]] const Formula& body() const { return child(1); }

  [[nodiscard]] bool is_temporal() const;
  [[nodiscard]] bool is_sugar() const;
  [[nodiscard]] std::size_t size() const;

  friend bool operator==(const Formula& a, const Formula& b);

  struct Node;

 private:
  friend Formula make_formula(Node n);
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Formula::Node {
  Kind kind = Kind::truth;
  std::string relation;
  std::vector<Term> terms;
  std::vector<Formula> children;
  Interval interval;
  std::vector<std::string> variables;
};

[[nodiscard]] Formula make_formula(Formula::Node n);

[[nodiscard]] Formula truth();
[[nodiscard]] Formula falsity();
[[nodiscard]] Formula equal(Term a, Term b);
[[nodiscard]] Formula greater(Term a, Term b);
[[nodiscard]] Formula atom(std::string relation, std::vector<Term> args);
[[nodiscard]] Formula neg(Formula f);
[[nodiscard]] Formula conj(Formula a, Formula b);
[[nodiscard]] Formula disj(Formula a, Formula b);
[[nodiscard]] Formula implies(Formula a, Formula b);
[[nodiscard]] Formula exists(std::vector<std::string> vars, Formula guard, Formula body);
// Stored desugared: NOT exists vars . guard AND NOT body
[[nodiscard]] Formula forall(std::vector<std::string> vars, Formula guard, Formula body);
[[nodiscard]] Formula until(Formula a, Formula b, Interval i = {});
[[nodiscard]] Formula since(Formula a, Formula b, Interval i = {});
[[nodiscard]] Formula next(Formula f, Interval i = {});
[[nodiscard]] Formula prev(Formula f, Interval i = {});
[[nodiscard]] Formula eventually(Formula f, Interval i = {});
[[nodiscard]] Formula always(Formula f, Interval i = {});
[[nodiscard]] Formula once(Formula f, Interval i = {});

// Concrete syntax accepted by parse_formula.
[[nodiscard]] std::string to_string(const Formula& f);

[[nodiscard]] Formula desugar(const Formula& f);

struct Diagnostic {
  std::string rule;  // "arity", "unguarded quantifier", "free variable", "unknown relation", ...
  std::string subformula;
  std::string message;
};

[[nodiscard]] std::vector<Diagnostic> validate(const Formula& f, const Signature& sig);
[[nodiscard]] std::vector<std::string> free_variables(const Formula& f);

// Index of the first guard argument that is exactly `var`, if any.
[[nodiscard]] std::optional<std::size_t> binding_position(const Formula& guard, const std::string& var);

struct NamedFormula {
  std::string name;
  Formula formula;
};

// Quantifier-free constraint on one object of `relation`; variables are
// `time` and `arg1`..`argN`.
struct DataConstraint {
  std::string relation;
  Formula constraint;
};

[[nodiscard]] std::vector<Diagnostic> validate(const DataConstraint& d, const Signature& sig);

using Bound = std::optional<std::uint64_t>;  // nullopt = unbounded

struct Spec {
  Signature signature;
  std::vector<NamedFormula> requirements;
  NamedFormula property{"property", truth()};
  std::vector<DataConstraint> data;
  Bound default_bound;
};

[[nodiscard]] std::vector<Diagnostic> validate(const Spec& s);

}  // namespace mfotl
