#pragma once

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mfotl/core.hpp"

namespace mfotl::fol {

// An object attribute (time or argument k) or a position variable.
struct Symbol {
  enum class Kind { attribute, position };
  static constexpr int time_attr = -1;

  Kind kind = Kind::attribute;
  int var = 0;                // object or position variable id
  int attr = time_attr;       // attribute only: time_attr or argument index (0-based)

  static Symbol time_of(int obj) { return {Kind::attribute, obj, time_attr}; }
  static Symbol arg_of(int obj, int k) { return {Kind::attribute, obj, k}; }
  static Symbol position(int id) { return {Kind::position, id, 0}; }

  [[nodiscard]] bool is_time_like() const { return kind == Kind::position || attr == time_attr; }

  auto operator<=>(const Symbol&) const = default;
};

class LinTerm {
 public:
  LinTerm() = default;
  LinTerm(Value c) : constant_(c) {}  // NOLINT: implicit from integer
  LinTerm(Symbol s) { coeffs_[s] = 1; }  // NOLINT

  [[nodiscard]] const std::map<Symbol, Value>& coeffs() const { return coeffs_; }
  [[nodiscard]] Value constant() const { return constant_; }
  [[nodiscard]] bool is_constant() const { return coeffs_.empty(); }
  [[nodiscard]] bool mentions(int var) const;

  LinTerm& operator+=(const LinTerm& o);
  LinTerm& operator*=(Value c);
  friend LinTerm operator+(LinTerm a, const LinTerm& b) { return a += b; }
  friend LinTerm operator-(LinTerm a, LinTerm b) { return a += (b *= -1); }
  friend LinTerm operator*(Value c, LinTerm a) { return a *= c; }

  [[nodiscard]] LinTerm substitute(const Symbol& s, const LinTerm& by) const;

  friend bool operator==(const LinTerm&, const LinTerm&) = default;

 private:
  std::map<Symbol, Value> coeffs_;
  Value constant_ = 0;
};

struct ObjectVar {
  int id = 0;
  std::string cls;
  friend bool operator==(const ObjectVar&, const ObjectVar&) = default;
};

enum class Cmp { eq, ne, le, ge };

class Formula {
 public:
  enum class Kind { truth, falsity, compare, conjunction, disjunction, exists_obj, forall_obj, exists_pos, forall_pos };

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] Cmp op() const;
  [[nodiscard]] const LinTerm& term() const;  // compare: term op 0
  [[nodiscard]] const std::vector<Formula>& children() const;
  [[nodiscard]] const Formula& body() const { return children().front(); }
  [[nodiscard]] const ObjectVar& object() const;  // object quantifiers
  [[nodiscard]] int position() const;             // position quantifiers: variable id

  [[nodiscard]] bool is_quantifier() const;
  [[nodiscard]] bool mentions(int var) const;

  friend bool operator==(const Formula& a, const Formula& b);

  struct Node {
    Kind kind = Kind::truth;
    Cmp op = Cmp::eq;
    LinTerm term;
    std::vector<Formula> children;
    ObjectVar object;
    int position = -1;
  };

  explicit Formula(Node n) : node_(std::make_shared<const Node>(std::move(n))) {}

 private:
  std::shared_ptr<const Node> node_;
};

[[nodiscard]] Formula top();
[[nodiscard]] Formula bottom();
// Normalized: integers, so < and > become <= and >= with shifted constants.
[[nodiscard]] Formula compare(LinTerm lhs, std::string_view op, LinTerm rhs);
[[nodiscard]] Formula all_of(std::vector<Formula> fs);
[[nodiscard]] Formula any_of(std::vector<Formula> fs);
[[nodiscard]] Formula exists_obj(ObjectVar o, Formula body);
[[nodiscard]] Formula forall_obj(ObjectVar o, Formula body);
[[nodiscard]] Formula exists_pos(int u, Formula body);
[[nodiscard]] Formula forall_pos(int u, Formula body);

[[nodiscard]] Formula substitute(const Formula& f, const Symbol& s, const LinTerm& by);

// Sound simplifications: constant folding and elimination of position
// quantifiers pinned to an object time.
[[nodiscard]] Formula simplify(const Formula& f);

// True when every model of f has a present object at time u.
[[nodiscard]] bool forces_position(const Formula& f, int u);

[[nodiscard]] std::size_t size(const Formula& f);
[[nodiscard]] int quantifier_depth(const Formula& f);
[[nodiscard]] bool has_position_quantifier(const Formula& f);

// S-expression debug syntax, stable across runs.
[[nodiscard]] std::string to_string(const Formula& f);
[[nodiscard]] std::string to_string(const LinTerm& t);

class Translator {
 public:
  explicit Translator(const Signature& sig) : sig_(sig) {}

  // Desugars, then translates in negation normal form; `positive` false
  // translates the negation of phi.
  [[nodiscard]] Formula translate(const mfotl::Formula& phi, const LinTerm& at, bool positive = true);
  // At time 0, simplified.
  [[nodiscard]] Formula translate_top(const mfotl::Formula& phi);

 private:
  using Env = std::map<std::string, LinTerm>;

  Formula go(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env);
  Formula atom_at(const mfotl::Formula& a, const LinTerm& at, bool pos, const Env& env);
  Formula exists_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env);
  Formula until_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env);
  Formula since_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env);
  Formula step_at(const mfotl::Formula& f, const LinTerm& at, bool pos, const Env& env, bool forward);
  Formula gap(const LinTerm& lo, const LinTerm& hi, bool none_between);

  LinTerm term(const Term& t, const Env& env) const;
  static std::vector<Formula> interval_holds(const LinTerm& d, const Interval& i);
  static Formula interval_fails(const LinTerm& d, const Interval& i);

  const Signature& sig_;
  int next_var_ = 0;
};

}  // namespace mfotl::fol
