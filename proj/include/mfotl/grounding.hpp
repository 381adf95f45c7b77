#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mfotl/core.hpp"
#include "mfotl/fol.hpp"
#include "mfotl/qf.hpp"

namespace mfotl {

// A symbolic relational object: presence flag, time and argument integers.
struct GroundObject {
  int id = 0;
  std::string cls;
  std::size_t arity = 0;
  std::string name;  // <class>#<n>

  [[nodiscard]] std::string presence() const { return name + ".p"; }
  [[nodiscard]] std::string time() const { return name + ".time"; }
  [[nodiscard]] std::string arg(std::size_t k) const { return name + ".arg" + std::to_string(k + 1); }
};

// Owns object identities and memoized fresh names. Grounding the same
// quantifier under the same bindings always yields the same symbols.
class GroundingSession {
 public:
  explicit GroundingSession(const Signature& sig) : sig_(sig) {}

  const GroundObject& make_object(const std::string& cls);
  [[nodiscard]] const GroundObject& object(int id) const { return objects_.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t object_count() const { return objects_.size(); }
  [[nodiscard]] const Signature& signature() const { return sig_; }

  int object_for(const std::string& key, const std::string& cls);
  std::string position_for(const std::string& key);
  std::string literal_for(const std::string& key);

 private:
  const Signature& sig_;
  std::deque<GroundObject> objects_;
  std::map<std::string, int> class_counter_;
  std::map<std::string, int> object_memo_;
  std::map<std::string, std::string> name_memo_;
  int positions_ = 0;
  int literals_ = 0;
};

[[nodiscard]] qf::Expr same_atom(const GroundObject& a, const GroundObject& b);
// Target present and componentwise equal.
[[nodiscard]] qf::Expr match(const GroundObject& n, const GroundObject& target);
[[nodiscard]] qf::Expr no_new_r(const GroundingSession& s, int object, const std::vector<int>& domain);
// 0/1 integer that is 1 iff o is present and no earlier object among
// `earlier` denotes the same atom; the sum over all objects is the volume.
[[nodiscard]] std::string volume_var(const GroundObject& o);
[[nodiscard]] qf::Expr volume_indicator(const GroundingSession& s, int object, const std::vector<int>& earlier);
// time >= 0, and data constraints whenever present.
[[nodiscard]] qf::Expr object_axioms(const GroundObject& o, const std::vector<DataConstraint>& data);

struct GroundAssertion {
  qf::Expr expr;
  std::string provenance;
};

// Incremental grounder: roots are grounded once; universal quantifiers are
// kept as contexts and receive one new instance per promoted domain object.
class Grounder {
 public:
  explicit Grounder(GroundingSession& s) : s_(s) {}

  void add_root(const fol::Formula& f, const std::string& provenance);
  void add_domain_object(int id);

  [[nodiscard]] const std::vector<int>& domain() const { return domain_; }
  [[nodiscard]] bool in_domain(int id) const { return domain_set_.count(id) > 0; }
  [[nodiscard]] const std::vector<int>& created() const { return created_; }
  [[nodiscard]] std::vector<int> new_objects() const;
  [[nodiscard]] std::vector<int> objects() const;  // domain, then new objects
  [[nodiscard]] const std::vector<GroundAssertion>& assertions() const { return assertions_; }
  [[nodiscard]] GroundingSession& session() { return s_; }

 private:
  struct Env {
    std::map<int, int> objects;
    std::map<int, qf::LinExpr> positions;
    std::string key;
  };

  struct Context {
    fol::Formula node;
    Env env;
    std::optional<std::string> guard;
    std::string provenance;
    std::set<int> done;
  };

  void root(const fol::Formula& f, const Env& env, const std::string& prov);
  qf::Expr expr(const fol::Formula& f, const Env& env, const std::string& prov);
  qf::LinExpr term(const fol::LinTerm& t, const Env& env) const;
  int fresh_object(const fol::Formula& q, const Env& env);
  std::string fresh_position(const fol::Formula& q, const Env& env);
  qf::Expr anchor(const fol::Formula& q, const Env& env, const std::string& u);
  void open_context(const fol::Formula& q, const Env& env, std::optional<std::string> guard, const std::string& prov);
  void instantiate(std::size_t ctx, std::optional<int> object);
  void emit(qf::Expr e, const std::string& prov);
  void note_created(int id);

  GroundingSession& s_;
  std::vector<int> domain_;
  std::set<int> domain_set_;
  std::vector<int> created_;
  std::set<int> created_set_;
  std::deque<Context> contexts_;
  std::vector<GroundAssertion> assertions_;
};

struct GroundedQuery {
  std::vector<GroundAssertion> assertions;
  std::vector<int> domain;
  std::vector<int> new_objects;

  [[nodiscard]] qf::Expr formula() const;
  [[nodiscard]] std::vector<int> objects() const;
};

[[nodiscard]] GroundedQuery ground(GroundingSession& s, const fol::Formula& f, const std::vector<int>& domain);
// ground() plus NoNewR for every new object.
[[nodiscard]] GroundedQuery under_approx(GroundingSession& s, const fol::Formula& f, const std::vector<int>& domain);

}  // namespace mfotl
