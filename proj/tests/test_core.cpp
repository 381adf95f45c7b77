#include <functional>

#include "doctest.h"
#include "dcc.hpp"
#include "mfotl/core.hpp"
#include "random_gen.hpp"

using namespace mfotl;
using namespace mfotl::testing;

namespace {

bool has_rule(const std::vector<Diagnostic>& ds, const std::string& rule) {
  for (const auto& d : ds)
    if (d.rule == rule) return true;
  return false;
}

Signature dcc_sig() { return dcc_strong().signature; }

}  // namespace

TEST_CASE("interval membership and printing") {
  Interval i(5, 10);
  CHECK(i.contains(5));
  CHECK(i.contains(10));
  CHECK_FALSE(i.contains(11));
  CHECK_FALSE(i.contains(4));
  Interval u(360, std::nullopt);
  CHECK(u.contains(1000000));
  CHECK_FALSE(u.contains(359));
  CHECK(Interval().is_full());
  CHECK(to_string(i) == "[5,10]");
  CHECK(to_string(u) == "[360,)");
  CHECK_THROWS_AS(Interval(4, 3), std::invalid_argument);
  CHECK_THROWS_AS(Interval(-1, 3), std::invalid_argument);
  CHECK_NOTHROW(Interval(3, 3));
}

TEST_CASE("signature rejects duplicates and nullary relations") {
  Signature s;
  s.add_relation("Collect", 2);
  s.add_constant("WEEK", 168);
  CHECK(s.find_relation("Collect")->arity == 2);
  CHECK(s.find_constant("WEEK") == 168);
  CHECK_FALSE(s.find_relation("Access"));
  CHECK_THROWS_AS(s.add_relation("Collect", 1), std::invalid_argument);
  CHECK_THROWS_AS(s.add_relation("Empty", 0), std::invalid_argument);
  CHECK_THROWS_AS(s.add_constant("WEEK", 1), std::invalid_argument);
}

TEST_CASE("validate reports free variables") {
  Signature sig = dcc_sig();
  auto x = Term::variable("x"), d = Term::variable("d");
  Formula f = exists({"x"}, atom("Collect", {d, x}), greater(x, Term::constant(0)));
  auto ds = validate(f, sig);
  REQUIRE(ds.size() == 1);
  CHECK(ds[0].rule == "free variable");
  CHECK(ds[0].message == "free variable d");
}

TEST_CASE("validate rejects unguarded quantifiers") {
  Signature sig = dcc_sig();
  auto x = Term::variable("x");
  CHECK(has_rule(validate(exists({"x"}, greater(x, Term::constant(0)), truth()), sig), "unguarded quantifier"));
  // bound variable must occur as a bare guard argument
  CHECK(has_rule(validate(exists({"x"}, atom("Collect", {Term::constant(0), Term::constant(1)}), truth()), sig),
                 "unguarded quantifier"));
}

TEST_CASE("validate reports arity and unknown relations") {
  Signature sig = dcc_sig();
  CHECK(has_rule(validate(atom("Access", {Term::constant(1)}), sig), "arity"));
  CHECK(has_rule(validate(atom("Delete", {Term::constant(1)}), sig), "unknown relation"));
}

TEST_CASE("the policy formulas validate") {
  Signature sig = dcc_sig();
  for (const auto& r : dcc_strong().requirements) CHECK(validate(r.formula, sig).empty());
  CHECK(validate(dcc_p1(), sig).empty());
  CHECK(validate(dcc_strong()).empty());
}

TEST_CASE("desugar maps derived operators onto the core") {
  auto b = atom("B", {Term::variable("d")});
  Interval i(5, 10);
  CHECK(desugar(eventually(b, i)) == until(truth(), b, i));
  CHECK(desugar(once(b, i)) == since(truth(), b, i));
  CHECK(desugar(always(b, i)) == neg(until(truth(), neg(b), i)));
  CHECK(desugar(disj(b, truth())) == neg(conj(neg(b), neg(truth()))));
  CHECK(desugar(truth()) == truth());
  Formula fa = forall({"d"}, atom("A", {Term::variable("d")}), eventually(b, i));
  Formula core = desugar(fa);
  CHECK_FALSE(core.is_sugar());
  CHECK(core.kind() == Formula::Kind::negation);
  CHECK(core.child().kind() == Formula::Kind::exists);
}

TEST_CASE("desugar is idempotent and removes all sugar") {
  Rng rng(7);
  SpecShape shape;
  for (int n = 0; n < 300; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 4, 2);
    Formula d = desugar(f);
    CHECK(desugar(d) == d);
    std::function<bool(const Formula&)> clean = [&](const Formula& g) {
      if (g.is_sugar()) return false;
      for (const auto& c : g.children())
        if (!clean(c)) return false;
      return true;
    };
    CHECK(clean(d));
    CHECK(validate(d, sig).empty());
  }
}

TEST_CASE("free variables and binding positions") {
  auto d = Term::variable("d"), v = Term::variable("v");
  Formula g = atom("Collect", {d, v});
  CHECK(binding_position(g, "v") == 1);
  CHECK(binding_position(g, "d") == 0);
  CHECK_FALSE(binding_position(g, "w"));
  Formula f = exists({"v"}, g, equal(v, Term::constant(3)));
  CHECK(free_variables(f) == std::vector<std::string>{"d"});
  CHECK(free_variables(exists({"d"}, atom("Access", {d, Term::constant(0)}), f)).empty());
}

TEST_CASE("data constraints may only mention the object's attributes") {
  Signature sig = dcc_sig();
  DataConstraint ok{"Collect", conj(greater(Term::variable("time"), Term::constant(-1)),
                                    equal(Term::variable("arg2"), Term::constant(0)))};
  CHECK(validate(ok, sig).empty());
  DataConstraint bad{"Collect", equal(Term::variable("arg3"), Term::constant(0))};
  CHECK(has_rule(validate(bad, sig), "data constraint"));
  DataConstraint unknown{"Delete", truth()};
  CHECK(has_rule(validate(unknown, sig), "unknown relation"));
}

TEST_CASE("formulas are immutable values with structural equality") {
  auto a = atom("A", {Term::constant(1)});
  Formula f = conj(a, neg(a));
  Formula g = conj(atom("A", {Term::constant(1)}), neg(atom("A", {Term::constant(1)})));
  CHECK(f == g);
  CHECK_FALSE(f == conj(a, a));
  CHECK(f.size() == 4);
}
