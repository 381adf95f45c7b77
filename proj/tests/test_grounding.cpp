#include "doctest.h"
#include "dcc.hpp"
#include "mfotl/fol.hpp"
#include "mfotl/grounding.hpp"
#include "mfotl/smt.hpp"
#include "random_gen.hpp"

using namespace mfotl;
using namespace mfotl::testing;
using fol::LinTerm, fol::Symbol;

namespace {

Signature access_update() {
  Signature s;
  s.add_relation("Access", 1);
  s.add_relation("Update", 1);
  return s;
}

// exists a:Access . forall u:Update . a.arg1 = u.arg1 -> a.time >= u.time + 5
fol::Formula exp_f() {
  fol::ObjectVar a{1, "Access"}, u{2, "Update"};
  auto same = fol::compare(LinTerm(Symbol::arg_of(1, 0)), "=", LinTerm(Symbol::arg_of(2, 0)));
  auto later = fol::compare(LinTerm(Symbol::time_of(1)), ">=", LinTerm(Symbol::time_of(2)) + 5);
  auto differ = fol::compare(LinTerm(Symbol::arg_of(1, 0)), "!=", LinTerm(Symbol::arg_of(2, 0)));
  return fol::exists_obj(a, fol::forall_obj(u, fol::any_of({differ, later})));
}

qf::Expr pin(const GroundObject& o, const TimedAtom& a) {
  std::vector<qf::Expr> cs{qf::var(o.presence()), qf::eq(qf::LinExpr::var(o.time()), a.time)};
  for (std::size_t k = 0; k < a.atom.args.size(); ++k) cs.push_back(qf::eq(qf::LinExpr::var(o.arg(k)), a.atom.args[k]));
  return qf::all_of(std::move(cs));
}

// One domain object per atom of t, fixed to that atom.
std::vector<int> pinned_domain(GroundingSession& s, const Trace& t, std::vector<GroundAssertion>& pins) {
  std::vector<int> dom;
  for (const auto& a : t.atoms()) {
    const GroundObject& o = s.make_object(a.atom.relation);
    pins.push_back({pin(o, a), "domain"});
    dom.push_back(o.id);
  }
  return dom;
}

bool mentions(const qf::Expr& e, const std::string& sym) {
  qf::Symbols s;
  qf::collect_symbols(e, s);
  return s.bools.count(sym) || s.ints.count(sym);
}

smt::Solver& shared_solver() {
  static smt::Solver s;
  return s;
}

}  // namespace

TEST_CASE("existentials create fresh objects, universals range over the domain") {
  Signature sig = access_update();
  GroundingSession s(sig);
  int u1 = s.make_object("Update").id;
  int u2 = s.make_object("Update").id;
  GroundedQuery q = ground(s, exp_f(), {u1, u2});
  REQUIRE(q.new_objects.size() == 1);
  const GroundObject& a = s.object(q.new_objects[0]);
  CHECK(a.cls == "Access");
  qf::Expr f = q.formula();
  CHECK(mentions(f, a.presence()));
  CHECK(mentions(f, s.object(u1).presence()));
  CHECK(mentions(f, s.object(u2).presence()));

  // The fresh access must precede neither update with its argument.
  qf::Expr setup = qf::all_of({pin(s.object(u1), at(10, "Update", {3})), pin(s.object(u2), at(4, "Update", {3}))});
  GroundedQuery bad = q;
  bad.assertions.push_back({setup, "domain"});
  bad.assertions.push_back({qf::eq(qf::LinExpr::var(a.arg(0)), 3), "t"});
  bad.assertions.push_back({qf::le(qf::LinExpr::var(a.time()), 14), "t"});
  CHECK(std::holds_alternative<smt::Unsat>(smt::solve(shared_solver(), s, bad, {})));
  bad.assertions.pop_back();
  CHECK(std::holds_alternative<smt::Sat>(smt::solve(shared_solver(), s, bad, {})));
}

TEST_CASE("trivial groundings") {
  Signature sig = access_update();
  GroundingSession s(sig);
  int u1 = s.make_object("Update").id;
  GroundedQuery t = ground(s, fol::top(), {u1});
  CHECK(t.new_objects.empty());
  CHECK(t.formula().is_true());
  fol::Formula body = fol::compare(LinTerm(Symbol::time_of(2)), "<=", LinTerm(-1));
  GroundedQuery empty = ground(s, fol::forall_obj({2, "Update"}, body), {});
  CHECK(empty.formula().is_true());
  GroundedQuery one = ground(s, fol::forall_obj({2, "Update"}, body), {u1});
  CHECK_FALSE(one.formula().is_true());
  // No existentials: the under-approximation adds nothing.
  CHECK(under_approx(s, fol::forall_obj({2, "Update"}, body), {u1}).assertions.size() == one.assertions.size());
}

TEST_CASE("NoNewR maps new objects onto same-class domain objects") {
  Signature sig = access_update();
  GroundingSession s(sig);
  int u1 = s.make_object("Update").id;
  int u2 = s.make_object("Update").id;
  int a1 = s.make_object("Access").id;
  GroundedQuery q = under_approx(s, exp_f(), {u1, u2, a1});
  REQUIRE(q.new_objects.size() == 1);
  const GroundObject& a2 = s.object(q.new_objects[0]);
  CHECK(a2.cls == "Access");
  CHECK(a2.id != a1);
  q.assertions.push_back({pin(s.object(a1), at(7, "Access", {2})), "domain"});
  q.assertions.push_back({qf::negate(qf::var(s.object(u1).presence())), "domain"});
  q.assertions.push_back({qf::negate(qf::var(s.object(u2).presence())), "domain"});
  smt::SolveResult r = smt::solve(shared_solver(), s, q, {});
  REQUIRE(std::holds_alternative<smt::Sat>(r));
  const qf::Model& m = std::get<smt::Sat>(r).model;
  CHECK(m.int_value(a2.time()) == 7);
  CHECK(m.int_value(a2.arg(0)) == 2);
  CHECK(m.bool_value(a2.presence()));
}

TEST_CASE("NoNewR without a same-class domain member is unsatisfiable") {
  Signature sig = access_update();
  GroundingSession s(sig);
  int u1 = s.make_object("Update").id;
  int u2 = s.make_object("Update").id;
  CHECK(std::holds_alternative<smt::Unsat>(smt::solve(shared_solver(), s, under_approx(s, exp_f(), {u1, u2}), {})));
  CHECK(std::holds_alternative<smt::Sat>(smt::solve(shared_solver(), s, ground(s, exp_f(), {u1, u2}), {})));
}

TEST_CASE("fresh names are memoized per session") {
  Signature sig = access_update();
  GroundingSession s(sig);
  int u1 = s.make_object("Update").id;
  GroundedQuery a = ground(s, exp_f(), {u1});
  GroundedQuery b = ground(s, exp_f(), {u1});
  CHECK(a.new_objects == b.new_objects);
  CHECK(qf::to_smtlib(a.formula()) == qf::to_smtlib(b.formula()));
  CHECK(s.object(a.new_objects[0]).name.rfind("Access#", 0) == 0);
}

TEST_CASE("growing the domain only adds assertions") {
  Rng rng(41);
  SpecShape shape;
  for (int n = 0; n < 100; ++n) {
    Signature sig = random_signature(rng, shape);
    fol::Translator tr(sig);
    fol::Formula f = tr.translate_top(random_formula(rng, sig, 3, 2));
    GroundingSession s(sig);
    std::vector<int> dom;
    for (const auto& r : sig.relations()) dom.push_back(s.make_object(r.name).id);
    Grounder g(s);
    g.add_domain_object(dom[0]);
    g.add_root(f, "f");
    std::vector<std::string> before;
    for (const auto& a : g.assertions()) before.push_back(qf::to_smtlib(a.expr));
    for (std::size_t i = 1; i < dom.size(); ++i) g.add_domain_object(dom[i]);
    std::vector<int> created = g.created();
    if (!created.empty()) g.add_domain_object(created[0]);
    REQUIRE(g.assertions().size() >= before.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(qf::to_smtlib(g.assertions()[i].expr) == before[i]);
  }
}

TEST_CASE("grounding over a pinned trace agrees with the evaluator") {
  Rng rng(7);
  SpecShape shape;
  int sat = 0, total = 0;
  for (int n = 0; n < 250; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula phi = random_formula(rng, sig, 3, 2);
    Trace t = random_trace(rng, sig, 4, 2, 6);
    fol::Translator tr(sig);
    fol::Formula f = tr.translate_top(phi);
    GroundingSession s(sig);
    std::vector<GroundAssertion> pins;
    std::vector<int> dom = pinned_domain(s, t, pins);
    GroundedQuery under = under_approx(s, f, dom);
    GroundedQuery over = ground(s, f, dom);
    under.assertions.insert(under.assertions.end(), pins.begin(), pins.end());
    over.assertions.insert(over.assertions.end(), pins.begin(), pins.end());

    bool expect = satisfies(t, phi);
    smt::SolveResult ru = smt::solve(shared_solver(), s, under, {});
    REQUIRE_FALSE(std::holds_alternative<smt::Unknown>(ru));
    bool got = std::holds_alternative<smt::Sat>(ru);
    CHECK_MESSAGE(got == expect, to_string(phi), " on ", to_string(t));
    if (got) {
      Trace decoded = smt::decode_trace(std::get<smt::Sat>(ru).model, s, under.objects());
      CHECK(decoded == t);
    }
    // The over-approximation never rejects a true instance.
    if (expect) CHECK(std::holds_alternative<smt::Sat>(smt::solve(shared_solver(), s, over, {})));
    sat += expect;
    ++total;
  }
  CHECK(sat > total / 10);
  CHECK(sat < total - total / 10);
}

TEST_CASE("under-approximation implies the over-approximation") {
  Rng rng(13);
  SpecShape shape;
  for (int n = 0; n < 120; ++n) {
    Signature sig = random_signature(rng, shape);
    fol::Translator tr(sig);
    fol::Formula f = tr.translate_top(random_formula(rng, sig, 3, 2));
    GroundingSession s(sig);
    std::vector<int> small, big;
    for (const auto& r : sig.relations()) {
      small.push_back(s.make_object(r.name).id);
      big.push_back(small.back());
      big.push_back(s.make_object(r.name).id);
    }
    GroundedQuery u = under_approx(s, f, big);
    GroundedQuery o = ground(s, f, small);
    u.assertions.push_back({qf::negate(o.formula()), "negated"});
    for (int id : o.new_objects) u.new_objects.push_back(id);
    CHECK(std::holds_alternative<smt::Unsat>(smt::solve(shared_solver(), s, u, {})));
  }
}

TEST_CASE("req0 and its primed variant ground to an unsatisfiable query") {
  Spec spec = load_spec(fixture("dcc_req0_prime.spec"));
  fol::Translator tr(spec.signature);
  fol::Formula f = fol::all_of({fol::simplify(tr.translate(spec.property.formula, LinTerm(0), false)),
                                tr.translate_top(spec.requirements[0].formula)});
  GroundingSession s(spec.signature);
  Grounder g(s);
  g.add_root(f, "q");
  for (int id : std::vector<int>(g.created())) g.add_domain_object(id);
  GroundedQuery q{g.assertions(), g.domain(), g.new_objects()};
  CHECK(std::holds_alternative<smt::Unsat>(smt::solve(shared_solver(), s, q, spec.data)));
}
