#include <functional>

#include "doctest.h"
#include "dcc.hpp"
#include "mfotl/fol.hpp"
#include "random_gen.hpp"

using namespace mfotl;
using namespace mfotl::testing;
using FK = fol::Formula::Kind;

namespace {

Signature unary_ab() {
  Signature s;
  s.add_relation("A", 1);
  s.add_relation("B", 1);
  return s;
}

std::size_t count_kind(const fol::Formula& f, FK k) {
  std::size_t n = f.kind() == k;
  for (const auto& c : f.children()) n += count_kind(c, k);
  return n;
}

}  // namespace

TEST_CASE("linear terms") {
  using fol::LinTerm, fol::Symbol;
  LinTerm t = LinTerm(Symbol::time_of(1)) - LinTerm(Symbol::time_of(2)) + 5;
  CHECK(t.constant() == 5);
  CHECK(t.coeffs().size() == 2);
  CHECK((t - t).is_constant());
  CHECK(t.mentions(1));
  CHECK_FALSE(t.mentions(3));
  LinTerm s = t.substitute(Symbol::time_of(2), LinTerm(Symbol::time_of(1)));
  CHECK(s.is_constant());
  CHECK(s.constant() == 5);
  CHECK((3 * t).constant() == 15);
}

TEST_CASE("comparisons fold and normalize") {
  using fol::LinTerm, fol::Symbol;
  CHECK(fol::simplify(fol::compare(LinTerm(3), "<", LinTerm(4))).kind() == FK::truth);
  CHECK(fol::simplify(fol::compare(LinTerm(4), "<", LinTerm(4))).kind() == FK::falsity);
  auto x = LinTerm(Symbol::arg_of(0, 0));
  auto y = LinTerm(Symbol::arg_of(1, 0));
  CHECK(fol::compare(x, "=", y) == fol::compare(y, "=", x));
  CHECK(fol::compare(x, "<", y) == fol::compare(x + 1, "<=", y));
  CHECK(fol::all_of({}).kind() == FK::truth);
  CHECK(fol::any_of({}).kind() == FK::falsity);
  CHECK(fol::simplify(fol::all_of({fol::top(), fol::bottom()})).kind() == FK::falsity);
}

TEST_CASE("atoms become object quantifiers") {
  Signature sig = dcc_strong().signature;
  fol::Translator tr(sig);
  Formula a = atom("Access", {Term::constant(1), Term::constant(2)});
  fol::Formula pos = tr.translate(a, fol::LinTerm(5));
  REQUIRE(pos.kind() == FK::exists_obj);
  CHECK(pos.object().cls == "Access");
  CHECK(count_kind(pos.body(), FK::compare) == 3);
  fol::Formula negative = tr.translate(a, fol::LinTerm(5), false);
  REQUIRE(negative.kind() == FK::forall_obj);
  CHECK(negative.body().kind() == FK::disjunction);
  CHECK(tr.translate(truth(), fol::LinTerm(0)).kind() == FK::truth);
  CHECK(tr.translate_top(falsity()).kind() == FK::falsity);
}

TEST_CASE("eventually under always collapses to object quantifiers") {
  Signature sig = unary_ab();
  fol::Translator tr(sig);
  auto d = Term::variable("d");
  Formula f = always(forall({"d"}, atom("A", {d}), eventually(atom("B", {d}), Interval(5, 10))));
  fol::Formula t = tr.translate_top(f);
  REQUIRE(t.kind() == FK::forall_obj);
  CHECK(t.object().cls == "A");
  REQUIRE(t.body().kind() == FK::exists_obj);
  CHECK(t.body().object().cls == "B");
  CHECK_FALSE(fol::has_position_quantifier(t));
  CHECK(fol::quantifier_depth(t) == 2);
}

TEST_CASE("req0 translates to access-collect form") {
  fol::Translator tr(dcc_strong().signature);
  fol::Formula t = tr.translate_top(dcc_req("req0"));
  REQUIRE(t.kind() == FK::forall_obj);
  CHECK(t.object().cls == "Access");
  REQUIRE(t.body().kind() == FK::exists_obj);
  CHECK(t.body().object().cls == "Collect");
  CHECK_FALSE(fol::has_position_quantifier(t));
  std::string s = fol::to_string(t);
  CHECK(s.find("360") != std::string::npos);
}

TEST_CASE("only object and position quantifiers appear") {
  Rng rng(17);
  SpecShape shape;
  for (int n = 0; n < 300; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 3, 2);
    fol::Translator tr(sig);
    fol::Formula t = tr.translate_top(f);
    std::function<void(const fol::Formula&)> walk = [&](const fol::Formula& g) {
      if (g.is_quantifier()) {
        bool obj = g.kind() == FK::exists_obj || g.kind() == FK::forall_obj;
        if (obj) CHECK(sig.find_relation(g.object().cls) != nullptr);
      }
      for (const auto& c : g.children()) walk(c);
    };
    walk(t);
  }
}

TEST_CASE("translation is linear in the formula size") {
  Rng rng(23);
  SpecShape shape;
  double worst = 0;
  for (int n = 0; n < 400; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 5, 2);
    fol::Translator tr(sig);
    std::size_t out = fol::size(tr.translate(f, fol::LinTerm(0)));
    worst = std::max(worst, static_cast<double>(out) / static_cast<double>(desugar(f).size()));
  }
  CHECK(worst <= 12.0);
}

TEST_CASE("translation is deterministic") {
  for (const auto& r : dcc_strong().requirements) {
    fol::Translator a(dcc_strong().signature), b(dcc_strong().signature);
    CHECK(fol::to_string(a.translate_top(r.formula)) == fol::to_string(b.translate_top(r.formula)));
  }
}

TEST_CASE("simplify is idempotent") {
  Rng rng(29);
  SpecShape shape;
  for (int n = 0; n < 300; ++n) {
    Signature sig = random_signature(rng, shape);
    fol::Translator tr(sig);
    fol::Formula t = tr.translate_top(random_formula(rng, sig, 3, 2));
    CHECK(fol::simplify(t) == t);
  }
}

TEST_CASE("position forcing") {
  using fol::LinTerm, fol::Symbol;
  fol::ObjectVar o{1, "A"};
  fol::Formula pinned = fol::exists_obj(o, fol::compare(LinTerm(Symbol::time_of(1)), "=", LinTerm(Symbol::position(7))));
  CHECK(fol::forces_position(pinned, 7));
  CHECK_FALSE(fol::forces_position(pinned, 8));
  CHECK_FALSE(fol::forces_position(fol::any_of({pinned, fol::compare(LinTerm(Symbol::position(7)), "=", LinTerm(0))}), 7));
}
