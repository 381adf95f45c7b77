#include "doctest.h"
#include "dcc.hpp"
#include "mfotl/json_io.hpp"
#include "mfotl/trace.hpp"
#include "naive_eval.hpp"
#include "random_gen.hpp"

using namespace mfotl;
using namespace mfotl::testing;

TEST_CASE("trace construction validates timestamps and normalizes atoms") {
  CHECK_THROWS_AS(Trace({{3, {}}, {3, {}}}), std::invalid_argument);
  CHECK_THROWS_AS(Trace({{4, {}}, {3, {}}}), std::invalid_argument);
  CHECK_THROWS_AS(Trace(std::vector<Position>{{-1, {}}}), std::invalid_argument);
  Trace t(std::vector<Position>{{0, {{"B", {1}}, {"A", {2}}, {"B", {1}}}}});
  REQUIRE(t.positions()[0].atoms.size() == 2);
  CHECK(t.positions()[0].atoms[0].relation == "A");
  CHECK(t.canonical());
  CHECK_FALSE(Trace(std::vector<Position>{{0, {}}}).canonical());
}

TEST_CASE("from_atoms groups by time") {
  Trace s4 = sigma4();
  REQUIRE(s4.length() == 2);
  CHECK(s4.positions()[0].time == 0);
  CHECK(s4.positions()[0].atoms.size() == 2);
  CHECK(s4.positions()[1].time == 2);
}

TEST_CASE("volume counts atoms") {
  CHECK(volume(sigma4()) == 3);
  CHECK(volume(sigma2()) == 3);
  CHECK(volume(Trace{}) == 0);
  CHECK(volume(trace_of({at(0, "A", {1}), at(0, "A", {1})})) == 1);
}

TEST_CASE("volume is invariant under time translation") {
  Rng rng(3);
  Signature sig;
  sig.add_relation("A", 2);
  sig.add_relation("B", 1);
  for (int n = 0; n < 100; ++n) {
    Trace t = random_trace(rng, sig, 6, 3, 10);
    std::vector<TimedAtom> shifted = t.atoms();
    for (auto& a : shifted) a.time += 17;
    CHECK(volume(Trace::from_atoms(shifted)) == volume(t));
  }
}

TEST_CASE("anchoring prepends an empty time-0 position") {
  Trace t = trace_of({at(5, "A", {1})});
  Trace a = anchored(t);
  REQUIRE(a.length() == 2);
  CHECK(a.positions()[0].time == 0);
  CHECK(a.positions()[0].atoms.empty());
  CHECK(anchored(sigma1()) == sigma1());
  CHECK(anchored(Trace{}).length() == 1);
}

TEST_CASE("policy examples") {
  CHECK(satisfies(sigma1(), dcc_req("req0")));
  CHECK(satisfies(sigma2(), neg(dcc_p1())));
  CHECK(satisfies(sigma2(), dcc_req("req0")));
  CHECK(satisfies(Trace{}, truth()));
  CHECK(evaluate(sigma2(), truth(), {}, 2));

  std::vector<Formula> r12{dcc_req("req1"), dcc_req("req2")};
  CHECK(check_requirements(sigma3(), r12) == 1u);
  CHECK(check_requirements(sigma4(), r12) == 0u);
  CHECK_FALSE(check_requirements(sigma5(), r12).has_value());
  CHECK(satisfies(sigma5(), neg(dcc_p1())));
}

TEST_CASE("sigma_2 as drawn violates the recency requirement") {
  // The last write of value 0 is 361 hours before the access.
  CHECK_FALSE(satisfies(sigma2(), dcc_req("req2")));
}

TEST_CASE("evaluation boundaries") {
  Signature sig;
  sig.add_relation("A", 1);
  Trace t = trace_of({at(0, "A", {1}), at(4, "A", {2})});
  auto a = [](Value v) { return atom("A", {Term::constant(v)}); };
  CHECK(evaluate(t, next(a(2), Interval(4, 4)), {}, 0));
  CHECK_FALSE(evaluate(t, next(a(2), Interval(0, 3)), {}, 0));
  CHECK_FALSE(evaluate(t, next(truth()), {}, 1));
  CHECK_FALSE(evaluate(t, prev(truth()), {}, 0));
  CHECK(evaluate(t, prev(a(1)), {}, 1));
  CHECK_FALSE(evaluate(t, eventually(a(3)), {}, 0));
  CHECK(evaluate(t, always(truth()), {}, 0));
  CHECK(evaluate(t, once(a(1), Interval(4, 4)), {}, 1));
  CHECK_FALSE(evaluate(t, once(a(1), Interval(5, std::nullopt)), {}, 1));
  CHECK_THROWS_AS((void)evaluate(t, truth(), {}, 2), std::out_of_range);
  CHECK_THROWS_AS((void)evaluate(t, atom("A", {Term::variable("x")}), {}, 0), std::invalid_argument);
}

TEST_CASE("data constraints") {
  std::vector<DataConstraint> data{{"A", neg(greater(Term::variable("arg1"), Term::constant(2)))}};
  CHECK(satisfies_data(GroundAtom{"A", {2}}, 0, data));
  CHECK_FALSE(satisfies_data(GroundAtom{"A", {3}}, 0, data));
  CHECK(satisfies_data(GroundAtom{"B", {3}}, 0, data));
  CHECK_FALSE(satisfies_data(trace_of({at(0, "A", {1}), at(1, "A", {5})}), data));
}

TEST_CASE("trace JSON round trip") {
  Trace t = sigma4();
  nlohmann::json j = to_json(t);
  CHECK(j["positions"][0]["time"] == 0);
  CHECK(j["positions"][1]["atoms"][0]["rel"] == "Access");
  CHECK(trace_from_json(j) == t);
  CHECK(parse_trace_json(R"({"positions":[{"time":0,"atoms":[{"rel":"Collect","args":[1,0]}]}]})") ==
        trace_of({at(0, "Collect", {1, 0})}));
  CHECK_THROWS((void)parse_trace_json(R"({"positions":[{"time":3,"atoms":[]},{"time":1,"atoms":[]}]})"));
}

TEST_CASE("evaluator agrees with the naive oracle") {
  Rng rng(2024);
  SpecShape shape;
  int agree = 0;
  for (int n = 0; n < 1000; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 3, 3);
    Trace t = random_trace(rng, sig, 6, 3, 10);
    bool lib = satisfies(t, f);
    bool ref = naive_satisfies(t, f);
    CHECK_MESSAGE(lib == ref, to_string(f), " on ", to_string(t));
    agree += lib == ref;
  }
  CHECK(agree == 1000);
}

TEST_CASE("sugar and its expansion evaluate alike") {
  Rng rng(99);
  SpecShape shape;
  for (int n = 0; n < 300; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 3, 3);
    Formula d = desugar(f);
    for (int k = 0; k < 5; ++k) {
      Trace t = random_trace(rng, sig, 5, 3, 10);
      Trace a = anchored(t);
      for (std::size_t i = 0; i < a.length(); ++i) CHECK(evaluate(a, f, {}, i) == evaluate(a, d, {}, i));
    }
  }
}

TEST_CASE("contradictions never hold") {
  Rng rng(5);
  SpecShape shape;
  for (int n = 0; n < 300; ++n) {
    Signature sig = random_signature(rng, shape);
    Formula f = random_formula(rng, sig, 3, 3);
    Trace t = random_trace(rng, sig, 5, 3, 10);
    CHECK_FALSE(satisfies(t, conj(f, neg(f))));
  }
}
