#include <sys/resource.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfotl/fol.hpp"
#include "mfotl/grounding.hpp"
#include "mfotl/json_io.hpp"
#include "mfotl/oracle.hpp"
#include "mfotl/parser.hpp"
#include "mfotl/search.hpp"

#ifndef MFOTL_FIXTURES
#define MFOTL_FIXTURES "fixtures"
#endif

using nlohmann::json;
using namespace mfotl;

namespace {

enum Exit { exit_sat = 10, exit_unsat = 20, exit_bounded = 30, exit_usage = 1, exit_inconclusive = 2 };

struct CheckFlags {
  std::string spec;
  std::string bound;
  std::string mode = "optimal";
  std::string solver;
  unsigned seed = 0;
  double timeout = 60;
  std::string format = "json";
  bool verbose = false;
  bool no_prove_unsat = false;
  std::size_t max_iterations = 10000;
  std::string dump_smt;
};

Bound parse_bound(const std::string& s, const Spec& spec) {
  if (s.empty()) return spec.default_bound;
  if (s == "unbounded" || s == "inf") return std::nullopt;
  std::size_t used = 0;
  unsigned long long v = std::stoull(s, &used);
  if (used != s.size()) throw CLI::ValidationError("--bound", "expected a natural number or 'unbounded'");
  return v;
}

std::pair<Value, Value> parse_range(const std::string& s) {
  auto dots = s.find("..");
  if (dots == std::string::npos) throw CLI::ValidationError("range", "expected LO..HI, got " + s);
  return {std::stoll(s.substr(0, dots)), std::stoll(s.substr(dots + 2))};
}

long peak_rss_kb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss;
}

smt::Options solver_options(const CheckFlags& f) {
  smt::Options o;
  o.solver = smt::find_solver(f.solver);
  o.seed = f.seed;
  o.timeout = std::chrono::milliseconds(static_cast<long long>(f.timeout * 1000));
  o.transcript_path = f.dump_smt;
  return o;
}

int exit_code(const Verdict& v) {
  if (std::holds_alternative<Sat>(v)) return exit_sat;
  if (std::holds_alternative<Unsat>(v)) return exit_unsat;
  return exit_bounded;
}

json verdict_json(const Verdict& v) {
  json j{{"verdict", verdict_name(v)}};
  if (auto* s = std::get_if<Sat>(&v)) {
    j["volume"] = s->volume;
    j["trace"] = to_json(s->trace);
  } else if (auto* b = std::get_if<BoundedUnsat>(&v)) {
    j["bound"] = b->bound;
    j["min_volume_lower_bound"] = b->min_volume_lower_bound;
  }
  return j;
}

json report_json(const SearchResult& r, const Bound& bound, const std::string& mode) {
  json j = verdict_json(r.verdict);
  j["mode"] = mode;
  j["bound"] = bound ? json(*bound) : json("unbounded");
  j["stats"] = {{"iterations", r.stats.iterations},   {"queries", r.stats.queries},
                {"lessons", r.stats.lessons},         {"domain_sizes", r.stats.domain_sizes},
                {"sigma_min", r.stats.sigma_min},     {"objects", r.stats.objects},
                {"domain_size", r.stats.domain_sizes.empty() ? 0 : r.stats.domain_sizes.back()}};
  j["timing"] = {{"wall_ms", r.stats.wall.count()}, {"peak_rss_kb", peak_rss_kb()}};
  return j;
}

void print_text(const Verdict& v) {
  std::cout << verdict_name(v);
  if (auto* s = std::get_if<Sat>(&v)) std::cout << " volume " << s->volume << "\n" << to_string(s->trace);
  if (auto* b = std::get_if<BoundedUnsat>(&v))
    std::cout << " bound " << b->bound << " min_volume_lower_bound " << b->min_volume_lower_bound;
  std::cout << "\n";
}

SearchResult run_search(const Spec& spec, const Bound& bound, const CheckFlags& f) {
  SearchOptions o;
  o.mode = f.mode == "greedy" ? SearchMode::greedy : SearchMode::optimal;
  o.max_iterations = f.max_iterations;
  if (f.no_prove_unsat) o.prove_unsat_iterations = 0;
  o.solver = solver_options(f);
  if (f.verbose) {
    o.progress = [](const IterationReport& r) {
      std::cerr << "iter " << r.iteration << " domain " << r.domain_size << " reqs " << r.active_requirements
                << " sigma_min " << (r.sigma_min ? std::to_string(*r.sigma_min) : "-") << " " << r.event << "\n";
    };
  }
  return check(spec, bound, o);
}

int cmd_check(const CheckFlags& f) {
  Spec spec = load_spec(f.spec);
  Bound bound = parse_bound(f.bound, spec);
  SearchResult r = run_search(spec, bound, f);
  if (f.format == "text") {
    print_text(r.verdict);
    std::cout << "iterations " << r.stats.iterations << " queries " << r.stats.queries << " wall_ms "
              << r.stats.wall.count() << "\n";
  } else {
    std::cout << report_json(r, bound, f.mode).dump(2) << "\n";
  }
  return exit_code(r.verdict);
}

int cmd_translate(const std::string& path) {
  Spec spec = load_spec(path);
  fol::Translator tr(spec.signature);
  std::cout << "; " << spec.property.name << " (negated)\n"
            << fol::to_string(fol::simplify(tr.translate(spec.property.formula, fol::LinTerm(0), false))) << "\n";
  for (const auto& r : spec.requirements) std::cout << "; " << r.name << "\n" << fol::to_string(tr.translate_top(r.formula)) << "\n";
  return 0;
}

// Grounds the negated property and all requirements over a domain fixed to
// the atoms of a trace, and prints the SMT-LIB script.
int cmd_ground(const std::string& path, const std::string& domain_path, bool under) {
  Spec spec = load_spec(path);
  std::ifstream in(domain_path);
  if (!in) throw std::runtime_error("cannot open " + domain_path);
  std::stringstream ss;
  ss << in.rdbuf();
  Trace t = parse_trace_json(ss.str());

  GroundingSession session(spec.signature);
  std::vector<qf::Expr> pins;
  std::vector<int> domain;
  for (const auto& a : t.atoms()) {
    const GroundObject& o = session.make_object(a.atom.relation);
    if (o.arity != a.atom.args.size()) throw std::runtime_error("arity mismatch in domain trace: " + to_string(a.atom));
    std::vector<qf::Expr> cs{qf::var(o.presence()), qf::eq(qf::LinExpr::var(o.time()), a.time)};
    for (std::size_t k = 0; k < o.arity; ++k) cs.push_back(qf::eq(qf::LinExpr::var(o.arg(k)), a.atom.args[k]));
    pins.push_back(qf::all_of(std::move(cs)));
    domain.push_back(o.id);
  }
  fol::Translator tr(spec.signature);
  std::vector<fol::Formula> fs{fol::simplify(tr.translate(spec.property.formula, fol::LinTerm(0), false))};
  for (const auto& r : spec.requirements) fs.push_back(tr.translate_top(r.formula));
  GroundedQuery q = under ? under_approx(session, fol::all_of(fs), domain) : ground(session, fol::all_of(fs), domain);
  for (auto& p : pins) q.assertions.insert(q.assertions.begin(), {p, "domain"});
  std::cout << smt::script(session, q, spec.data);
  return 0;
}

int cmd_oracle(const std::string& path, const EnumerationBudget& b, unsigned threads, std::optional<std::size_t> n,
               const CheckFlags& f) {
  Spec spec = load_spec(path);
  json j;
  if (n) {
    NbscResult r = nbsc(spec, *n, solver_options(f));
    j = verdict_json(r.verdict);
    j["n"] = *n;
    j["depth"] = r.depth;
    j["atoms"] = r.atoms;
    j["objects"] = r.objects;
    std::cout << j.dump(2) << "\n";
    return exit_code(r.verdict);
  }
  EnumerationResult r = enumerate_check(spec, b, threads);
  Verdict v = r.witness ? Verdict(Sat{*r.witness, volume(*r.witness)}) : Verdict(Unsat{});
  j = verdict_json(v);
  j["within_budget"] = {{"max_volume", b.max_volume},
                        {"values", {b.value_lo, b.value_hi}},
                        {"times", {b.time_lo, b.time_hi}}};
  j["checked"] = r.checked;
  std::cout << j.dump(2) << "\n";
  return exit_code(v);
}

int cmd_bench(const std::string& dir, CheckFlags f) {
  struct Case {
    std::string file;
    Bound bound;
    std::string expect;
  };
  const std::vector<Case> cases{{"dcc_p1_weak.spec", 10, "sat"},
                                {"dcc_p1_strong.spec", 10, "unsat"},
                                {"dcc_p1_reqs12.spec", 4, "sat"},
                                {"dcc_p1_reqs12.spec", 2, "bounded-unsat"},
                                {"dcc_req0_prime.spec", 10, "unsat"}};
  json rows = json::array();
  bool ok = true;
  for (const auto& c : cases) {
    Spec spec = load_spec(dir + "/" + c.file);
    SearchResult r = run_search(spec, c.bound, f);
    json row = report_json(r, c.bound, f.mode);
    row["file"] = c.file;
    row["expected"] = c.expect;
    ok = ok && verdict_name(r.verdict) == c.expect;
    if (f.format == "text") {
      std::cout << c.file << " bound " << (c.bound ? std::to_string(*c.bound) : "unbounded") << ": ";
      print_text(r.verdict);
      std::cout << "  iterations " << r.stats.iterations << " wall_ms " << r.stats.wall.count() << "\n";
    }
    rows.push_back(row);
  }
  if (f.format != "text") std::cout << rows.dump(2) << "\n";
  return ok ? 0 : exit_usage;
}

void print_parse_error(const ParseError& e) {
  std::cerr << to_string(e.span()) << ": error: " << e.message() << "\n";
  if (!e.expected().empty()) {
    std::cerr << "  expected one of:";
    for (const auto& x : e.expected()) std::cerr << " " << x;
    std::cerr << "\n";
  }
  for (const auto& d : e.diagnostics()) std::cerr << "  " << d.rule << ": " << d.message << " in " << d.subformula << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bounded satisfiability checker for metric first-order temporal logic"};
  app.require_subcommand(1);
  CheckFlags f;

  auto add_solver_flags = [&](CLI::App* c) {
    c->add_option("--solver", f.solver, "SMT solver command (default: $MFOTL_BSC_SOLVER, then z3 on PATH)");
    c->add_option("--seed", f.seed, "solver random seed")->capture_default_str();
    c->add_option("--timeout", f.timeout, "per-query timeout in seconds")->capture_default_str();
    c->add_option("--dump-smt", f.dump_smt, "write the SMT-LIB transcript to this file");
  };
  auto add_search_flags = [&](CLI::App* c) {
    c->add_option("--bound", f.bound, "volume bound: N or 'unbounded' (default: the spec's bound)");
    c->add_option("--mode", f.mode, "optimal or greedy")
        ->check(CLI::IsMember({"optimal", "greedy"}))
        ->capture_default_str();
    c->add_option("--format", f.format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    c->add_flag("--verbose", f.verbose, "per-iteration progress on stderr");
    c->add_flag("--no-prove-unsat", f.no_prove_unsat, "return bounded-unsat as soon as the bound is exceeded");
    c->add_option("--max-iterations", f.max_iterations, "iteration ceiling")->capture_default_str();
    add_solver_flags(c);
  };

  auto* check_cmd = app.add_subcommand("check", "search for a minimal counterexample");
  check_cmd->add_option("spec", f.spec, "spec file")->required();
  add_search_flags(check_cmd);

  std::string path;
  auto* translate_cmd = app.add_subcommand("translate", "print the first-order translation");
  translate_cmd->add_option("spec", path, "spec file")->required();

  std::string domain_path;
  bool under = false;
  auto* ground_cmd = app.add_subcommand("ground", "print the grounded SMT-LIB query over a fixed domain");
  ground_cmd->add_option("spec", path, "spec file")->required();
  ground_cmd->add_option("--domain", domain_path, "trace JSON whose atoms form the domain")->required();
  ground_cmd->add_flag("--under", under, "add NoNewR (under-approximation)");

  EnumerationBudget budget;
  std::string values = "0..2", times = "0..6";
  unsigned threads = 1;
  std::optional<std::size_t> nbsc_n;
  auto* oracle_cmd = app.add_subcommand("oracle", "exhaustive enumeration (or naive grounding with --nbsc)");
  oracle_cmd->add_option("spec", path, "spec file")->required();
  oracle_cmd->add_option("--max-volume", budget.max_volume, "largest trace volume")->capture_default_str();
  oracle_cmd->add_option("--values", values, "argument range LO..HI")->capture_default_str();
  oracle_cmd->add_option("--times", times, "timestamp range LO..HI")->capture_default_str();
  oracle_cmd->add_option("--threads", threads, "worker threads")->capture_default_str();
  oracle_cmd->add_option("--nbsc", nbsc_n, "run the naive procedure with N objects per relation instead");
  add_solver_flags(oracle_cmd);

  std::string fixtures = MFOTL_FIXTURES;
  std::string bench_name;
  auto* bench_cmd = app.add_subcommand("bench", "run the built-in benchmark fixtures");
  bench_cmd->add_option("name", bench_name, "benchmark set")->required()->check(CLI::IsMember({"dcc"}));
  bench_cmd->add_option("--fixtures", fixtures, "fixture directory")->capture_default_str();
  add_search_flags(bench_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : exit_usage;
  }

  try {
    if (*check_cmd) return cmd_check(f);
    if (*translate_cmd) return cmd_translate(path);
    if (*ground_cmd) return cmd_ground(path, domain_path, under);
    if (*oracle_cmd) {
      std::tie(budget.value_lo, budget.value_hi) = parse_range(values);
      std::tie(budget.time_lo, budget.time_hi) = parse_range(times);
      return cmd_oracle(path, budget, threads, nbsc_n, f);
    }
    if (*bench_cmd) return cmd_bench(fixtures, f);
  } catch (const ParseError& e) {
    print_parse_error(e);
    return exit_usage;
  } catch (const InconclusiveError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return exit_inconclusive;
  } catch (const smt::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return exit_inconclusive;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::logic_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  }
  return exit_usage;
}
