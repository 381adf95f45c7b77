#pragma once

#include <chrono>
#include <deque>
#include <fstream>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "mfotl/grounding.hpp"
#include "mfotl/qf.hpp"
#include "mfotl/trace.hpp"

namespace mfotl::smt {

struct Options {
  std::string solver;  // command line; empty = discover
  unsigned seed = 0;
  std::chrono::milliseconds timeout{60000};
  std::string transcript_path;  // full SMT-LIB log when non-empty
};

// Explicit path, else $MFOTL_BSC_SOLVER, else z3 on PATH.
[[nodiscard]] std::string find_solver(const std::string& explicit_path = "");

// Protocol desync or unusable solver; carries the transcript tail.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::string transcript)
      : std::runtime_error(what + "\n--- transcript tail ---\n" + transcript), transcript_(std::move(transcript)) {}
  [[nodiscard]] const std::string& transcript() const { return transcript_; }

 private:
  std::string transcript_;
};

struct Sat {
  qf::Model model;
};
struct Unsat {
  std::vector<std::string> core;
};
struct Unknown {
  std::string reason;
};
using SolveResult = std::variant<Sat, Unsat, Unknown>;

// One solver subprocess speaking SMT-LIB 2.6 over pipes.
class Solver {
 public:
  explicit Solver(Options opts = {});
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  void declare_bool(const std::string& name);
  void declare_int(const std::string& name);
  // Declares any new symbols, then asserts.
  void add(const qf::Expr& e);
  void push();
  void pop();

  // Model values cover every declared symbol.
  SolveResult check(const std::vector<std::string>& assumptions = {});

  [[nodiscard]] std::size_t queries() const { return queries_; }
  [[nodiscard]] std::size_t depth() const { return scopes_.size() - 1; }
  [[nodiscard]] std::string transcript_tail() const;

 private:
  void send(const std::string& cmd);
  std::string receive();
  qf::Model fetch_model();
  std::vector<std::string> fetch_core();
  std::string reason_unknown();
  void kill_child();

  Options opts_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  bool alive_ = false;
  std::string buffer_;
  std::vector<std::vector<std::pair<std::string, bool>>> scopes_;  // (symbol, is_int)
  std::set<std::string> declared_;
  std::size_t queries_ = 0;
  std::deque<std::string> tail_;
  std::ofstream transcript_;
};

// Asserts the query plus per-object data constraints inside a push/pop
// scope. Assumptions are (label, definition) pairs.
[[nodiscard]] SolveResult solve(Solver& solver, const GroundingSession& session, const GroundedQuery& query,
                                const std::vector<DataConstraint>& data,
                                const std::vector<std::pair<std::string, qf::Expr>>& assumptions = {});

// Present objects become atoms, grouped by time.
[[nodiscard]] Trace decode_trace(const qf::Model& m, const GroundingSession& session, const std::vector<int>& objects);

// Stand-alone SMT-LIB script for a query.
[[nodiscard]] std::string script(const GroundingSession& session, const GroundedQuery& query,
                                 const std::vector<DataConstraint>& data);

// Minimal s-expression reader used for solver responses.
struct SExpr {
  std::string atom;
  std::vector<SExpr> list;
  bool is_list = false;

  [[nodiscard]] std::string str() const;
};
[[nodiscard]] std::vector<SExpr> parse_sexprs(const std::string& text);

}  // namespace mfotl::smt
