#include "mfotl/smt.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

namespace mfotl::smt {

std::string find_solver(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv("MFOTL_BSC_SOLVER"); env && *env) return env;
  if (const char* path = std::getenv("PATH")) {
    std::stringstream ss(path);
    std::string dir;
    while (std::getline(ss, dir, ':')) {
      std::string candidate = (dir.empty() ? "." : dir) + "/z3";
      struct stat st {};
      if (::stat(candidate.c_str(), &st) == 0 && (st.st_mode & S_IXUSR)) return candidate;
    }
  }
  throw std::runtime_error("no SMT solver found: pass --solver or set MFOTL_BSC_SOLVER");
}

// ---------------------------------------------------------------- s-expressions

std::string SExpr::str() const {
  if (!is_list) return atom;
  std::string s = "(";
  for (std::size_t i = 0; i < list.size(); ++i) s += (i ? " " : "") + list[i].str();
  return s + ")";
}

namespace {

// Length of the first complete item in `s` (after leading whitespace), or npos.
std::size_t complete_item(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  if (i == s.size()) return std::string::npos;
  if (s[i] != '(') {
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return i < s.size() ? i : std::string::npos;
  }
  int depth = 0;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c == '|') {
      i = s.find('|', i + 1);
      if (i == std::string::npos) return i;
    } else if (c == '"') {
      for (++i; i < s.size(); ++i) {
        if (s[i] == '"') {
          if (i + 1 < s.size() && s[i + 1] == '"')
            ++i;
          else
            break;
        }
      }
      if (i >= s.size()) return std::string::npos;
    } else if (c == '(') {
      ++depth;
    } else if (c == ')') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

struct Reader {
  const std::string& s;
  std::size_t i = 0;

  void ws() {
    for (;;) {
      while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
      if (i >= s.size() || s[i] != ';') return;
      while (i < s.size() && s[i] != '\n') ++i;
    }
  }

  SExpr item() {
    ws();
    if (i >= s.size()) throw std::runtime_error("unexpected end of s-expression");
    SExpr e;
    if (s[i] == '(') {
      e.is_list = true;
      ++i;
      for (;;) {
        ws();
        if (i >= s.size()) throw std::runtime_error("unbalanced s-expression");
        if (s[i] == ')') {
          ++i;
          return e;
        }
        e.list.push_back(item());
      }
    }
    if (s[i] == ')') throw std::runtime_error("unexpected ')'");
    if (s[i] == '|') {
      std::size_t j = s.find('|', i + 1);
      if (j == std::string::npos) throw std::runtime_error("unterminated quoted symbol");
      e.atom = s.substr(i + 1, j - i - 1);
      i = j + 1;
      return e;
    }
    if (s[i] == '"') {
      std::size_t j = i + 1;
      std::string v;
      for (; j < s.size(); ++j) {
        if (s[j] == '"') {
          if (j + 1 < s.size() && s[j + 1] == '"') {
            v += '"';
            ++j;
            continue;
          }
          break;
        }
        v += s[j];
      }
      e.atom = v;
      i = j + 1;
      return e;
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) && s[j] != '(' && s[j] != ')') ++j;
    e.atom = s.substr(i, j - i);
    i = j;
    return e;
  }
};

}  // namespace

std::vector<SExpr> parse_sexprs(const std::string& text) {
  Reader r{text};
  std::vector<SExpr> out;
  for (;;) {
    r.ws();
    if (r.i >= text.size()) return out;
    out.push_back(r.item());
  }
}

// ---------------------------------------------------------------- process

namespace {

std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::stringstream ss(cmd);
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

bool looks_like_z3(const std::string& path) {
  auto slash = path.find_last_of('/');
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  return base.find("z3") != std::string::npos;
}

}  // namespace

Solver::Solver(Options opts) : opts_(std::move(opts)), scopes_(1) {
  ::signal(SIGPIPE, SIG_IGN);
  std::vector<std::string> argv = split_command(find_solver(opts_.solver));
  if (argv.empty()) throw std::runtime_error("empty solver command");
  if (argv.size() == 1 && looks_like_z3(argv[0])) {
    argv.push_back("-in");
    argv.push_back("-smt2");
    argv.push_back("-t:" + std::to_string(opts_.timeout.count()));
  }
  if (!opts_.transcript_path.empty()) transcript_.open(opts_.transcript_path);

  int in_pipe[2], out_pipe[2];
  if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0) throw std::runtime_error("pipe failed");
  pid_ = ::fork();
  if (pid_ < 0) throw std::runtime_error("fork failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(out_pipe[1], 2);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    std::vector<char*> args;
    for (auto& a : argv) args.push_back(a.data());
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  alive_ = true;

  send("(set-option :print-success false)");
  send("(set-option :produce-models true)");
  send("(set-option :produce-unsat-cores true)");
  send("(set-option :random-seed " + std::to_string(opts_.seed) + ")");
  send("(set-logic QF_LIA)");
  send("(echo \"ready\")");
  std::string r = receive();
  if (r != "\"ready\"" && r != "ready") throw SolverError("solver did not start (got '" + r + "')", transcript_tail());
}

Solver::~Solver() {
  if (alive_) {
    const char* bye = "(exit)\n";
    [[maybe_unused]] auto n = ::write(to_child_, bye, std::strlen(bye));
  }
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) return;
      ::usleep(2000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

void Solver::kill_child() {
  if (pid_ > 0 && alive_) ::kill(pid_, SIGKILL);
  alive_ = false;
}

std::string Solver::transcript_tail() const {
  std::string s;
  for (const auto& l : tail_) s += l + "\n";
  return s;
}

void Solver::send(const std::string& cmd) {
  if (!alive_) throw SolverError("solver process is not running", transcript_tail());
  tail_.push_back("> " + cmd.substr(0, 400));
  while (tail_.size() > 40) tail_.pop_front();
  if (transcript_.is_open()) transcript_ << cmd << "\n";
  std::string line = cmd + "\n";
  std::size_t off = 0;
  while (off < line.size()) {
    ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      alive_ = false;
      throw SolverError("solver pipe closed", transcript_tail());
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string Solver::receive() {
  auto deadline = std::chrono::steady_clock::now() + opts_.timeout + std::chrono::seconds(10);
  for (;;) {
    std::size_t len = complete_item(buffer_);
    if (len != std::string::npos) {
      std::string item = buffer_.substr(0, len);
      buffer_.erase(0, len);
      auto b = item.find_first_not_of(" \t\r\n");
      item = b == std::string::npos ? "" : item.substr(b);
      tail_.push_back("< " + item.substr(0, 400));
      while (tail_.size() > 40) tail_.pop_front();
      if (transcript_.is_open()) {
        std::string commented = "; " + item;
        for (std::size_t k = commented.find('\n'); k != std::string::npos; k = commented.find('\n', k + 3))
          commented.replace(k, 1, "\n; ");
        transcript_ << commented << "\n";
      }
      return item;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      kill_child();
      return "timeout";
    }
    pollfd p{from_child_, POLLIN, 0};
    int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) continue;
    char chunk[65536];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      // EOF: flush a trailing atom without newline, else report a crash.
      if (!buffer_.empty() && buffer_.find_first_not_of(" \t\r\n") != std::string::npos) {
        buffer_ += "\n";
        continue;
      }
      alive_ = false;
      return "crashed";
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void Solver::declare_bool(const std::string& name) {
  if (!declared_.insert(name).second) return;
  scopes_.back().push_back({name, false});
  send("(declare-const " + qf::smt_symbol(name) + " Bool)");
}

void Solver::declare_int(const std::string& name) {
  if (!declared_.insert(name).second) return;
  scopes_.back().push_back({name, true});
  send("(declare-const " + qf::smt_symbol(name) + " Int)");
}

void Solver::add(const qf::Expr& e) {
  qf::Symbols syms;
  qf::collect_symbols(e, syms);
  for (const auto& b : syms.bools) declare_bool(b);
  for (const auto& i : syms.ints) declare_int(i);
  send("(assert " + qf::to_smtlib(e) + ")");
}

void Solver::push() {
  scopes_.emplace_back();
  send("(push 1)");
}

void Solver::pop() {
  if (scopes_.size() <= 1) throw std::logic_error("pop on empty assertion stack");
  for (const auto& [name, is_int] : scopes_.back()) declared_.erase(name);
  scopes_.pop_back();
  send("(pop 1)");
}

SolveResult Solver::check(const std::vector<std::string>& assumptions) {
  for (const auto& a : assumptions) declare_bool(a);
  std::string cmd;
  if (assumptions.empty()) {
    cmd = "(check-sat)";
  } else {
    cmd = "(check-sat-assuming (";
    for (std::size_t i = 0; i < assumptions.size(); ++i) cmd += (i ? " " : "") + qf::smt_symbol(assumptions[i]);
    cmd += "))";
  }
  ++queries_;
  send(cmd);
  std::string r = receive();
  if (r == "sat") return Sat{fetch_model()};
  if (r == "unsat") return Unsat{assumptions.empty() ? std::vector<std::string>{} : fetch_core()};
  if (r == "unknown") return Unknown{reason_unknown()};
  if (r == "timeout") return Unknown{"timeout (no answer within the per-query limit)"};
  if (r == "crashed") return Unknown{"solver process exited: " + transcript_tail()};
  throw SolverError("unexpected solver response to " + cmd.substr(0, 60) + ": " + r.substr(0, 400), transcript_tail());
}

qf::Model Solver::fetch_model() {
  std::vector<std::pair<std::string, bool>> syms;
  for (const auto& scope : scopes_) syms.insert(syms.end(), scope.begin(), scope.end());
  qf::Model m;
  const std::size_t chunk = 400;
  for (std::size_t i = 0; i < syms.size(); i += chunk) {
    std::string cmd = "(get-value (";
    for (std::size_t j = i; j < std::min(syms.size(), i + chunk); ++j)
      cmd += (j > i ? " " : "") + qf::smt_symbol(syms[j].first);
    cmd += "))";
    send(cmd);
    std::string r = receive();
    std::vector<SExpr> parsed;
    try {
      parsed = parse_sexprs(r);
    } catch (const std::exception& e) {
      throw SolverError(std::string("malformed get-value response: ") + e.what(), transcript_tail());
    }
    if (parsed.size() != 1 || !parsed[0].is_list) throw SolverError("malformed get-value response: " + r.substr(0, 200), transcript_tail());
    for (const auto& pair : parsed[0].list) {
      if (!pair.is_list || pair.list.size() != 2 || pair.list[0].is_list)
        throw SolverError("malformed get-value entry: " + pair.str(), transcript_tail());
      const std::string& name = pair.list[0].atom;
      const SExpr& v = pair.list[1];
      if (!v.is_list && (v.atom == "true" || v.atom == "false")) {
        m.bools[name] = v.atom == "true";
      } else if (!v.is_list) {
        m.ints[name] = std::stoll(v.atom);
      } else if (v.list.size() == 2 && v.list[0].atom == "-") {
        m.ints[name] = -std::stoll(v.list[1].atom);
      } else {
        throw SolverError("unsupported model value: " + v.str(), transcript_tail());
      }
    }
  }
  return m;
}

std::vector<std::string> Solver::fetch_core() {
  send("(get-unsat-core)");
  std::string r = receive();
  auto parsed = parse_sexprs(r);
  if (parsed.size() != 1 || !parsed[0].is_list) throw SolverError("malformed unsat core: " + r, transcript_tail());
  std::vector<std::string> core;
  for (const auto& e : parsed[0].list) core.push_back(e.atom);
  return core;
}

std::string Solver::reason_unknown() {
  send("(get-info :reason-unknown)");
  std::string r = receive();
  auto parsed = parse_sexprs(r);
  if (!parsed.empty() && parsed[0].is_list && parsed[0].list.size() == 2) return parsed[0].list[1].str();
  return r;
}

// ---------------------------------------------------------------- helpers

SolveResult solve(Solver& solver, const GroundingSession& session, const GroundedQuery& query,
                  const std::vector<DataConstraint>& data,
                  const std::vector<std::pair<std::string, qf::Expr>>& assumptions) {
  solver.push();
  for (int id : query.objects()) {
    const GroundObject& o = session.object(id);
    solver.declare_bool(o.presence());
    solver.declare_int(o.time());
    for (std::size_t k = 0; k < o.arity; ++k) solver.declare_int(o.arg(k));
    solver.add(object_axioms(o, data));
  }
  for (const auto& a : query.assertions) solver.add(a.expr);
  std::vector<std::string> labels;
  for (const auto& [label, def] : assumptions) {
    solver.declare_bool(label);
    solver.add(qf::implies(qf::var(label), def));
    labels.push_back(label);
  }
  SolveResult r = solver.check(labels);
  solver.pop();
  return r;
}

Trace decode_trace(const qf::Model& m, const GroundingSession& session, const std::vector<int>& objects) {
  std::vector<TimedAtom> atoms;
  for (int id : objects) {
    const GroundObject& o = session.object(id);
    if (!m.bool_value(o.presence())) continue;
    GroundAtom a{o.cls, {}};
    for (std::size_t k = 0; k < o.arity; ++k) a.args.push_back(m.int_value(o.arg(k)));
    atoms.push_back({m.int_value(o.time()), std::move(a)});
  }
  return Trace::from_atoms(std::move(atoms));
}

std::string script(const GroundingSession& session, const GroundedQuery& query, const std::vector<DataConstraint>& data) {
  std::vector<std::pair<qf::Expr, std::string>> body;
  for (int id : query.objects()) body.push_back({object_axioms(session.object(id), data), "object " + session.object(id).name});
  for (const auto& a : query.assertions) body.push_back({a.expr, a.provenance});

  qf::Symbols syms;
  for (int id : query.objects()) {
    const GroundObject& o = session.object(id);
    syms.bools.insert(o.presence());
    syms.ints.insert(o.time());
    for (std::size_t k = 0; k < o.arity; ++k) syms.ints.insert(o.arg(k));
  }
  for (const auto& [e, _] : body) qf::collect_symbols(e, syms);

  std::string out = "(set-logic QF_LIA)\n";
  for (const auto& b : syms.bools) out += "(declare-const " + qf::smt_symbol(b) + " Bool)\n";
  for (const auto& i : syms.ints) out += "(declare-const " + qf::smt_symbol(i) + " Int)\n";
  for (const auto& [e, prov] : body) out += "; " + prov + "\n(assert " + qf::to_smtlib(e) + ")\n";
  out += "(check-sat)\n";
  return out;
}

}  // namespace mfotl::smt
