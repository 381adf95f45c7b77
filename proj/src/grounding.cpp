#include "mfotl/grounding.hpp"

#include <stdexcept>

namespace mfotl {

const GroundObject& GroundingSession::make_object(const std::string& cls) {
  const RelationDecl* r = sig_.find_relation(cls);
  if (!r) throw std::invalid_argument("unknown relation class " + cls);
  int n = ++class_counter_[cls];
  objects_.push_back({static_cast<int>(objects_.size()), cls, r->arity, cls + "#" + std::to_string(n)});
  return objects_.back();
}

int GroundingSession::object_for(const std::string& key, const std::string& cls) {
  auto it = object_memo_.find(key);
  if (it != object_memo_.end()) return it->second;
  int id = make_object(cls).id;
  object_memo_.emplace(key, id);
  return id;
}

std::string GroundingSession::position_for(const std::string& key) {
  auto [it, fresh] = name_memo_.try_emplace("t|" + key);
  if (fresh) it->second = "pos#" + std::to_string(++positions_);
  return it->second;
}

std::string GroundingSession::literal_for(const std::string& key) {
  auto [it, fresh] = name_memo_.try_emplace("l|" + key);
  if (fresh) it->second = "ctx#" + std::to_string(++literals_);
  return it->second;
}

qf::Expr same_atom(const GroundObject& a, const GroundObject& b) {
  std::vector<qf::Expr> cs{qf::eq(qf::LinExpr::var(a.time()), qf::LinExpr::var(b.time()))};
  for (std::size_t k = 0; k < a.arity; ++k) cs.push_back(qf::eq(qf::LinExpr::var(a.arg(k)), qf::LinExpr::var(b.arg(k))));
  return qf::all_of(std::move(cs));
}

qf::Expr match(const GroundObject& n, const GroundObject& target) {
  return qf::all_of({qf::var(target.presence()), same_atom(n, target)});
}

qf::Expr no_new_r(const GroundingSession& s, int object, const std::vector<int>& domain) {
  const GroundObject& n = s.object(object);
  std::vector<qf::Expr> options;
  for (int d : domain) {
    const GroundObject& r = s.object(d);
    if (r.cls == n.cls && r.id != n.id) options.push_back(match(n, r));
  }
  return qf::implies(qf::var(n.presence()), qf::any_of(std::move(options)));
}

std::string volume_var(const GroundObject& o) { return "vol#" + o.name; }

qf::Expr volume_indicator(const GroundingSession& s, int object, const std::vector<int>& earlier) {
  const GroundObject& o = s.object(object);
  std::vector<qf::Expr> dup;
  for (int e : earlier) {
    const GroundObject& r = s.object(e);
    if (r.cls == o.cls && r.id != o.id) dup.push_back(match(o, r));
  }
  qf::LinExpr v = qf::LinExpr::var(volume_var(o));
  qf::Expr counts = qf::all_of({qf::var(o.presence()), qf::negate(qf::any_of(std::move(dup)))});
  return qf::all_of({qf::ge(v, 0), qf::le(v, 1), qf::iff(qf::eq(v, 1), counts)});
}

namespace {

using MK = Formula::Kind;

qf::LinExpr data_term(const Term& t, const std::map<std::string, qf::LinExpr>& vars) {
  switch (t.kind()) {
    case Term::Kind::constant:
      return qf::LinExpr(t.value());
    case Term::Kind::variable:
      return vars.at(t.name());
    case Term::Kind::sum:
      return data_term(t.lhs(), vars) + data_term(t.rhs(), vars);
    case Term::Kind::scale:
      return t.value() * data_term(t.lhs(), vars);
  }
  return {};
}

qf::Expr data_expr(const Formula& f, const std::map<std::string, qf::LinExpr>& vars) {
  switch (f.kind()) {
    case MK::truth:
      return qf::constant(true);
    case MK::falsity:
      return qf::constant(false);
    case MK::equal:
      return qf::eq(data_term(f.terms()[0], vars), data_term(f.terms()[1], vars));
    case MK::greater:
      return qf::gt(data_term(f.terms()[0], vars), data_term(f.terms()[1], vars));
    case MK::negation:
      return qf::negate(data_expr(f.child(), vars));
    case MK::conjunction:
      return qf::all_of({data_expr(f.child(0), vars), data_expr(f.child(1), vars)});
    case MK::disjunction:
      return qf::any_of({data_expr(f.child(0), vars), data_expr(f.child(1), vars)});
    case MK::implication:
      return qf::implies(data_expr(f.child(0), vars), data_expr(f.child(1), vars));
    default:
      throw std::invalid_argument("data constraint is not quantifier-free arithmetic");
  }
}

}  // namespace

qf::Expr object_axioms(const GroundObject& o, const std::vector<DataConstraint>& data) {
  std::map<std::string, qf::LinExpr> vars{{"time", qf::LinExpr::var(o.time())}};
  for (std::size_t k = 0; k < o.arity; ++k) vars["arg" + std::to_string(k + 1)] = qf::LinExpr::var(o.arg(k));
  std::vector<qf::Expr> cs;
  for (const auto& d : data)
    if (d.relation == o.cls) cs.push_back(data_expr(d.constraint, vars));
  return qf::all_of({qf::ge(qf::LinExpr::var(o.time()), 0), qf::implies(qf::var(o.presence()), qf::all_of(cs))});
}

// ---------------------------------------------------------------- grounder

using FK = fol::Formula::Kind;

std::vector<int> Grounder::new_objects() const {
  std::vector<int> out;
  for (int id : created_)
    if (!in_domain(id)) out.push_back(id);
  return out;
}

std::vector<int> Grounder::objects() const {
  std::vector<int> out = domain_;
  for (int id : new_objects()) out.push_back(id);
  return out;
}

void Grounder::emit(qf::Expr e, const std::string& prov) {
  if (e.is_true()) return;
  assertions_.push_back({std::move(e), prov});
}

void Grounder::note_created(int id) {
  if (created_set_.insert(id).second) created_.push_back(id);
}

qf::LinExpr Grounder::term(const fol::LinTerm& t, const Env& env) const {
  qf::LinExpr out(t.constant());
  for (const auto& [sym, c] : t.coeffs()) {
    if (sym.kind == fol::Symbol::Kind::position) {
      out += c * env.positions.at(sym.var);
      continue;
    }
    const GroundObject& o = s_.object(env.objects.at(sym.var));
    out += qf::LinExpr::var(sym.attr == fol::Symbol::time_attr ? o.time() : o.arg(static_cast<std::size_t>(sym.attr)), c);
  }
  return out;
}

namespace {

std::string quant_key(const fol::Formula& q) {
  bool obj = q.kind() == FK::exists_obj || q.kind() == FK::forall_obj;
  return obj ? "q" + std::to_string(q.object().id) : "p" + std::to_string(q.position());
}

}  // namespace

int Grounder::fresh_object(const fol::Formula& q, const Env& env) {
  int id = s_.object_for(quant_key(q) + env.key, q.object().cls);
  note_created(id);
  return id;
}

std::string Grounder::fresh_position(const fol::Formula& q, const Env& env) {
  return s_.position_for(quant_key(q) + env.key);
}

qf::Expr Grounder::anchor(const fol::Formula& q, const Env& env, const std::string& u) {
  qf::LinExpr U = qf::LinExpr::var(u);
  std::vector<qf::Expr> options{qf::eq(U, 0)};
  for (const auto& r : s_.signature().relations()) {
    int id = s_.object_for(quant_key(q) + env.key + "|anchor:" + r.name, r.name);
    note_created(id);
    const GroundObject& a = s_.object(id);
    options.push_back(qf::all_of({qf::var(a.presence()), qf::eq(qf::LinExpr::var(a.time()), U)}));
  }
  return qf::any_of(std::move(options));
}

void Grounder::add_root(const fol::Formula& f, const std::string& provenance) { root(f, Env{}, provenance); }

void Grounder::root(const fol::Formula& f, const Env& env, const std::string& prov) {
  switch (f.kind()) {
    case FK::truth:
      return;
    case FK::conjunction:
      for (const auto& c : f.children()) root(c, env, prov);
      return;
    case FK::exists_obj: {
      int id = fresh_object(f, env);
      emit(qf::var(s_.object(id).presence()), prov);
      Env inner = env;
      inner.objects[f.object().id] = id;
      inner.key += ";o" + std::to_string(f.object().id) + "=" + std::to_string(id);
      root(f.body(), inner, prov);
      return;
    }
    case FK::exists_pos: {
      std::string u = fresh_position(f, env);
      emit(qf::ge(qf::LinExpr::var(u), 0), prov);
      if (!fol::forces_position(f.body(), f.position())) emit(anchor(f, env, u), prov);
      Env inner = env;
      inner.positions[f.position()] = qf::LinExpr::var(u);
      inner.key += ";t" + std::to_string(f.position()) + "=" + u;
      root(f.body(), inner, prov);
      return;
    }
    case FK::forall_obj:
    case FK::forall_pos:
      open_context(f, env, std::nullopt, prov);
      return;
    default:
      emit(expr(f, env, prov), prov);
  }
}

qf::Expr Grounder::expr(const fol::Formula& f, const Env& env, const std::string& prov) {
  switch (f.kind()) {
    case FK::truth:
      return qf::constant(true);
    case FK::falsity:
      return qf::constant(false);
    case FK::compare: {
      qf::LinExpr t = term(f.term(), env);
      switch (f.op()) {
        case fol::Cmp::eq:
          return qf::eq(t, 0);
        case fol::Cmp::ne:
          return qf::ne(t, 0);
        case fol::Cmp::le:
          return qf::le(t, 0);
        case fol::Cmp::ge:
          return qf::ge(t, 0);
      }
      return qf::constant(false);
    }
    case FK::conjunction:
    case FK::disjunction: {
      std::vector<qf::Expr> cs;
      for (const auto& c : f.children()) cs.push_back(expr(c, env, prov));
      return f.kind() == FK::conjunction ? qf::all_of(std::move(cs)) : qf::any_of(std::move(cs));
    }
    case FK::exists_obj: {
      int id = fresh_object(f, env);
      Env inner = env;
      inner.objects[f.object().id] = id;
      inner.key += ";o" + std::to_string(f.object().id) + "=" + std::to_string(id);
      return qf::all_of({qf::var(s_.object(id).presence()), expr(f.body(), inner, prov)});
    }
    case FK::exists_pos: {
      std::string u = fresh_position(f, env);
      std::vector<qf::Expr> cs{qf::ge(qf::LinExpr::var(u), 0)};
      if (!fol::forces_position(f.body(), f.position())) cs.push_back(anchor(f, env, u));
      Env inner = env;
      inner.positions[f.position()] = qf::LinExpr::var(u);
      inner.key += ";t" + std::to_string(f.position()) + "=" + u;
      cs.push_back(expr(f.body(), inner, prov));
      return qf::all_of(std::move(cs));
    }
    case FK::forall_obj:
    case FK::forall_pos: {
      std::string lit = s_.literal_for(quant_key(f) + env.key);
      open_context(f, env, lit, prov);
      return qf::var(lit);
    }
  }
  return qf::constant(false);
}

void Grounder::open_context(const fol::Formula& q, const Env& env, std::optional<std::string> guard,
                            const std::string& prov) {
  contexts_.push_back({q, env, std::move(guard), prov, {}});
  std::size_t idx = contexts_.size() - 1;
  if (q.kind() == FK::forall_pos) instantiate(idx, std::nullopt);
  for (std::size_t i = 0; i < domain_.size(); ++i) instantiate(idx, domain_[i]);
}

void Grounder::instantiate(std::size_t idx, std::optional<int> object) {
  Context& c = contexts_[idx];
  const fol::Formula& q = c.node;
  Env inner = c.env;
  std::optional<qf::Expr> present;
  if (object) {
    const GroundObject& o = s_.object(*object);
    if (q.kind() == FK::forall_obj && o.cls != q.object().cls) return;
    if (!c.done.insert(*object).second) return;
    present = qf::var(o.presence());
    if (q.kind() == FK::forall_obj) {
      inner.objects[q.object().id] = o.id;
      inner.key += ";o" + std::to_string(q.object().id) + "=" + std::to_string(o.id);
    } else {
      inner.positions[q.position()] = qf::LinExpr::var(o.time());
      inner.key += ";t" + std::to_string(q.position()) + "=" + o.time();
    }
  } else {
    inner.positions[q.position()] = qf::LinExpr(0);
    inner.key += ";t" + std::to_string(q.position()) + "=0";
  }
  // Copy what we need: grounding the body may open contexts and grow the deque.
  std::optional<std::string> guard = c.guard;
  std::string prov = c.provenance;
  qf::Expr body = expr(q.body(), inner, prov);
  if (present) body = qf::implies(*present, body);
  if (guard) body = qf::implies(qf::var(*guard), body);
  emit(std::move(body), prov);
}

void Grounder::add_domain_object(int id) {
  if (!domain_set_.insert(id).second) return;
  domain_.push_back(id);
  for (std::size_t i = 0; i < contexts_.size(); ++i) instantiate(i, id);
}

// ---------------------------------------------------------------- queries

qf::Expr GroundedQuery::formula() const {
  std::vector<qf::Expr> cs;
  for (const auto& a : assertions) cs.push_back(a.expr);
  return qf::all_of(std::move(cs));
}

std::vector<int> GroundedQuery::objects() const {
  std::vector<int> out = domain;
  out.insert(out.end(), new_objects.begin(), new_objects.end());
  return out;
}

GroundedQuery ground(GroundingSession& s, const fol::Formula& f, const std::vector<int>& domain) {
  Grounder g(s);
  for (int d : domain) g.add_domain_object(d);
  g.add_root(f, "query");
  return {g.assertions(), g.domain(), g.new_objects()};
}

GroundedQuery under_approx(GroundingSession& s, const fol::Formula& f, const std::vector<int>& domain) {
  GroundedQuery q = ground(s, f, domain);
  for (int n : q.new_objects) q.assertions.push_back({no_new_r(s, n, q.domain), "NoNewR"});
  return q;
}

}  // namespace mfotl
