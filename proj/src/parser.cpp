#include "mfotl/parser.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace mfotl {

std::string to_string(const SourceSpan& s) {
  return s.file + ":" + std::to_string(s.line) + ":" + std::to_string(s.column);
}

namespace {

std::string render(const SourceSpan& span, const std::string& message, const std::vector<std::string>& expected,
                   const std::vector<Diagnostic>& diags) {
  std::string s = to_string(span) + ": " + message;
  if (!expected.empty()) {
    s += " (expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) s += (i ? ", " : "") + expected[i];
    s += ")";
  }
  for (const auto& d : diags) s += "\n  " + d.rule + ": " + d.message + " in " + d.subformula;
  return s;
}

}  // namespace

ParseError::ParseError(SourceSpan span, std::string message, std::vector<std::string> expected,
                       std::vector<Diagnostic> diagnostics)
    : std::runtime_error(render(span, message, expected, diagnostics)),
      span_(std::move(span)),
      message_(std::move(message)),
      expected_(std::move(expected)),
      diagnostics_(std::move(diagnostics)) {}

namespace {

enum class Tok { ident, number, punct, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  SourceSpan span;
};

std::vector<Token> lex(std::string_view src, const std::string& file) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto span_at = [&](std::size_t len) { return SourceSpan{file, line, col, len}; };
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const char* puncts[] = {"->", "!=", ">=", "<=", ">", "<", "=", "(", ")", "[", "]", "{",
                                 "}",  ",",  ".",  ";",  ":", "+", "-", "*", "/"};
  while (i < src.size()) {
    unsigned char c = static_cast<unsigned char>(src[i]);
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(c)) {
      advance(1);
      continue;
    }
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      out.push_back({Tok::ident, std::string(src.substr(i, j - i)), span_at(j - i)});
      advance(j - i);
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      out.push_back({Tok::number, std::string(src.substr(i, j - i)), span_at(j - i)});
      advance(j - i);
      continue;
    }
    bool matched = false;
    for (const char* p : puncts) {
      std::string_view pv(p);
      if (src.substr(i, pv.size()) == pv) {
        out.push_back({Tok::punct, std::string(pv), span_at(pv.size())});
        advance(pv.size());
        matched = true;
        break;
      }
    }
    if (!matched) throw ParseError(span_at(1), std::string("unexpected character '") + src[i] + "'");
  }
  out.push_back({Tok::end, "", span_at(0)});
  return out;
}

const std::set<std::string> formula_keywords = {"TRUE",   "FALSE", "NOT",        "AND",    "OR",
                                                "UNTIL",  "SINCE", "NEXT",       "PREV",   "EVENTUALLY",
                                                "ALWAYS", "ONCE",  "EXISTS",     "FORALL"};

using K = Formula::Kind;

class Parser {
 public:
  Parser(std::vector<Token> toks, const Signature* sig) : toks_(std::move(toks)), sig_(sig) {}

  // ------------------------------------------------------------ helpers
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_punct(std::string_view p) const { return peek().kind == Tok::punct && peek().text == p; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::ident && peek().text == w; }
  bool at_end() const { return peek().kind == Tok::end; }

  [[noreturn]] void fail(std::string message, std::vector<std::string> expected = {}) const {
    const Token& t = peek();
    if (message.empty()) message = t.kind == Tok::end ? "unexpected end of input" : "unexpected '" + t.text + "'";
    throw ParseError(t.span, std::move(message), std::move(expected));
  }

  const Token& take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  void expect_punct(std::string_view p) {
    if (!at_punct(p)) fail("", {"'" + std::string(p) + "'"});
    take();
  }

  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("", {std::string(w)});
    take();
  }

  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::ident || formula_keywords.count(peek().text)) fail("", {what});
    return take().text;
  }

  Value expect_number(bool allow_negative = true) {
    bool negative = false;
    if (allow_negative && at_punct("-")) {
      take();
      negative = true;
    }
    if (peek().kind == Tok::ident && sig_) {
      if (auto c = sig_->find_constant(peek().text)) {
        take();
        return negative ? -*c : *c;
      }
    }
    if (peek().kind != Tok::number) fail("", {"integer"});
    const Token& t = take();
    Value v = 0;
    try {
      v = std::stoll(t.text);
    } catch (const std::out_of_range&) {
      throw ParseError(t.span, "integer literal out of range");
    }
    return negative ? -v : v;
  }

  // ------------------------------------------------------------ terms
  Term term() {
    Term t = product();
    for (;;) {
      if (at_punct("+")) {
        take();
        t = Term::sum(t, product());
      } else if (at_punct("-")) {
        take();
        t = Term::sum(t, Term::scale(-1, product()));
      } else {
        return t;
      }
    }
  }

  Term product() {
    SourceSpan where = peek().span;
    Term t = factor();
    while (at_punct("*")) {
      take();
      Term r = factor();
      if (t.kind() == Term::Kind::constant)
        t = Term::scale(t.value(), r);
      else if (r.kind() == Term::Kind::constant)
        t = Term::scale(r.value(), t);
      else
        throw ParseError(where, "non-linear term: one factor of '*' must be an integer constant");
    }
    return t;
  }

  Term factor() {
    if (at_punct("-")) {
      take();
      Term f = factor();
      if (f.kind() == Term::Kind::constant) return Term::constant(-f.value());
      return Term::scale(-1, f);
    }
    if (peek().kind == Tok::number) return Term::constant(expect_number(false));
    if (at_punct("(")) {
      take();
      Term t = term();
      expect_punct(")");
      return t;
    }
    if (peek().kind == Tok::ident && !formula_keywords.count(peek().text)) {
      std::string name = take().text;
      if (sig_)
        if (auto c = sig_->find_constant(name)) return Term::constant(*c);
      return Term::variable(std::move(name));
    }
    fail("", {"term"});
  }

  std::optional<Formula> comparison_tail(const Term& lhs) {
    if (peek().kind != Tok::punct) return std::nullopt;
    const std::string op = peek().text;
    if (op != "=" && op != "!=" && op != ">" && op != "<" && op != ">=" && op != "<=") return std::nullopt;
    take();
    Term rhs = term();
    if (op == "=") return equal(lhs, rhs);
    if (op == "!=") return neg(equal(lhs, rhs));
    if (op == ">") return greater(lhs, rhs);
    if (op == "<") return greater(rhs, lhs);
    if (op == ">=") return neg(greater(rhs, lhs));
    return neg(greater(lhs, rhs));
  }

  Formula comparison() {
    Term lhs = term();
    if (auto f = comparison_tail(lhs)) return *f;
    fail("", {"'='", "'!='", "'<'", "'<='", "'>'", "'>='"});
  }

  // ------------------------------------------------------------ formulas
  bool at_quantifier() const { return at_word("EXISTS") || at_word("FORALL"); }

  Formula formula() {
    if (at_quantifier()) return quantified();
    Formula lhs = implication();
    if (at_word("UNTIL") || at_word("SINCE")) {
      bool is_until = take().text == "UNTIL";
      Interval i = optional_interval();
      Formula rhs = at_quantifier() ? quantified() : implication();
      return is_until ? until(lhs, rhs, i) : since(lhs, rhs, i);
    }
    return lhs;
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (at_punct("->")) {
      take();
      Formula rhs = at_quantifier() ? quantified() : implication();
      return implies(lhs, rhs);
    }
    return lhs;
  }

  Formula disjunction() {
    Formula f = conjunction();
    while (at_word("OR")) {
      take();
      f = disj(f, at_quantifier() ? quantified() : conjunction());
    }
    return f;
  }

  Formula conjunction() {
    Formula f = unary();
    while (at_word("AND")) {
      take();
      f = conj(f, unary());
    }
    return f;
  }

  Formula unary() {
    if (at_quantifier()) return quantified();
    if (at_word("NOT")) {
      take();
      return neg(unary());
    }
    for (auto [word, kind] : {std::pair{"NEXT", K::next}, std::pair{"PREV", K::prev},
                              std::pair{"EVENTUALLY", K::eventually}, std::pair{"ALWAYS", K::always},
                              std::pair{"ONCE", K::once}}) {
      if (at_word(word)) {
        take();
        Interval i = optional_interval();
        Formula f = unary();
        switch (kind) {
          case K::next:
            return next(f, i);
          case K::prev:
            return prev(f, i);
          case K::eventually:
            return eventually(f, i);
          case K::always:
            return always(f, i);
          default:
            return once(f, i);
        }
      }
    }
    return primary();
  }

  Formula primary() {
    if (at_word("TRUE")) {
      take();
      return truth();
    }
    if (at_word("FALSE")) {
      take();
      return falsity();
    }
    if (at_punct("(")) {
      // Either a parenthesized formula or a comparison starting with a parenthesized term.
      std::size_t mark = pos_;
      try {
        return comparison();
      } catch (const ParseError&) {
        pos_ = mark;
      }
      take();
      Formula f = formula();
      expect_punct(")");
      return f;
    }
    if (peek().kind == Tok::ident && !formula_keywords.count(peek().text) && peek(1).kind == Tok::punct &&
        peek(1).text == "(") {
      std::string rel = take().text;
      take();
      std::vector<Term> args;
      if (!at_punct(")")) {
        args.push_back(term());
        while (at_punct(",")) {
          take();
          args.push_back(term());
        }
      }
      expect_punct(")");
      return atom(std::move(rel), std::move(args));
    }
    if (peek().kind == Tok::number || peek().kind == Tok::ident || at_punct("-")) {
      if (peek().kind == Tok::ident && formula_keywords.count(peek().text)) fail("", primary_expected());
      return comparison();
    }
    fail("", primary_expected());
  }

  static std::vector<std::string> primary_expected() { return {"TRUE", "FALSE", "'('", "atom", "comparison", "operator"}; }

  Interval optional_interval() {
    if (!at_punct("[")) return {};
    SourceSpan where = peek().span;
    take();
    Value lo = expect_number(false);
    expect_punct(",");
    std::optional<Time> hi;
    if (at_punct(")")) {
      take();
    } else {
      hi = expect_number(false);
      expect_punct("]");
    }
    if (hi && *hi < lo) throw ParseError(where, "empty interval: lower bound exceeds upper bound");
    return Interval(lo, hi);
  }

  std::vector<std::string> var_list() {
    std::vector<std::string> vs{expect_ident("variable")};
    while (at_punct(",")) {
      take();
      vs.push_back(expect_ident("variable"));
    }
    return vs;
  }

  static bool guards(const Formula& f, const std::vector<std::string>& vars) {
    if (f.kind() != K::atom) return false;
    for (const auto& v : vars)
      if (!binding_position(f, v)) return false;
    return true;
  }

  static void flatten_and(const Formula& f, std::vector<Formula>& out) {
    if (f.kind() == K::conjunction) {
      flatten_and(f.child(0), out);
      flatten_and(f.child(1), out);
    } else {
      out.push_back(f);
    }
  }

  // Splits a conjunction into its first guarding atom and the remaining conjuncts.
  static std::optional<std::pair<Formula, std::optional<Formula>>> split_guard(const Formula& f,
                                                                               const std::vector<std::string>& vars) {
    if (guards(f, vars)) return std::pair{f, std::optional<Formula>{}};
    if (f.kind() != K::conjunction) return std::nullopt;
    if (guards(f.child(0), vars)) return std::pair{f.child(0), std::optional<Formula>{f.child(1)}};
    std::vector<Formula> parts;
    flatten_and(f, parts);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!guards(parts[i], vars)) continue;
      std::optional<Formula> rest;
      for (std::size_t j = 0; j < parts.size(); ++j) {
        if (j == i) continue;
        rest = rest ? conj(*rest, parts[j]) : parts[j];
      }
      return std::pair{parts[i], rest};
    }
    return std::nullopt;
  }

  Formula quantified() {
    SourceSpan where = peek().span;
    bool is_exists = take().text == "EXISTS";
    std::vector<std::string> vars = var_list();
    expect_punct(".");
    Formula f = formula();
    auto unguarded = [&]() -> ParseError {
      std::string vs;
      for (std::size_t i = 0; i < vars.size(); ++i) vs += (i ? "," : "") + vars[i];
      return ParseError(where, "unguarded quantifier", {},
                        {{"unguarded quantifier", to_string(f),
                          "quantified variable(s) " + vs + " must all be arguments of one relational atom " +
                              (is_exists ? "conjoined to the body" : "in the antecedent")}});
    };
    if (is_exists) {
      auto split = split_guard(f, vars);
      if (!split) throw unguarded();
      return exists(vars, split->first, split->second.value_or(truth()));
    }
    if (f.kind() != K::implication) throw unguarded();
    auto split = split_guard(f.child(0), vars);
    if (!split) throw unguarded();
    Formula body = split->second ? implies(*split->second, f.child(1)) : f.child(1);
    return forall(vars, split->first, body);
  }

  // ------------------------------------------------------------ spec files
  Spec spec() {
    Spec s;
    sig_ = &s.signature;
    if (!at_word("signature")) fail("expected signature declaration", {"signature"});
    take();
    signature_block(s.signature);
    std::set<std::string> seen;
    while (!at_end()) {
      if (peek().kind != Tok::ident) fail("", {"requirements", "property", "data", "bound"});
      std::string section = peek().text;
      if (!seen.insert(section).second) fail("duplicate section " + section);
      if (section == "requirements") {
        take();
        block([&] { s.requirements.push_back(named_formula("req" + std::to_string(s.requirements.size()))); });
      } else if (section == "property") {
        take();
        bool have = false;
        block([&] {
          if (have) fail("property section holds exactly one formula");
          s.property = named_formula("property");
          have = true;
        });
        if (!have) fail("property section is empty", {"formula"});
      } else if (section == "data") {
        take();
        block([&] { s.data.push_back(data_constraint()); });
      } else if (section == "bound") {
        take();
        if (at_word("unbounded")) {
          take();
          s.default_bound.reset();
        } else {
          Value b = expect_number(false);
          s.default_bound = static_cast<std::uint64_t>(b);
        }
        expect_punct(";");
      } else {
        fail("unknown section '" + section + "'", {"requirements", "property", "data", "bound"});
      }
    }
    if (!seen.count("property")) throw ParseError(peek().span, "missing property section", {"property"});
    return s;
  }

  template <class F>
  void block(F&& statement) {
    expect_punct("{");
    while (!at_punct("}")) {
      if (at_end()) fail("", {"'}'"});
      statement();
    }
    take();
  }

  void signature_block(Signature& sig) {
    block([&] {
      if (at_word("relation")) {
        take();
        const Token& name_tok = peek();
        std::string name = expect_ident("relation name");
        expect_punct("/");
        Value arity = expect_number(false);
        expect_punct(";");
        try {
          sig.add_relation(name, static_cast<std::size_t>(arity));
        } catch (const std::invalid_argument& e) {
          throw ParseError(name_tok.span, e.what());
        }
      } else if (at_word("constant")) {
        take();
        const Token& name_tok = peek();
        std::string name = expect_ident("constant name");
        expect_punct("=");
        Value v = expect_number();
        expect_punct(";");
        try {
          sig.add_constant(name, v);
        } catch (const std::invalid_argument& e) {
          throw ParseError(name_tok.span, e.what());
        }
      } else {
        fail("", {"relation", "constant", "'}'"});
      }
    });
  }

  NamedFormula named_formula(std::string default_name) {
    if (peek().kind == Tok::ident && peek(1).kind == Tok::punct && peek(1).text == ":") {
      default_name = take().text;
      take();
    }
    SourceSpan where = peek().span;
    Formula f = formula();
    expect_punct(";");
    auto diags = validate(f, *sig_);
    if (!diags.empty()) throw ParseError(where, "invalid formula " + default_name, {}, diags);
    return {default_name, f};
  }

  DataConstraint data_constraint() {
    SourceSpan where = peek().span;
    std::string rel = expect_ident("relation name");
    expect_punct(":");
    Formula f = formula();
    expect_punct(";");
    DataConstraint d{rel, f};
    auto diags = validate(d, *sig_);
    if (!diags.empty()) throw ParseError(where, "invalid data constraint for " + rel, {}, diags);
    return d;
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const Signature* sig_;
};

}  // namespace

Spec parse_spec(std::string_view text, std::string file) {
  Parser p(lex(text, file), nullptr);
  return p.spec();
}

Spec load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path);
}

Formula parse_formula(std::string_view text, const Signature& sig, bool check) {
  Parser p(lex(text, "<formula>"), &sig);
  SourceSpan where = p.peek().span;
  Formula f = p.formula();
  if (!p.at_end()) p.fail("", {"end of input"});
  if (check) {
    auto diags = validate(f, sig);
    if (!diags.empty()) throw ParseError(where, "invalid formula", {}, diags);
  }
  return f;
}

}  // namespace mfotl
