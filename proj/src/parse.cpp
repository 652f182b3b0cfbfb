#include "hornbp/parse.hpp"

#include <charconv>
#include <set>

#include "lexer.hpp"

namespace hornbp {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

class KbParser {
 public:
  explicit KbParser(std::string_view text) : lex_(text) {}

  KnowledgeBase run() {
    while (lex_.peek().kind != Tok::End) statement();
    return std::move(kb_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg, const Token& at) {
    throw ParseError(msg, at.line, at.col);
  }

  Token expect(Tok kind, const char* what) {
    Token t = lex_.take();
    if (t.kind != kind) fail(std::string("expected ") + what + ", got '" + t.text + "'", t);
    return t;
  }

  void statement() {
    const Token& t = lex_.peek();
    if (t.kind == Tok::Ident && t.text == "pred") {
      declaration();
    } else if (t.kind == Tok::Ident && t.text == "builtin") {
      builtin_declaration();
    } else {
      fact_or_rule();
    }
  }

  void declaration() {
    lex_.take();  // pred
    Token name = expect(Tok::Ident, "predicate name");
    expect(Tok::Slash, "'/'");
    Token ar = expect(Tok::Number, "arity");
    int arity = parse_int(ar);
    if (arity < 0) fail("arity must be nonnegative", ar);
    Predicate pred{name.text, arity, {}};
    if (lex_.peek().kind == Tok::LParen) {
      lex_.take();
      while (true) {
        Token role = expect(Tok::Ident, "role label");
        pred.roles.push_back(role.text);
        if (lex_.peek().kind == Tok::Comma) { lex_.take(); continue; }
        break;
      }
      expect(Tok::RParen, "')'");
      if (static_cast<int>(pred.roles.size()) != arity)
        fail("declared " + std::to_string(pred.roles.size()) + " roles for arity " +
                 std::to_string(arity), name);
      std::set<std::string> distinct(pred.roles.begin(), pred.roles.end());
      if (distinct.size() != pred.roles.size()) fail("duplicate role labels", name);
    }
    expect(Tok::Dot, "'.'");
    PredKey key{pred.name, pred.arity};
    if (kb_.predicates.count(key))
      fail("predicate " + pred.name + "/" + std::to_string(arity) + " already declared", name);
    kb_.predicates.emplace(key, std::move(pred));
  }

  void builtin_declaration() {
    lex_.take();  // builtin
    Token name = expect(Tok::Ident, "predicate name");
    expect(Tok::Slash, "'/'");
    Token ar = expect(Tok::Number, "arity");
    int arity = parse_int(ar);
    expect(Tok::Dot, "'.'");
    PredKey key{name.text, arity};
    if (!kb_.predicates.count(key))
      kb_.predicates.emplace(key, Predicate{name.text, arity, {}});
    kb_.builtins.insert(name.text);
  }

  void fact_or_rule() {
    Token first = lex_.peek();
    double prior = 1.0;
    bool has_prior = false;
    WeightMode mode = WeightMode::Deterministic;

    if (first.kind == Tok::Number) {
      Token num = lex_.take();
      expect(Tok::Coloncolon, "'::'");
      prior = parse_probability(num);
      has_prior = true;
    } else if (first.kind == Tok::Ident && first.text == "learned") {
      // 'learned ::' marks a rule; a predicate named learned still parses
      // as an atom because it is followed by '(' or '.'.
      Lexer probe = lex_;
      probe.take();
      if (probe.peek().kind == Tok::Coloncolon) {
        lex_.take();
        lex_.take();
        mode = WeightMode::Learned;
      }
    }

    std::vector<Atom> heads;
    heads.push_back(atom());
    while (lex_.peek().kind == Tok::Pipe) {
      lex_.take();
      heads.push_back(atom());
    }

    if (lex_.peek().kind == Tok::Arrow) {
      if (has_prior) fail("rules do not carry probabilities; use 'learned ::'", first);
      lex_.take();
      std::vector<Atom> body;
      body.push_back(atom());
      while (lex_.peek().kind == Tok::Comma) {
        lex_.take();
        body.push_back(atom());
      }
      expect(Tok::Dot, "'.'");
      Rule rule;
      rule.id = "r" + std::to_string(++rule_counter_);
      rule.premise = std::move(body);
      rule.conclusion = std::move(heads);
      rule.weight_mode = mode;
      rule.recompute_quantifiers();
      kb_.rules.push_back(std::move(rule));
      return;
    }

    // A fact.
    expect(Tok::Dot, "'.'");
    if (mode == WeightMode::Learned) fail("'learned ::' applies to rules only", first);
    if (heads.size() != 1) fail("facts cannot be disjunctive", first);
    const Atom& a = heads[0];
    if (!a.is_ground()) fail("fact " + a.text() + " contains variables", first);
    if (kb_.is_builtin(a.pred))
      fail("builtin predicate " + a.pred + " cannot appear as a fact", first);
    Proposition prop = Proposition::from_atom(a);
    if (kb_.facts.count(prop)) fail("duplicate fact " + prop.text(), first);
    (void)has_prior;
    kb_.facts.emplace(prop, Fact{prop, prior});
  }

  Atom atom() {
    Token name = lex_.take();
    if (name.kind != Tok::Ident)
      fail("expected predicate name, got '" + name.text + "'", name);
    Atom a;
    a.pred = name.text;
    if (lex_.peek().kind == Tok::LParen) {
      lex_.take();
      if (lex_.peek().kind != Tok::RParen) {
        while (true) {
          a.args.push_back(term());
          if (lex_.peek().kind == Tok::Comma) { lex_.take(); continue; }
          break;
        }
      }
      expect(Tok::RParen, "')'");
    }
    if (!kb_.find_predicate(a.pred, static_cast<int>(a.args.size()))) {
      bool name_known = false;
      for (const auto& [key, p] : kb_.predicates)
        if (key.name == a.pred) name_known = true;
      if (name_known)
        fail("arity mismatch: " + a.text() + " does not match any declaration of " + a.pred, name);
      fail("undeclared predicate " + a.pred, name);
    }
    return a;
  }

  Term term() {
    Token t = lex_.take();
    switch (t.kind) {
      case Tok::Ident:
      case Tok::Number:
        return Term::constant(t.text);
      case Tok::Var:
        return Term::variable(t.text);
      default:
        fail("expected a term, got '" + t.text + "'", t);
    }
  }

  int parse_int(const Token& t) {
    int v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail("expected an integer, got '" + t.text + "'", t);
    return v;
  }

  double parse_probability(const Token& t) {
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || p != t.text.data() + t.text.size())
      fail("expected a probability, got '" + t.text + "'", t);
    if (v < 0.0 || v > 1.0) fail("probability " + t.text + " outside [0,1]", t);
    return v;
  }

  Lexer lex_;
  KnowledgeBase kb_;
  int rule_counter_ = 0;
};

}  // namespace

KnowledgeBase parse_kb(std::string_view text) { return KbParser(text).run(); }

Proposition parse_proposition(std::string_view text) {
  Lexer lex(text);
  Token name = lex.take();
  if (name.kind != Tok::Ident)
    throw ParseError("expected a predicate name, got '" + name.text + "'", name.line, name.col);
  Proposition p;
  p.pred = name.text;
  if (lex.peek().kind == Tok::LParen) {
    lex.take();
    if (lex.peek().kind != Tok::RParen) {
      while (true) {
        Token t = lex.take();
        if (t.kind != Tok::Ident && t.kind != Tok::Number)
          throw ParseError("expected a constant, got '" + t.text + "'", t.line, t.col);
        p.args.push_back(t.text);
        if (lex.peek().kind == Tok::Comma) {
          lex.take();
          continue;
        }
        break;
      }
    }
    Token r = lex.take();
    if (r.kind != Tok::RParen)
      throw ParseError("expected ')', got '" + r.text + "'", r.line, r.col);
  }
  if (lex.peek().kind != Tok::End) {
    const Token& t = lex.peek();
    throw ParseError("unexpected trailing '" + t.text + "'", t.line, t.col);
  }
  return p;
}

}  // namespace hornbp
