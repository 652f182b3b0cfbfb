#include "hornbp/query.hpp"

#include <algorithm>
#include <charconv>

#include "hornbp/factor_graph.hpp"
#include "hornbp/ground.hpp"
#include "lexer.hpp"

namespace hornbp {

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

class QueryParser {
 public:
  explicit QueryParser(std::string_view text) : lex_(text) {}

  Query run() {
    while (lex_.peek().kind != Tok::End) statement();
    for (const Proposition& q : query_.questions)
      if (query_.assumptions.count(q))
        throw ParseError(q.text() + " is both assumed and asked", 1, 1);
    return std::move(query_);
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
    Token head = lex_.take();
    if (head.kind != Tok::Ident) fail("expected 'assume', 'ask' or 'option'", head);
    if (head.text == "assume") {
      Proposition prop = proposition();
      expect(Tok::Equals, "'='");
      Token v = expect(Tok::Ident, "'true' or 'false'");
      bool value;
      if (v.text == "true") {
        value = true;
      } else if (v.text == "false") {
        value = false;
      } else {
        fail("expected 'true' or 'false', got '" + v.text + "'", v);
      }
      expect(Tok::Dot, "'.'");
      auto [it, fresh] = query_.assumptions.emplace(prop, value);
      if (!fresh && it->second != value)
        fail("conflicting assumptions for " + prop.text(), head);
    } else if (head.text == "ask") {
      Proposition prop = proposition();
      expect(Tok::Question, "'?'");
      if (std::find(query_.questions.begin(), query_.questions.end(), prop) ==
          query_.questions.end())
        query_.questions.push_back(prop);
    } else if (head.text == "option") {
      Token key = expect(Tok::Ident, "option name");
      expect(Tok::Equals, "'='");
      std::string value;
      // An option value runs to the closing '.': identifiers, numbers and
      // commas (for weight lists).
      while (true) {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident || t.kind == Tok::Var || t.kind == Tok::Number) {
          value += lex_.take().text;
        } else if (t.kind == Tok::Comma) {
          lex_.take();
          value += ",";
        } else {
          break;
        }
      }
      expect(Tok::Dot, "'.'");
      if (value.empty()) fail("option " + key.text + " has no value", key);
      query_.options[key.text] = value;
    } else {
      fail("expected 'assume', 'ask' or 'option', got '" + head.text + "'", head);
    }
  }

  Proposition proposition() {
    Token name = lex_.take();
    if (name.kind != Tok::Ident) fail("expected a proposition, got '" + name.text + "'", name);
    Proposition p;
    p.pred = name.text;
    if (lex_.peek().kind == Tok::LParen) {
      lex_.take();
      if (lex_.peek().kind != Tok::RParen) {
        while (true) {
          Token t = lex_.take();
          if (t.kind != Tok::Ident && t.kind != Tok::Number)
            fail("propositions must be ground; got '" + t.text + "'", t);
          p.args.push_back(t.text);
          if (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            continue;
          }
          break;
        }
      }
      expect(Tok::RParen, "')'");
    }
    return p;
  }

  Lexer lex_;
  Query query_;
};

double parse_double_opt(const std::string& key, const std::string& value) {
  double v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size())
    throw EngineError("query option " + key + ": expected a number, got '" + value + "'");
  return v;
}

int parse_int_opt(const std::string& key, const std::string& value) {
  int v = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || p != value.data() + value.size())
    throw EngineError("query option " + key + ": expected an integer, got '" + value + "'");
  return v;
}

}  // namespace

Query parse_query(std::string_view text) { return QueryParser(text).run(); }

EngineKind parse_engine_name(const std::string& name) {
  if (name == "auto") return EngineKind::Auto;
  if (name == "bp") return EngineKind::Bp;
  if (name == "oracle") return EngineKind::Oracle;
  if (name == "case-split" || name == "case_split") return EngineKind::CaseSplit;
  throw EngineError("unknown engine '" + name + "' (expected bp, oracle, case-split or auto)");
}

void apply_query_options(const Query& q, AnswerOptions& opts) {
  for (const auto& [key, value] : q.options) {
    if (key == "engine") {
      opts.engine = parse_engine_name(value);
    } else if (key == "tol") {
      double v = parse_double_opt(key, value);
      if (!(v > 0)) throw EngineError("query option tol must be positive");
      opts.bp.tol = v;
    } else if (key == "max_iters") {
      int v = parse_int_opt(key, value);
      if (v <= 0) throw EngineError("query option max_iters must be positive");
      opts.bp.max_iters = v;
    } else if (key == "depth_limit") {
      int v = parse_int_opt(key, value);
      if (v <= 0) throw EngineError("query option depth_limit must be positive");
      opts.ground.depth_limit = v;
    } else if (key == "schedule") {
      if (value == "sequential") {
        opts.bp.schedule = Schedule::Sequential;
      } else if (value == "synchronous") {
        opts.bp.schedule = Schedule::Synchronous;
      } else {
        throw EngineError("query option schedule must be sequential or synchronous");
      }
    } else if (key == "damping") {
      double v = parse_double_opt(key, value);
      if (!(v >= 0.0 && v < 1.0)) throw EngineError("query option damping must be in [0,1)");
      opts.bp.damping = v;
    } else if (key.rfind("weights_", 0) == 0) {
      std::string rule = key.substr(8);
      if (rule.empty()) throw EngineError("query option weights_<rule> needs a rule id");
      std::vector<double> ws;
      size_t start = 0;
      while (start <= value.size()) {
        size_t comma = value.find(',', start);
        std::string piece = value.substr(start, comma == std::string::npos ? comma : comma - start);
        ws.push_back(parse_double_opt(key, piece));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      opts.disjunct_weights[rule] = std::move(ws);
    } else {
      throw EngineError("unknown query option '" + key + "'");
    }
  }
}

Answer answer(const KnowledgeBase& kb, const ImplicationGraph& graph, const Query& q,
              const AnswerOptions& opts) {
  for (const auto& [prop, value] : q.assumptions)
    if (!kb.find_predicate(prop.pred, static_cast<int>(prop.args.size())))
      throw EngineError("assumption on undeclared predicate " + prop.text());
  for (const Proposition& prop : q.questions)
    if (!kb.find_predicate(prop.pred, static_cast<int>(prop.args.size())))
      throw EngineError("question on undeclared predicate " + prop.text());

  EngineKind engine = opts.engine;
  if (engine == EngineKind::Auto) {
    engine = firing_instances(kb, graph.planning_rules, q.assumptions).empty()
                 ? EngineKind::Bp
                 : EngineKind::CaseSplit;
  }

  std::vector<Proposition> targets = q.questions;
  for (const auto& [prop, value] : q.assumptions) targets.push_back(prop);

  Answer out;
  if (engine == EngineKind::CaseSplit) {
    CaseSplitOptions cs;
    cs.bp = opts.bp;
    cs.ground = opts.ground;
    cs.evidence = q.assumptions;
    cs.weights = opts.weights;
    cs.disjunct_weights = opts.disjunct_weights;
    cs.branch_cap = opts.branch_cap;
    cs.entail_tol = opts.bp.tol;
    cs.oracle_cap = opts.oracle_cap;
    CaseSplitReport report = case_split(graph, kb, targets, cs);
    out.engine = "case-split";
    out.diagnostics = report.combined;
    for (const Proposition& prop : q.questions)
      out.answers.emplace_back(prop, report.combined.probs.at(prop));
    out.cases = std::move(report);
    return out;
  }

  PropositionGraph pg = ground(graph, kb, targets, opts.ground);
  FactorGraph fg = build_factor_graph(pg, opts.weights, q.assumptions);
  Marginals m = engine == EngineKind::Oracle ? brute_force_marginals(fg, opts.oracle_cap)
                                             : run_bp(fg, opts.bp);
  m.warnings.insert(m.warnings.end(), pg.warnings.begin(), pg.warnings.end());
  out.engine = engine == EngineKind::Oracle ? "oracle" : "bp";
  for (const Proposition& prop : q.questions) out.answers.emplace_back(prop, m.probs.at(prop));
  out.diagnostics = std::move(m);
  return out;
}

}  // namespace hornbp
