#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hornbp/case_split.hpp"
#include "hornbp/compile.hpp"
#include "hornbp/infer.hpp"

namespace hornbp {

/// A parsed query file: evidence to clamp, propositions to answer, and raw
/// engine options (applied by apply_query_options).
struct Query {
  std::map<Proposition, bool> assumptions;
  std::vector<Proposition> questions;
  std::map<std::string, std::string> options;
};

/// Grammar, one statement per sentence ('#' comments allowed):
///
///   assume <prop> = true|false .
///   ask <prop> ?
///   option <key> = <value> .
///
/// Conflicting assumptions and assumption/question overlap are errors.
Query parse_query(std::string_view text);

enum class EngineKind { Auto, Bp, Oracle, CaseSplit };

/// Accepts bp | oracle | case-split | auto; throws EngineError otherwise.
EngineKind parse_engine_name(const std::string& name);

struct AnswerOptions {
  EngineKind engine = EngineKind::Auto;
  BpOptions bp;
  GroundOptions ground;
  const WeightVector* weights = nullptr;
  long long branch_cap = 1LL << 16;
  int oracle_cap = 25;
  std::map<std::string, std::vector<double>> disjunct_weights;
};

/// Fold the query's option map into engine settings. Recognized keys:
/// engine, tol, max_iters, depth_limit, schedule, damping, and
/// weights_<rule id> (comma-separated disjunct weights). Unknown keys or
/// unparsable values throw EngineError.
void apply_query_options(const Query& q, AnswerOptions& opts);

struct Answer {
  std::vector<std::pair<Proposition, double>> answers;  // question order
  std::string engine;  // "bp" | "oracle" | "case-split"
  Marginals diagnostics;
  std::optional<CaseSplitReport> cases;
};

/// Ground the assumptions and questions, clamp assumptions as evidence,
/// pick the engine (auto = case-split when a disjunctive instance fires,
/// else bp), and answer every question.
Answer answer(const KnowledgeBase& kb, const ImplicationGraph& graph, const Query& q,
              const AnswerOptions& opts = {});

}  // namespace hornbp
