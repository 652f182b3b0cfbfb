#pragma once

#include <map>
#include <string>
#include <vector>

#include "hornbp/kb.hpp"

namespace hornbp {

enum class FragmentTag { Direct, Query, Planning };

const char* fragment_name(FragmentTag tag);

/// Planning iff the conclusion is a disjunction; else Query iff the premise
/// binds existential variables; else Direct.
FragmentTag classify(const Rule& rule);

/// One conjunctive clause of a compiled DNF premise.
struct CompiledClause {
  std::vector<Atom> premise;              // variables renamed apart from the pattern
  std::set<std::string> existentials;     // premise-only variables of this clause
  std::string source_rule;
  WeightMode mode = WeightMode::Deterministic;

  auto operator<=>(const CompiledClause&) const = default;
};

/// All Direct/Query rules sharing one conclusion pattern, merged so the
/// premise is in disjunctive normal form.
struct CompiledRule {
  Atom conclusion_pattern;
  std::vector<CompiledClause> clauses;    // source order
  FragmentTag fragment = FragmentTag::Direct;

  std::vector<std::string> sources() const;
  auto operator<=>(const CompiledRule&) const = default;
};

/// Compiled rule store indexed by conclusion predicate pattern. Patterns
/// merge only up to variable renaming with identical equality patterns,
/// so c(X,X) and c(X,Y) stay distinct links.
struct ImplicationGraph {
  std::map<std::string, CompiledRule> links;   // pattern key -> merged rule
  std::vector<Rule> planning_rules;            // kept unmerged for case splitting

  auto operator<=>(const ImplicationGraph&) const = default;
};

/// Canonical key of a conclusion pattern: predicate, arity, and the
/// constant/variable-equality shape of the argument list.
std::string pattern_key(const Atom& conclusion);

/// Merge all Direct/Query rules into DNF links; Planning rules pass
/// through untouched. Requires a KB that validate_kb accepts.
ImplicationGraph compile(const KnowledgeBase& kb);

/// Re-expand a compiled graph into one rule per clause (ids preserved).
/// compile(expand(g)) is structurally equal to g.
std::vector<Rule> expand(const ImplicationGraph& graph);

}  // namespace hornbp
