#pragma once

#include <map>
#include <string>
#include <vector>

#include "hornbp/builtins.hpp"
#include "hornbp/compile.hpp"
#include "hornbp/kb.hpp"

namespace hornbp {

/// One ground rule instance: the conjoined premise propositions licensing
/// a conclusion. Equality is by (conclusion, member multiset, source rule).
struct GroundGroup {
  Proposition conclusion;
  std::vector<Proposition> members;  // ground, premise order, builtins excluded
  std::string source_rule;
  WeightMode mode = WeightMode::Deterministic;
};

/// The lazily grounded bipartite instance graph for one query. Node order
/// is discovery order and is deterministic for fixed inputs.
struct PropositionGraph {
  std::vector<Proposition> props;
  std::vector<GroundGroup> groups;
  std::vector<std::vector<int>> or_links;  // per prop: indices into groups
  std::vector<double> priors;              // per prop: leaf prior (used when or_links empty)
  std::vector<std::string> warnings;

  int index_of(const Proposition& p) const;
  bool is_leaf(int prop) const { return or_links[prop].empty(); }

 private:
  std::map<Proposition, int> index_;
  friend class Grounder;
};

struct GroundOptions {
  int depth_limit = 64;
  double default_leaf_prior = 0.0;  // closed-world; see --open-world-prior
  const BuiltinRegistry* builtins = nullptr;  // null = BuiltinRegistry::standard()
};

/// Backward-chaining closure from the targets. Every compiled clause whose
/// conclusion pattern unifies with a needed proposition contributes one
/// group per satisfiable ground instantiation; facts give leaf priors;
/// builtins are evaluated in place. A proposition re-encountered on its own
/// derivation path contributes no group via that path, and expansion past
/// depth_limit leaves a prior-only frontier node plus a warning.
PropositionGraph ground(const ImplicationGraph& graph, const KnowledgeBase& kb,
                        const std::vector<Proposition>& targets, const GroundOptions& opts = {});

/// Existential lookup for a Query rule: every extension of `binding` (which
/// covers the universals) to the existentials such that each non-builtin
/// premise atom is a fact with prior > 0 and each builtin evaluates true.
/// No rule application happens inside the search. Extensions are ordered
/// lexicographically by constant name.
std::vector<std::map<std::string, std::string>> eval_existential(
    const KnowledgeBase& kb, const Rule& rule, const std::map<std::string, std::string>& binding,
    const BuiltinRegistry* builtins = nullptr);

/// All bindings of the premise variables such that every non-builtin atom
/// matches a fact with prior > 0 and every builtin evaluates true, ordered
/// lexicographically by (sorted) variable name values.
std::vector<std::map<std::string, std::string>> match_premise(
    const KnowledgeBase& kb, const std::vector<Atom>& premise,
    const BuiltinRegistry* builtins = nullptr);

/// Ground an atom under a binding; throws GroundError on an unbound variable.
Proposition ground_atom(const Atom& atom, const std::map<std::string, std::string>& binding);

}  // namespace hornbp
