#pragma once

#include <string>

#include "hornbp/compile.hpp"
#include "hornbp/factor_graph.hpp"

namespace hornbp {

/// Graphviz rendering of a factor graph: propositions as ellipses (named
/// p<i>), groups as boxes (named g<j>), factors as small diamonds, edges
/// from inputs through the factor to its output.
std::string factor_graph_dot(const FactorGraph& fg);

/// Predicate-level rendering of the compiled rules: one node per predicate,
/// one edge per (premise predicate, conclusion) pair labeled with the rule
/// id; dashed edges for disjunctive (Planning) rules.
std::string implication_graph_dot(const ImplicationGraph& graph);

}  // namespace hornbp
