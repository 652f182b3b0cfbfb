#pragma once

#include <map>
#include <string>
#include <vector>

#include "hornbp/infer.hpp"

namespace hornbp {

/// One ground disjunctive-rule instance whose premise holds with certainty.
struct PlanningInstance {
  std::string rule;
  std::vector<Proposition> disjuncts;
};

struct CaseBranch {
  std::map<Proposition, bool> assumptions;  // chosen disjunct literals
  Marginals marginals;
  double weight = 0.0;
};

struct CaseSplitReport {
  std::vector<CaseBranch> branches;
  Marginals combined;                 // expectation over branches
  long long explored = 0;             // product of disjunct counts
  std::map<Proposition, bool> entailed;  // per query target: certain in every branch
};

struct CaseSplitOptions {
  BpOptions bp;
  GroundOptions ground;
  std::map<Proposition, bool> evidence;
  const WeightVector* weights = nullptr;
  // Per-rule distribution over conclusion disjuncts; uniform when absent.
  std::map<std::string, std::vector<double>> disjunct_weights;
  long long branch_cap = 1LL << 16;
  double entail_tol = 1e-6;
  bool use_oracle = false;  // exact enumeration per branch instead of BP
  int oracle_cap = 25;
};

/// Disjunctive-rule instances firing against the certainty database: facts
/// with prior 1 plus assumed-true evidence. Ordered by rule, then binding.
std::vector<PlanningInstance> firing_instances(const KnowledgeBase& kb,
                                               const std::vector<Rule>& planning_rules,
                                               const std::map<Proposition, bool>& evidence);

/// Proof by cases: every firing disjunctive instance contributes one chosen
/// disjunct per branch (Cartesian product, capped), the chosen literals are
/// clamped true, the per-branch engine runs on the one shared grounding,
/// and branch marginals combine by expectation. A target is entailed when
/// its marginal reaches 1 - entail_tol in every branch. With no firing
/// instance this degenerates to a single unconditioned branch.
CaseSplitReport case_split(const ImplicationGraph& graph, const KnowledgeBase& kb,
                           const std::vector<Proposition>& targets,
                           const CaseSplitOptions& opts = {});

}  // namespace hornbp
