#include "hornbp/case_split.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hornbp/factor_graph.hpp"
#include "hornbp/ground.hpp"

namespace hornbp {

namespace {

// Facts with prior 1 plus assumed-true evidence, as a lookup database.
KnowledgeBase certainty_db(const KnowledgeBase& kb, const std::map<Proposition, bool>& evidence) {
  KnowledgeBase certain;
  certain.predicates = kb.predicates;
  certain.builtins = kb.builtins;
  for (const auto& [prop, fact] : kb.facts)
    if (fact.prior == 1.0) certain.facts.emplace(prop, fact);
  for (const auto& [prop, value] : evidence)
    if (value) certain.facts.insert_or_assign(prop, Fact{prop, 1.0});
  return certain;
}

std::vector<double> branch_weights(const CaseSplitOptions& opts, const PlanningInstance& inst) {
  size_t n = inst.disjuncts.size();
  auto it = opts.disjunct_weights.find(inst.rule);
  if (it == opts.disjunct_weights.end())
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  const std::vector<double>& given = it->second;
  if (given.size() != n)
    throw EngineError("rule " + inst.rule + " has " + std::to_string(n) +
                      " disjuncts but " + std::to_string(given.size()) +
                      " weights were supplied");
  double sum = 0.0;
  for (double w : given) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw EngineError("disjunct weights for rule " + inst.rule + " must be nonnegative");
    sum += w;
  }
  if (sum <= 0.0)
    throw EngineError("disjunct weights for rule " + inst.rule + " sum to zero");
  std::vector<double> out = given;
  for (double& w : out) w /= sum;
  return out;
}

}  // namespace

std::vector<PlanningInstance> firing_instances(const KnowledgeBase& kb,
                                               const std::vector<Rule>& planning_rules,
                                               const std::map<Proposition, bool>& evidence) {
  KnowledgeBase certain = certainty_db(kb, evidence);
  std::vector<PlanningInstance> out;
  std::set<std::pair<std::string, std::vector<Proposition>>> seen;
  for (const Rule& rule : planning_rules) {
    for (const auto& binding : match_premise(certain, rule.premise)) {
      PlanningInstance inst;
      inst.rule = rule.id;
      for (const Atom& head : rule.conclusion) inst.disjuncts.push_back(ground_atom(head, binding));
      if (seen.emplace(inst.rule, inst.disjuncts).second) out.push_back(std::move(inst));
    }
  }
  return out;
}

CaseSplitReport case_split(const ImplicationGraph& graph, const KnowledgeBase& kb,
                           const std::vector<Proposition>& targets,
                           const CaseSplitOptions& opts) {
  std::vector<PlanningInstance> instances =
      firing_instances(kb, graph.planning_rules, opts.evidence);

  long double needed = 1.0L;
  for (const PlanningInstance& inst : instances)
    needed *= static_cast<long double>(inst.disjuncts.size());
  if (needed > static_cast<long double>(opts.branch_cap))
    throw EngineError("case split needs " + std::to_string((unsigned long long)needed) +
                      " branches, exceeding the branch cap " + std::to_string(opts.branch_cap));

  std::vector<std::vector<double>> weights;
  for (const PlanningInstance& inst : instances) {
    weights.push_back(branch_weights(opts, inst));
    for (const Proposition& d : inst.disjuncts) {
      auto ev = opts.evidence.find(d);
      if (ev != opts.evidence.end() && !ev->second)
        throw EngineError("assumption " + d.text() +
                          " = false conflicts with a case-split disjunct");
    }
  }

  // One grounding serves every branch; branches differ only in evidence.
  std::vector<Proposition> all_targets = targets;
  for (const auto& [prop, value] : opts.evidence) all_targets.push_back(prop);
  for (const PlanningInstance& inst : instances)
    for (const Proposition& d : inst.disjuncts) all_targets.push_back(d);
  PropositionGraph pg = ground(graph, kb, all_targets, opts.ground);

  CaseSplitReport report;
  report.explored = static_cast<long long>(needed);

  std::set<std::string> seen_warnings;
  std::vector<size_t> choice(instances.size(), 0);
  for (long long b = 0; b < report.explored; ++b) {
    CaseBranch branch;
    branch.weight = 1.0;
    std::map<Proposition, bool> evidence = opts.evidence;
    for (size_t j = 0; j < instances.size(); ++j) {
      const Proposition& lit = instances[j].disjuncts[choice[j]];
      branch.assumptions[lit] = true;
      evidence.insert_or_assign(lit, true);
      branch.weight *= weights[j][choice[j]];
    }
    FactorGraph fg = build_factor_graph(pg, opts.weights, evidence);
    branch.marginals =
        opts.use_oracle ? brute_force_marginals(fg, opts.oracle_cap) : run_bp(fg, opts.bp);
    report.branches.push_back(std::move(branch));
    // Odometer: last instance varies fastest.
    for (size_t j = instances.size(); j-- > 0;) {
      if (++choice[j] < instances[j].disjuncts.size()) break;
      choice[j] = 0;
    }
  }

  Marginals& combined = report.combined;
  combined.converged = true;
  for (const std::string& w : pg.warnings)
    if (seen_warnings.insert(w).second) combined.warnings.push_back(w);
  for (const CaseBranch& branch : report.branches) {
    combined.iterations = std::max(combined.iterations, branch.marginals.iterations);
    combined.residual = std::max(combined.residual, branch.marginals.residual);
    combined.converged = combined.converged && branch.marginals.converged;
    for (const auto& [prop, p] : branch.marginals.probs) combined.probs[prop] += branch.weight * p;
    for (const std::string& w : branch.marginals.warnings)
      if (seen_warnings.insert(w).second) combined.warnings.push_back(w);
  }

  for (const Proposition& t : targets) {
    bool all = true;
    for (const CaseBranch& branch : report.branches) {
      auto it = branch.marginals.probs.find(t);
      all = all && it != branch.marginals.probs.end() && it->second >= 1.0 - opts.entail_tol;
    }
    report.entailed[t] = all;
  }
  return report;
}

}  // namespace hornbp
