#include "hornbp/compile.hpp"

#include <algorithm>
#include <map>

namespace hornbp {

const char* fragment_name(FragmentTag tag) {
  switch (tag) {
    case FragmentTag::Direct: return "direct";
    case FragmentTag::Query: return "query";
    case FragmentTag::Planning: return "planning";
  }
  return "?";
}

FragmentTag classify(const Rule& rule) {
  if (rule.conclusion.size() > 1) return FragmentTag::Planning;
  if (!rule.existentials.empty()) return FragmentTag::Query;
  return FragmentTag::Direct;
}

std::string pattern_key(const Atom& conclusion) {
  std::string key = conclusion.pred + "/" + std::to_string(conclusion.args.size()) + ":";
  std::map<std::string, int> first_seen;
  for (size_t i = 0; i < conclusion.args.size(); ++i) {
    const Term& t = conclusion.args[i];
    if (i) key += ',';
    if (t.is_var()) {
      auto [it, fresh] = first_seen.emplace(t.name, static_cast<int>(first_seen.size()));
      key += 'v' + std::to_string(it->second);
      (void)fresh;
    } else {
      key += '=' + t.name;
    }
  }
  return key;
}

std::vector<std::string> CompiledRule::sources() const {
  std::vector<std::string> out;
  out.reserve(clauses.size());
  for (const CompiledClause& c : clauses) out.push_back(c.source_rule);
  return out;
}

namespace {

Atom substitute(const Atom& a, const std::map<std::string, std::string>& var_map) {
  Atom out = a;
  for (Term& t : out.args)
    if (t.is_var()) {
      auto it = var_map.find(t.name);
      if (it != var_map.end()) t.name = it->second;
    }
  return out;
}

std::string fresh_variable(const std::string& base, const std::set<std::string>& taken) {
  for (int k = 1;; ++k) {
    std::string candidate = base + "_" + std::to_string(k);
    if (!taken.count(candidate)) return candidate;
  }
}

/// Rename a rule body onto a representative conclusion pattern: conclusion
/// variables map positionally, existentials are renamed apart when they
/// collide with the pattern's variables.
CompiledClause align_clause(const Rule& rule, const Atom& pattern) {
  std::map<std::string, std::string> var_map;
  std::set<std::string> pattern_vars;
  for (const Term& t : pattern.args)
    if (t.is_var()) pattern_vars.insert(t.name);

  const Atom& conclusion = rule.conclusion.front();
  for (size_t i = 0; i < conclusion.args.size(); ++i)
    if (conclusion.args[i].is_var()) var_map[conclusion.args[i].name] = pattern.args[i].name;

  std::set<std::string> taken = pattern_vars;
  for (const std::string& v : rule.existentials) taken.insert(v);
  for (const std::string& v : rule.existentials) {
    if (pattern_vars.count(v)) {
      std::string renamed = fresh_variable(v, taken);
      var_map[v] = renamed;
      taken.insert(renamed);
    }
  }

  CompiledClause clause;
  clause.source_rule = rule.id;
  clause.mode = rule.weight_mode;
  for (const Atom& a : rule.premise) clause.premise.push_back(substitute(a, var_map));
  for (const std::string& v : rule.existentials) {
    auto it = var_map.find(v);
    clause.existentials.insert(it == var_map.end() ? v : it->second);
  }
  return clause;
}

}  // namespace

ImplicationGraph compile(const KnowledgeBase& kb) {
  ImplicationGraph graph;
  for (const Rule& rule : kb.rules) {
    FragmentTag tag = classify(rule);
    if (tag == FragmentTag::Planning) {
      graph.planning_rules.push_back(rule);
      continue;
    }
    const Atom& conclusion = rule.conclusion.front();
    std::string key = pattern_key(conclusion);
    auto it = graph.links.find(key);
    if (it == graph.links.end()) {
      CompiledRule merged;
      merged.conclusion_pattern = conclusion;
      it = graph.links.emplace(key, std::move(merged)).first;
    }
    CompiledRule& merged = it->second;
    merged.clauses.push_back(align_clause(rule, merged.conclusion_pattern));
    if (!merged.clauses.back().existentials.empty()) merged.fragment = FragmentTag::Query;
  }
  return graph;
}

std::vector<Rule> expand(const ImplicationGraph& graph) {
  std::vector<Rule> rules;
  for (const auto& [key, merged] : graph.links) {
    for (const CompiledClause& clause : merged.clauses) {
      Rule rule;
      rule.id = clause.source_rule;
      rule.premise = clause.premise;
      rule.conclusion = {merged.conclusion_pattern};
      rule.weight_mode = clause.mode;
      rule.recompute_quantifiers();
      rules.push_back(std::move(rule));
    }
  }
  for (const Rule& rule : graph.planning_rules) rules.push_back(rule);
  return rules;
}

}  // namespace hornbp
