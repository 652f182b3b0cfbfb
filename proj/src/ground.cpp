#include "hornbp/ground.hpp"

#include <algorithm>
#include <optional>
#include <set>

namespace hornbp {

namespace {

using Binding = std::map<std::string, std::string>;

Proposition substitute(const Atom& atom, const Binding& binding) {
  Proposition out;
  out.pred = atom.pred;
  out.args.reserve(atom.args.size());
  for (const Term& t : atom.args) {
    if (t.kind == TermKind::Constant) {
      out.args.push_back(t.name);
    } else {
      auto it = binding.find(t.name);
      if (it == binding.end())
        throw GroundError("unbound variable " + t.name + " in " + atom.text());
      out.args.push_back(it->second);
    }
  }
  return out;
}

// Match `prop` against the clause's conclusion pattern, binding pattern
// variables to the proposition's constants.
bool unify_pattern(const Atom& pattern, const Proposition& prop, Binding& binding) {
  if (pattern.pred != prop.pred || pattern.args.size() != prop.args.size()) return false;
  for (size_t i = 0; i < pattern.args.size(); ++i) {
    const Term& t = pattern.args[i];
    const std::string& c = prop.args[i];
    if (t.kind == TermKind::Constant) {
      if (t.name != c) return false;
    } else {
      auto [it, fresh] = binding.emplace(t.name, c);
      if (!fresh && it->second != c) return false;
    }
  }
  return true;
}

bool atom_is_ground_under(const Atom& atom, const Binding& binding) {
  for (const Term& t : atom.args)
    if (t.kind == TermKind::Variable && !binding.count(t.name)) return false;
  return true;
}

// Depth-first join of the non-builtin premise atoms against the fact store
// (facts with prior zero are treated as absent). Builtins are evaluated as
// soon as their arguments are bound; one still unbound at the end is an
// error. Complete bindings are collected in `out`.
class ClauseMatcher {
 public:
  ClauseMatcher(const KnowledgeBase& kb, const BuiltinRegistry& builtins,
                std::vector<const Atom*> lookup, std::vector<const Atom*> tests)
      : kb_(kb), builtins_(builtins), lookup_(std::move(lookup)), tests_(std::move(tests)) {}

  void run(Binding& binding, std::vector<Binding>& out) {
    pending_.assign(tests_.begin(), tests_.end());
    if (!flush_tests(binding)) return;
    step(0, binding, out);
  }

 private:
  bool flush_tests(const Binding& binding) {
    for (auto it = pending_.begin(); it != pending_.end();) {
      if (atom_is_ground_under(**it, binding)) {
        if (!builtins_.eval(substitute(**it, binding).to_atom())) return false;
        it = pending_.erase(it);
      } else {
        ++it;
      }
    }
    return true;
  }

  void step(size_t pos, Binding& binding, std::vector<Binding>& out) {
    if (pos == lookup_.size()) {
      if (!pending_.empty())
        throw GroundError("builtin " + pending_.front()->pred +
                          " has unbound variables at evaluation time");
      out.push_back(binding);
      return;
    }
    const Atom& atom = *lookup_[pos];
    // Facts are keyed by proposition, so one predicate's entries are a
    // contiguous map range.
    Proposition probe;
    probe.pred = atom.pred;
    for (auto it = kb_.facts.lower_bound(probe); it != kb_.facts.end(); ++it) {
      const Proposition& fact = it->first;
      if (fact.pred != atom.pred) break;
      if (it->second.prior <= 0.0) continue;
      if (fact.args.size() != atom.args.size()) continue;
      std::vector<std::string> added;
      bool ok = true;
      for (size_t i = 0; i < atom.args.size() && ok; ++i) {
        const Term& t = atom.args[i];
        if (t.kind == TermKind::Constant) {
          ok = t.name == fact.args[i];
        } else {
          auto [bit, fresh] = binding.emplace(t.name, fact.args[i]);
          if (fresh)
            added.push_back(t.name);
          else
            ok = bit->second == fact.args[i];
        }
      }
      if (ok) {
        auto saved = pending_;
        if (flush_tests(binding)) step(pos + 1, binding, out);
        pending_ = std::move(saved);
      }
      for (const std::string& v : added) binding.erase(v);
    }
  }

  const KnowledgeBase& kb_;
  const BuiltinRegistry& builtins_;
  std::vector<const Atom*> lookup_;
  std::vector<const Atom*> tests_;
  std::vector<const Atom*> pending_;
};

std::vector<Binding> match_clause(const KnowledgeBase& kb, const BuiltinRegistry& builtins,
                                  const std::vector<Atom>& premise, Binding binding) {
  std::vector<const Atom*> lookup, tests;
  for (const Atom& a : premise)
    (kb.is_builtin(a.pred) ? tests : lookup).push_back(&a);
  std::vector<Binding> out;
  ClauseMatcher(kb, builtins, std::move(lookup), std::move(tests)).run(binding, out);
  return out;
}

std::vector<std::string> sorted_existentials(const std::set<std::string>& names) {
  return {names.begin(), names.end()};
}

void sort_bindings(std::vector<Binding>& bindings, const std::vector<std::string>& key_vars) {
  std::sort(bindings.begin(), bindings.end(), [&](const Binding& a, const Binding& b) {
    for (const std::string& v : key_vars) {
      const std::string& x = a.at(v);
      const std::string& y = b.at(v);
      if (x != y) return x < y;
    }
    return false;
  });
}

}  // namespace

int PropositionGraph::index_of(const Proposition& p) const {
  auto it = index_.find(p);
  return it == index_.end() ? -1 : it->second;
}

class Grounder {
 public:
  Grounder(const ImplicationGraph& graph, const KnowledgeBase& kb, const GroundOptions& opts)
      : graph_(graph),
        kb_(kb),
        opts_(opts),
        builtins_(opts.builtins ? *opts.builtins : BuiltinRegistry::standard()) {}

  PropositionGraph run(std::vector<Proposition> targets) {
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    for (const Proposition& t : targets) dfs(t);
    finish_priors();
    return std::move(pg_);
  }

 private:
  struct Candidate {
    std::string rule;
    std::vector<std::string> order_key;  // existential constants, lexicographic tiebreak
    std::vector<Proposition> members;
    WeightMode mode;
  };

  struct Frame {
    int prop;
    int depth;
    std::vector<int> children;
    size_t next = 0;
  };

  int intern(const Proposition& p) {
    auto [it, fresh] = pg_.index_.emplace(p, static_cast<int>(pg_.props.size()));
    if (fresh) {
      pg_.props.push_back(p);
      pg_.or_links.emplace_back();
      pg_.priors.push_back(0.0);
      visited_.push_back(false);
      on_stack_.push_back(false);
      frontier_.push_back(false);
      builtin_true_.push_back(false);
    }
    return it->second;
  }

  void dfs(const Proposition& root) {
    int ridx = intern(root);
    if (visited_[ridx]) return;
    std::vector<Frame> stack;
    stack.push_back(open(ridx, 0));
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < f.children.size()) {
        int child = f.children[f.next++];
        if (!visited_[child]) stack.push_back(open(child, f.depth + 1));
      } else {
        on_stack_[f.prop] = false;
        stack.pop_back();
      }
    }
  }

  Frame open(int idx, int depth) {
    visited_[idx] = true;
    on_stack_[idx] = true;
    Frame frame{idx, depth, {}, 0};
    const Proposition prop = pg_.props[idx];  // copy: expansion may grow props
    if (kb_.is_builtin(prop.pred)) {
      builtin_true_[idx] = builtins_.eval(prop.to_atom());
      return frame;
    }
    if (depth >= opts_.depth_limit) {
      frontier_[idx] = true;
      pg_.warnings.push_back("depth limit " + std::to_string(opts_.depth_limit) +
                             " reached at " + prop.text() + "; treated as prior-only");
      return frame;
    }
    std::vector<Candidate> candidates = expand_prop(prop);
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       if (a.rule != b.rule) return a.rule < b.rule;
                       return a.order_key < b.order_key;
                     });
    for (Candidate& cand : candidates) {
      bool cyclic = false;
      std::vector<int> member_idx;  // attach_group consumes cand.members
      for (const Proposition& m : cand.members) {
        int mi = intern(m);
        if (on_stack_[mi]) {
          cyclic = true;
          break;
        }
        member_idx.push_back(mi);
      }
      if (cyclic) continue;
      if (!attach_group(idx, prop, cand)) continue;
      frame.children.insert(frame.children.end(), member_idx.begin(), member_idx.end());
    }
    return frame;
  }

  // Instantiations of every compiled clause whose pattern covers `prop`.
  std::vector<Candidate> expand_prop(const Proposition& prop) {
    std::vector<Candidate> out;
    const std::string prefix = prop.pred + "/" + std::to_string(prop.args.size()) + ":";
    for (auto it = graph_.links.lower_bound(prefix); it != graph_.links.end(); ++it) {
      if (it->first.compare(0, prefix.size(), prefix) != 0) break;
      const CompiledRule& rule = it->second;
      Binding base;
      if (!unify_pattern(rule.conclusion_pattern, prop, base)) continue;
      for (const CompiledClause& clause : rule.clauses) {
        if (clause.existentials.empty()) {
          instantiate_direct(clause, base, out);
        } else {
          instantiate_query(clause, base, out);
        }
      }
    }
    return out;
  }

  void instantiate_direct(const CompiledClause& clause, const Binding& binding,
                          std::vector<Candidate>& out) {
    Candidate cand{clause.source_rule, {}, {}, clause.mode};
    for (const Atom& a : clause.premise) {
      if (kb_.is_builtin(a.pred)) {
        if (!builtins_.eval(substitute(a, binding).to_atom())) return;
      } else {
        cand.members.push_back(substitute(a, binding));
      }
    }
    if (cand.members.empty()) return;  // all premises were builtin tests
    out.push_back(std::move(cand));
  }

  void instantiate_query(const CompiledClause& clause, const Binding& binding,
                         std::vector<Candidate>& out) {
    std::vector<Binding> extensions = match_clause(kb_, builtins_, clause.premise, binding);
    std::vector<std::string> key = sorted_existentials(clause.existentials);
    sort_bindings(extensions, key);
    for (const Binding& full : extensions) {
      Candidate cand{clause.source_rule, {}, {}, clause.mode};
      for (const std::string& v : key) cand.order_key.push_back(full.at(v));
      for (const Atom& a : clause.premise)
        if (!kb_.is_builtin(a.pred)) cand.members.push_back(substitute(a, full));
      if (!cand.members.empty()) out.push_back(std::move(cand));
    }
  }

  // Returns false when an identical group is already linked to this prop.
  bool attach_group(int idx, const Proposition& prop, Candidate& cand) {
    std::vector<Proposition> sorted_members = cand.members;
    std::sort(sorted_members.begin(), sorted_members.end());
    auto key = std::make_tuple(prop, std::move(sorted_members), cand.rule);
    auto [it, fresh] = group_index_.emplace(std::move(key), static_cast<int>(pg_.groups.size()));
    if (!fresh) return false;  // same conclusion => the prior link is on this prop
    pg_.groups.push_back(
        GroundGroup{prop, std::move(cand.members), std::move(cand.rule), cand.mode});
    pg_.or_links[idx].push_back(it->second);
    return true;
  }

  void finish_priors() {
    for (size_t i = 0; i < pg_.props.size(); ++i) {
      if (!pg_.or_links[i].empty()) continue;
      const Proposition& p = pg_.props[i];
      if (kb_.is_builtin(p.pred)) {
        pg_.priors[i] = builtin_true_[i] ? 1.0 : 0.0;
        continue;
      }
      auto fact = kb_.facts.find(p);
      if (fact != kb_.facts.end()) {
        pg_.priors[i] = fact->second.prior;
      } else {
        pg_.priors[i] = frontier_[i] ? 0.0 : opts_.default_leaf_prior;
      }
    }
  }

  const ImplicationGraph& graph_;
  const KnowledgeBase& kb_;
  const GroundOptions& opts_;
  const BuiltinRegistry& builtins_;
  PropositionGraph pg_;
  std::vector<bool> visited_, on_stack_, frontier_, builtin_true_;
  std::map<std::tuple<Proposition, std::vector<Proposition>, std::string>, int> group_index_;
};

PropositionGraph ground(const ImplicationGraph& graph, const KnowledgeBase& kb,
                        const std::vector<Proposition>& targets, const GroundOptions& opts) {
  return Grounder(graph, kb, opts).run(targets);
}

std::vector<std::map<std::string, std::string>> eval_existential(
    const KnowledgeBase& kb, const Rule& rule, const std::map<std::string, std::string>& binding,
    const BuiltinRegistry* builtins) {
  const BuiltinRegistry& reg = builtins ? *builtins : BuiltinRegistry::standard();
  for (const std::string& v : rule.universals)
    if (!binding.count(v))
      throw GroundError("binding for rule " + rule.id + " misses universal variable " + v);
  std::vector<Binding> out = match_clause(kb, reg, rule.premise, binding);
  sort_bindings(out, sorted_existentials(rule.existentials));
  return out;
}

Proposition ground_atom(const Atom& atom, const std::map<std::string, std::string>& binding) {
  return substitute(atom, binding);
}

std::vector<std::map<std::string, std::string>> match_premise(const KnowledgeBase& kb,
                                                              const std::vector<Atom>& premise,
                                                              const BuiltinRegistry* builtins) {
  const BuiltinRegistry& reg = builtins ? *builtins : BuiltinRegistry::standard();
  std::vector<Binding> out = match_clause(kb, reg, premise, {});
  std::set<std::string> vars;
  for (const Atom& a : premise)
    for (const Term& t : a.args)
      if (t.kind == TermKind::Variable) vars.insert(t.name);
  sort_bindings(out, {vars.begin(), vars.end()});
  return out;
}

}  // namespace hornbp
