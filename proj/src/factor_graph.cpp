#include "hornbp/factor_graph.hpp"

#include <cmath>

namespace hornbp {

std::string feature_bias(const std::string& rule_id) { return "bias:" + rule_id; }
std::string feature_act(const std::string& rule_id) { return "act:" + rule_id; }
std::string feature_pattern(const std::string& pred, size_t arity) {
  return "pat:" + pred + "/" + std::to_string(arity);
}

double psi_and(bool g, const std::vector<bool>& inputs) {
  bool conj = true;
  for (bool b : inputs) conj = conj && b;
  return g == conj ? 1.0 : 0.0;
}

double psi_or_det(bool p, const std::vector<bool>& inputs) {
  bool disj = false;
  for (bool b : inputs) disj = disj || b;
  return p == disj ? 1.0 : 0.0;
}

double psi_or_learned(bool p, const std::vector<bool>& inputs, const FeatureFunction& features,
                      const WeightVector& w) {
  if (!p) return 1.0;
  double s = 0.0;
  for (size_t i = 0; i < inputs.size(); ++i) {
    const InputFeatures& f = features[i];
    s += w.get(f.bias) + w.get(f.pattern);
    if (inputs[i]) s += w.get(f.act);
  }
  return std::exp(s);
}

double learned_or_conditional(const std::vector<bool>& inputs, const FeatureFunction& features,
                              const WeightVector& w) {
  double on = psi_or_learned(true, inputs, features, w);
  return on / (on + 1.0);  // psi(0, .) == 1
}

FactorGraph build_factor_graph(const PropositionGraph& pg, const WeightVector* weights,
                               const std::map<Proposition, bool>& evidence) {
  FactorGraph fg;
  fg.num_props = static_cast<int>(pg.props.size());
  fg.num_groups = static_cast<int>(pg.groups.size());
  fg.props = pg.props;

  for (int g = 0; g < fg.num_groups; ++g) {
    Factor f;
    f.kind = FactorKind::And;
    f.output = fg.group_var(g);
    for (const Proposition& m : pg.groups[g].members) {
      int idx = pg.index_of(m);
      if (idx < 0) throw std::logic_error("group member missing from proposition graph");
      f.inputs.push_back(idx);
    }
    fg.factors.push_back(std::move(f));
  }

  for (int p = 0; p < fg.num_props; ++p) {
    const std::vector<int>& links = pg.or_links[p];
    if (links.empty()) continue;
    Factor f;
    f.output = p;
    bool all_learned = weights != nullptr;
    for (int g : links) {
      f.inputs.push_back(fg.group_var(g));
      all_learned = all_learned && pg.groups[g].mode == WeightMode::Learned;
    }
    if (all_learned) {
      f.kind = FactorKind::OrLearned;
      for (int g : links) {
        const GroundGroup& grp = pg.groups[g];
        f.bias.push_back(weights->get(feature_bias(grp.source_rule)) +
                         weights->get(feature_pattern(grp.conclusion.pred,
                                                      grp.conclusion.args.size())));
        f.act.push_back(weights->get(feature_act(grp.source_rule)));
      }
    } else {
      f.kind = FactorKind::OrDet;
    }
    fg.factors.push_back(std::move(f));
  }

  for (int p = 0; p < fg.num_props; ++p) {
    if (!pg.or_links[p].empty()) continue;
    if (evidence.count(pg.props[p])) continue;  // evidence overrides the prior
    Factor f;
    f.kind = FactorKind::Prior;
    f.output = p;
    f.prior = pg.priors[p];
    fg.factors.push_back(std::move(f));
  }

  for (const auto& [prop, value] : evidence) {
    int p = pg.index_of(prop);
    if (p < 0) throw EngineError("evidence proposition " + prop.text() + " is not in the graph");
    Factor f;
    f.kind = FactorKind::Evidence;
    f.output = p;
    f.value = value;
    fg.factors.push_back(std::move(f));
  }

  assert_bipartite(fg);
  return fg;
}

void assert_bipartite(const FactorGraph& fg) {
  for (const Factor& f : fg.factors) {
    bool out_is_prop = fg.is_prop_var(f.output);
    switch (f.kind) {
      case FactorKind::And:
        if (out_is_prop) throw std::logic_error("And factor output must be a group node");
        for (int v : f.inputs)
          if (!fg.is_prop_var(v))
            throw std::logic_error("And factor inputs must be proposition nodes");
        if (f.inputs.empty()) throw std::logic_error("And factor needs inputs");
        break;
      case FactorKind::OrDet:
      case FactorKind::OrLearned:
        if (!out_is_prop) throw std::logic_error("Or factor output must be a proposition node");
        for (int v : f.inputs)
          if (fg.is_prop_var(v)) throw std::logic_error("Or factor inputs must be group nodes");
        if (f.inputs.empty()) throw std::logic_error("Or factor needs inputs");
        break;
      case FactorKind::Prior:
      case FactorKind::Evidence:
        if (!out_is_prop) throw std::logic_error("unary factors attach to proposition nodes");
        if (!f.inputs.empty()) throw std::logic_error("unary factors take no inputs");
        break;
    }
  }
}

}  // namespace hornbp
