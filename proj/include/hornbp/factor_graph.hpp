#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hornbp/ground.hpp"

namespace hornbp {

/// Raised for inference-level failures: bad evidence, divergence,
/// inconsistent clamping, oversized exact enumerations.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FactorKind { And, OrDet, OrLearned, Prior, Evidence };

/// Feature ids of one (p, g_i) pair in a learned disjunction factor:
/// `bias` and `pattern` fire when p=1, `act` fires when p=1 and g_i=1.
struct InputFeatures {
  std::string bias;
  std::string act;
  std::string pattern;
};
using FeatureFunction = std::vector<InputFeatures>;  // one entry per input

struct WeightVector {
  std::map<std::string, double> w;

  double get(const std::string& id) const {
    auto it = w.find(id);
    return it == w.end() ? 0.0 : it->second;
  }
  void set(const std::string& id, double v) { w[id] = v; }
};

std::string feature_bias(const std::string& rule_id);
std::string feature_act(const std::string& rule_id);
std::string feature_pattern(const std::string& pred, size_t arity);

/// Variables are indexed globally: proposition i is variable i, group j is
/// variable num_props + j. `output` is the conjunction (And) or disjunction
/// (Or*) result; Prior/Evidence are unary on their output.
struct Factor {
  FactorKind kind;
  int output = -1;
  std::vector<int> inputs;
  double prior = 0.5;               // Prior: P(output = 1)
  bool value = false;               // Evidence: clamped value
  std::vector<double> bias;         // OrLearned, per input: w(bias) + w(pattern)
  std::vector<double> act;          // OrLearned, per input: w(act)
};

struct FactorGraph {
  int num_props = 0;
  int num_groups = 0;
  std::vector<Factor> factors;
  std::vector<Proposition> props;  // names of the p variables

  int num_vars() const { return num_props + num_groups; }
  int group_var(int g) const { return num_props + g; }
  bool is_prop_var(int v) const { return v < num_props; }
};

/// Deterministic conjunction: 1 iff g == AND(inputs).
double psi_and(bool g, const std::vector<bool>& inputs);

/// Deterministic disjunction: 1 iff p == OR(inputs).
double psi_or_det(bool p, const std::vector<bool>& inputs);

/// Linear-exponential disjunction: exp(sum of active feature weights).
/// Every feature fires only when p = 1, so psi(0, ·) = 1.
double psi_or_learned(bool p, const std::vector<bool>& inputs, const FeatureFunction& features,
                      const WeightVector& w);

/// P(p=1 | inputs) for the learned factor, normalized over p in {0,1}.
double learned_or_conditional(const std::vector<bool>& inputs, const FeatureFunction& features,
                              const WeightVector& w);

/// Materialize the bipartite factor graph: one And factor per group, one Or
/// factor per proposition with licensing groups (learned form only when
/// weights are supplied and every licensing rule is learned), Prior factors
/// on leaves, Evidence factors overriding priors. Throws EngineError for
/// evidence on a proposition absent from the graph.
FactorGraph build_factor_graph(const PropositionGraph& pg, const WeightVector* weights,
                               const std::map<Proposition, bool>& evidence);

/// Defensive structural check: And factors join one g to p inputs, Or
/// factors one p to g inputs, unary factors sit on p nodes. Throws
/// std::logic_error on violation.
void assert_bipartite(const FactorGraph& fg);

}  // namespace hornbp
