#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "hornbp/case_split.hpp"
#include "hornbp/compile.hpp"
#include "hornbp/factor_graph.hpp"
#include "hornbp/infer.hpp"

namespace hornbp {

/// Raised for malformed external data files (JSONL records); the message
/// carries the offending line number.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GroupObservation {
  std::string link;  // source rule id of the licensing group
  bool value = false;
};

/// One fully observed disjunction-site observation: the conclusion's value
/// together with the values of all its licensing groups.
struct TrainingExample {
  bool target = false;
  std::vector<GroupObservation> groups;  // nonempty
  double weight = 1.0;
  std::string pattern;  // conclusion pattern feature id; empty = none
};

struct FitOptions {
  double lr = 0.1;
  int epochs = 100;
  double l2 = 0.0;
  // Halve the step and retry whenever the penalized objective would drop;
  // guarantees a monotone objective trace.
  bool halve_on_decrease = true;
};

struct FitResult {
  WeightVector weights;
  double mean_log_likelihood = 0.0;
  std::vector<double> objective_trace;  // penalized objective after each epoch
};

/// Feature count vector of one example (bias/act per group link, plus the
/// pattern feature once per group). Exposed for gradient tests.
std::map<std::string, double> example_features(const TrainingExample& e);

/// Model score s(e); P(target=1 | groups) = logistic(s).
double example_score(const TrainingExample& e, const WeightVector& w);

/// Weighted conditional log-likelihood of the data (no penalty).
double log_likelihood(const std::vector<TrainingExample>& data, const WeightVector& w);

/// Gradient of log_likelihood minus l2 * w.
WeightVector log_likelihood_gradient(const std::vector<TrainingExample>& data,
                                     const WeightVector& w, double l2);

/// Full-batch gradient ascent from zero weights. Deterministic for fixed
/// data order. Throws EngineError on a non-finite objective (divergence).
FitResult fit_weights(const std::vector<TrainingExample>& data, const FitOptions& opts = {});

/// Max relative error between the analytic log-likelihood gradient and
/// central finite differences with step h, over all features in the data.
double grad_check(const std::vector<TrainingExample>& data, const WeightVector& w, double h);

/// An externally supplied candidate logical form with its parser score.
struct ParseCandidate {
  std::string id;
  double parser_score = 0.0;
  std::map<Proposition, bool> assume;
  std::vector<Proposition> ask;
};

/// Everything the reasoning engine needs to score a logical form.
struct EngineContext {
  const KnowledgeBase* kb = nullptr;
  const ImplicationGraph* graph = nullptr;
  const WeightVector* weights = nullptr;
  BpOptions bp;
  GroundOptions ground;
  bool use_oracle = false;
  int oracle_cap = 25;
};

/// Joint probability of an assumption set under the engine, by the chain
/// rule over the assumptions in proposition order (each conditioned on the
/// previous ones as evidence).
double assumption_probability(const std::map<Proposition, bool>& assume,
                              const EngineContext& ctx);

/// Posterior over candidates: proportional to parser_score times the
/// engine probability of the candidate's assumptions. Throws EngineError
/// ("no viable candidate") when every product is zero.
std::vector<double> rescore_parses(const std::vector<ParseCandidate>& candidates,
                                   const EngineContext& ctx);

enum class EmMode { OneBest, NBest };

/// Harvest training examples from candidate parses: one example per assumed
/// proposition that has licensing groups, group values taken from the
/// certainty closure of the assumptions plus prior-1 facts. `1-best` keeps
/// the argmax-posterior candidate per list (ties: higher score, then id);
/// `n-best` keeps all, weighted by posterior.
std::vector<TrainingExample> em_step(const std::vector<std::vector<ParseCandidate>>& corpus,
                                     EmMode mode, const EngineContext& ctx);

/// One JSON record per line:
///   {"target":{"prop":"p(a)","value":true},
///    "groups":[{"link":"r1","value":true}, ...], "weight":1.0}
/// weight is optional. Throws DataError naming the 1-based line.
std::vector<TrainingExample> load_training_jsonl(std::istream& in, const std::string& name);

/// One JSON record per line:
///   {"id":"c1","score":0.6,"assume":["want(j1,apple)"],"ask":["ok(j1)"]}
std::vector<ParseCandidate> load_candidates_jsonl(std::istream& in, const std::string& name);

/// Weights serialize as a flat JSON object {feature id: value}.
std::string serialize_weights(const WeightVector& w);
WeightVector parse_weights_json(const std::string& text, const std::string& name);

}  // namespace hornbp
