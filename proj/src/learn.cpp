#include "hornbp/learn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <set>

#include <json.hpp>

#include "hornbp/ground.hpp"
#include "hornbp/parse.hpp"

namespace hornbp {

namespace {

double log_sigmoid(double s) {
  return s >= 0.0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
}

double sigmoid(double s) {
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

double penalized_objective(const std::vector<TrainingExample>& data, const WeightVector& w,
                           double l2) {
  double pen = 0.0;
  for (const auto& [id, v] : w.w) pen += v * v;
  return log_likelihood(data, w) - 0.5 * l2 * pen;
}

}  // namespace

std::map<std::string, double> example_features(const TrainingExample& e) {
  std::map<std::string, double> x;
  for (const GroupObservation& g : e.groups) {
    x[feature_bias(g.link)] += 1.0;
    if (g.value) x[feature_act(g.link)] += 1.0;
    if (!e.pattern.empty()) x[e.pattern] += 1.0;
  }
  return x;
}

double example_score(const TrainingExample& e, const WeightVector& w) {
  double s = 0.0;
  for (const GroupObservation& g : e.groups) {
    s += w.get(feature_bias(g.link));
    if (g.value) s += w.get(feature_act(g.link));
    if (!e.pattern.empty()) s += w.get(e.pattern);
  }
  return s;
}

double log_likelihood(const std::vector<TrainingExample>& data, const WeightVector& w) {
  double ll = 0.0;
  for (const TrainingExample& e : data) {
    double s = example_score(e, w);
    ll += e.weight * log_sigmoid(e.target ? s : -s);
  }
  return ll;
}

WeightVector log_likelihood_gradient(const std::vector<TrainingExample>& data,
                                     const WeightVector& w, double l2) {
  WeightVector grad;
  for (const TrainingExample& e : data) {
    double coef = e.weight * ((e.target ? 1.0 : 0.0) - sigmoid(example_score(e, w)));
    for (const auto& [id, count] : example_features(e)) grad.w[id] += coef * count;
  }
  if (l2 > 0.0)
    for (const auto& [id, v] : w.w) grad.w[id] -= l2 * v;
  return grad;
}

FitResult fit_weights(const std::vector<TrainingExample>& data, const FitOptions& opts) {
  if (data.empty()) throw EngineError("training data is empty");
  for (const TrainingExample& e : data)
    if (e.groups.empty()) throw EngineError("training example has no groups");

  FitResult result;
  WeightVector& w = result.weights;
  double lr = opts.lr;
  double current = penalized_objective(data, w, opts.l2);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    WeightVector grad = log_likelihood_gradient(data, w, opts.l2);
    WeightVector stepped;
    double next = 0.0;
    auto try_step = [&](double rate) {
      stepped = w;
      for (const auto& [id, g] : grad.w) stepped.w[id] += rate * g;
      next = penalized_objective(data, stepped, opts.l2);
    };
    try_step(lr);
    if (opts.halve_on_decrease) {
      while (!(next >= current) && lr > 1e-12) {
        lr /= 2.0;
        try_step(lr);
      }
      if (!(next >= current)) {  // no improving step left; stay put
        stepped = w;
        next = current;
      }
    }
    if (!std::isfinite(next))
      throw EngineError("training diverged (non-finite objective); try a smaller learning rate");
    w = std::move(stepped);
    current = next;
    result.objective_trace.push_back(current);
  }
  double total = 0.0;
  for (const TrainingExample& e : data) total += e.weight;
  result.mean_log_likelihood = total > 0.0 ? log_likelihood(data, w) / total : 0.0;
  return result;
}

double grad_check(const std::vector<TrainingExample>& data, const WeightVector& w, double h) {
  WeightVector analytic = log_likelihood_gradient(data, w, 0.0);
  double worst = 0.0;
  for (const auto& [id, ga] : analytic.w) {
    WeightVector lo = w, hi = w;
    lo.w[id] = lo.get(id) - h;
    hi.w[id] = hi.get(id) + h;
    double gn = (log_likelihood(data, hi) - log_likelihood(data, lo)) / (2.0 * h);
    double rel = std::abs(ga - gn) / std::max({1.0, std::abs(ga), std::abs(gn)});
    worst = std::max(worst, rel);
  }
  return worst;
}

double assumption_probability(const std::map<Proposition, bool>& assume,
                              const EngineContext& ctx) {
  if (assume.empty()) return 1.0;
  std::vector<Proposition> targets;
  for (const auto& [prop, value] : assume) targets.push_back(prop);
  PropositionGraph pg = ground(*ctx.graph, *ctx.kb, targets, ctx.ground);

  double prob = 1.0;
  std::map<Proposition, bool> evidence;
  for (const auto& [prop, value] : assume) {
    FactorGraph fg = build_factor_graph(pg, ctx.weights, evidence);
    Marginals m = ctx.use_oracle ? brute_force_marginals(fg, ctx.oracle_cap) : run_bp(fg, ctx.bp);
    double p1 = std::clamp(m.probs.at(prop), 0.0, 1.0);
    prob *= value ? p1 : 1.0 - p1;
    if (prob == 0.0) break;  // conditioning further would be ill-defined
    evidence.emplace(prop, value);
  }
  return prob;
}

std::vector<double> rescore_parses(const std::vector<ParseCandidate>& candidates,
                                   const EngineContext& ctx) {
  if (candidates.empty()) throw EngineError("no candidates to rescore");
  std::vector<double> product;
  double z = 0.0;
  for (const ParseCandidate& c : candidates) {
    if (!(c.parser_score >= 0.0) || !std::isfinite(c.parser_score))
      throw EngineError("candidate " + c.id + " has an invalid parser score");
    double p = c.parser_score * assumption_probability(c.assume, ctx);
    product.push_back(p);
    z += p;
  }
  if (z <= 0.0) throw EngineError("no viable candidate");
  for (double& p : product) p /= z;
  return product;
}

namespace {

// Certainty closure on the grounded graph: certain leaves (prior 1), stated
// prior-1 facts, and assumed-true propositions, forward-chained through
// groups whose members are all certain.
std::set<Proposition> certainty_closure(const PropositionGraph& pg, const KnowledgeBase& kb,
                                        const std::map<Proposition, bool>& assume) {
  std::set<Proposition> certain;
  for (const auto& [prop, value] : assume)
    if (value) certain.insert(prop);
  for (size_t i = 0; i < pg.props.size(); ++i) {
    if (pg.or_links[i].empty() && pg.priors[i] == 1.0) certain.insert(pg.props[i]);
    auto it = kb.facts.find(pg.props[i]);
    if (it != kb.facts.end() && it->second.prior == 1.0) certain.insert(pg.props[i]);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const GroundGroup& g : pg.groups) {
      if (certain.count(g.conclusion)) continue;
      bool all = true;
      for (const Proposition& m : g.members) all = all && certain.count(m) > 0;
      if (all) {
        certain.insert(g.conclusion);
        changed = true;
      }
    }
  }
  return certain;
}

void harvest_examples(const ParseCandidate& cand, double weight, const EngineContext& ctx,
                      std::vector<TrainingExample>& out) {
  if (cand.assume.empty()) return;
  std::vector<Proposition> targets;
  for (const auto& [prop, value] : cand.assume) targets.push_back(prop);
  PropositionGraph pg = ground(*ctx.graph, *ctx.kb, targets, ctx.ground);
  std::set<Proposition> certain = certainty_closure(pg, *ctx.kb, cand.assume);
  for (const auto& [prop, value] : cand.assume) {
    int idx = pg.index_of(prop);
    if (idx < 0 || pg.or_links[idx].empty()) continue;
    TrainingExample e;
    e.target = value;
    e.weight = weight;
    e.pattern = feature_pattern(prop.pred, prop.args.size());
    for (int g : pg.or_links[idx]) {
      const GroundGroup& grp = pg.groups[g];
      bool all = true;
      for (const Proposition& m : grp.members) all = all && certain.count(m) > 0;
      e.groups.push_back(GroupObservation{grp.source_rule, all});
    }
    out.push_back(std::move(e));
  }
}

}  // namespace

std::vector<TrainingExample> em_step(const std::vector<std::vector<ParseCandidate>>& corpus,
                                     EmMode mode, const EngineContext& ctx) {
  std::vector<TrainingExample> out;
  for (const std::vector<ParseCandidate>& list : corpus) {
    std::vector<double> posterior = rescore_parses(list, ctx);
    if (mode == EmMode::OneBest) {
      size_t best = 0;
      for (size_t i = 1; i < list.size(); ++i) {
        if (posterior[i] > posterior[best]) {
          best = i;
        } else if (posterior[i] == posterior[best]) {
          if (list[i].parser_score > list[best].parser_score ||
              (list[i].parser_score == list[best].parser_score && list[i].id < list[best].id))
            best = i;
        }
      }
      harvest_examples(list[best], 1.0, ctx, out);
    } else {
      for (size_t i = 0; i < list.size(); ++i)
        if (posterior[i] > 0.0) harvest_examples(list[i], posterior[i], ctx, out);
    }
  }
  return out;
}

namespace {

using nlohmann::json;

[[noreturn]] void data_fail(const std::string& name, size_t line, const std::string& msg) {
  throw DataError(name + ":" + std::to_string(line) + ": " + msg);
}

Proposition parse_prop_or_fail(const std::string& text, const std::string& name, size_t line) {
  try {
    return parse_proposition(text);
  } catch (const ParseError& e) {
    data_fail(name, line, "bad proposition '" + text + "': " + e.what());
  }
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::vector<TrainingExample> load_training_jsonl(std::istream& in, const std::string& name) {
  std::vector<TrainingExample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      data_fail(name, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("target") || !j.contains("groups"))
      data_fail(name, line_no, "record needs 'target' and 'groups'");
    const json& t = j["target"];
    if (!t.is_object() || !t.contains("prop") || !t.contains("value") ||
        !t["prop"].is_string() || !t["value"].is_boolean())
      data_fail(name, line_no, "'target' needs a string 'prop' and boolean 'value'");
    TrainingExample e;
    Proposition prop = parse_prop_or_fail(t["prop"].get<std::string>(), name, line_no);
    e.pattern = feature_pattern(prop.pred, prop.args.size());
    e.target = t["value"].get<bool>();
    const json& groups = j["groups"];
    if (!groups.is_array() || groups.empty())
      data_fail(name, line_no, "'groups' must be a nonempty array");
    for (const json& g : groups) {
      if (!g.is_object() || !g.contains("link") || !g.contains("value") ||
          !g["link"].is_string() || !g["value"].is_boolean())
        data_fail(name, line_no, "each group needs a string 'link' and boolean 'value'");
      e.groups.push_back(GroupObservation{g["link"].get<std::string>(), g["value"].get<bool>()});
    }
    if (j.contains("weight")) {
      if (!j["weight"].is_number()) data_fail(name, line_no, "'weight' must be a number");
      e.weight = j["weight"].get<double>();
      if (!(e.weight >= 0.0) || !std::isfinite(e.weight))
        data_fail(name, line_no, "'weight' must be finite and nonnegative");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ParseCandidate> load_candidates_jsonl(std::istream& in, const std::string& name) {
  std::vector<ParseCandidate> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      data_fail(name, line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("score") || !j["id"].is_string() ||
        !j["score"].is_number())
      data_fail(name, line_no, "record needs a string 'id' and numeric 'score'");
    ParseCandidate c;
    c.id = j["id"].get<std::string>();
    c.parser_score = j["score"].get<double>();
    if (!(c.parser_score >= 0.0) || !std::isfinite(c.parser_score))
      data_fail(name, line_no, "'score' must be finite and nonnegative");
    if (j.contains("assume")) {
      if (!j["assume"].is_array()) data_fail(name, line_no, "'assume' must be an array");
      for (const json& a : j["assume"]) {
        if (!a.is_string()) data_fail(name, line_no, "'assume' entries must be strings");
        c.assume.emplace(parse_prop_or_fail(a.get<std::string>(), name, line_no), true);
      }
    }
    if (j.contains("ask")) {
      if (!j["ask"].is_array()) data_fail(name, line_no, "'ask' must be an array");
      for (const json& a : j["ask"]) {
        if (!a.is_string()) data_fail(name, line_no, "'ask' entries must be strings");
        c.ask.push_back(parse_prop_or_fail(a.get<std::string>(), name, line_no));
      }
    }
    if (c.assume.empty() && c.ask.empty())
      data_fail(name, line_no, "candidate has an empty logical form");
    out.push_back(std::move(c));
  }
  return out;
}

std::string serialize_weights(const WeightVector& w) {
  json j = json::object();
  for (const auto& [id, v] : w.w) j[id] = v;
  return j.dump(2) + "\n";
}

WeightVector parse_weights_json(const std::string& text, const std::string& name) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(name + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw DataError(name + ": weights must be a JSON object");
  WeightVector w;
  for (const auto& [id, v] : j.items()) {
    if (!v.is_number()) throw DataError(name + ": weight '" + id + "' must be a number");
    w.w[id] = v.get<double>();
  }
  return w;
}

}  // namespace hornbp
