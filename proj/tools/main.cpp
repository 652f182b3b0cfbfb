#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hornbp/case_split.hpp"
#include "hornbp/compile.hpp"
#include "hornbp/dot.hpp"
#include "hornbp/factor_graph.hpp"
#include "hornbp/ground.hpp"
#include "hornbp/infer.hpp"
#include "hornbp/kb.hpp"
#include "hornbp/learn.hpp"
#include "hornbp/parse.hpp"
#include "hornbp/query.hpp"

namespace {

using nlohmann::json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("error while writing " + path);
}

// Returns false (after printing diagnostics) when the KB is invalid.
bool load_kb(const std::string& path, hornbp::KnowledgeBase& kb) {
  std::string text = read_file(path);
  try {
    kb = hornbp::parse_kb(text);
  } catch (const hornbp::ParseError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return false;
  }
  std::vector<hornbp::Diagnostic> diags = hornbp::validate_kb(kb);
  if (!diags.empty()) {
    for (const hornbp::Diagnostic& d : diags) std::cerr << path << ": " << d.message << "\n";
    return false;
  }
  return true;
}

// The grounding answer() itself performs for the bp/oracle path; used to
// render the factor graph on --export-dot.
hornbp::PropositionGraph ground_for_export(const hornbp::KnowledgeBase& kb,
                                           const hornbp::ImplicationGraph& graph,
                                           const hornbp::Query& query,
                                           const hornbp::AnswerOptions& opts) {
  std::vector<hornbp::Proposition> targets;
  for (const auto& [prop, value] : query.assumptions) {
    (void)value;
    targets.push_back(prop);
  }
  for (const hornbp::Proposition& prop : query.questions) targets.push_back(prop);
  return hornbp::ground(graph, kb, targets, opts.ground);
}

struct CheckArgs {
  std::string kb_path;
  std::string export_dot;
};

int run_check(const CheckArgs& args) {
  hornbp::KnowledgeBase kb;
  if (!load_kb(args.kb_path, kb)) return 1;
  hornbp::ImplicationGraph graph = hornbp::compile(kb);
  if (!args.export_dot.empty())
    write_file(args.export_dot, hornbp::implication_graph_dot(graph));
  std::cout << "ok: " << kb.predicates.size() << " predicates, " << kb.facts.size()
            << " facts, " << kb.rules.size() << " rules, " << graph.links.size()
            << " compiled links, " << graph.planning_rules.size() << " disjunctive rules\n";
  return 0;
}

struct QueryArgs {
  std::string kb_path;
  std::string query_path;
  std::string engine = "auto";
  bool engine_set = false;
  double tol = 1e-6;
  bool tol_set = false;
  int max_iters = 100;
  bool max_iters_set = false;
  std::string schedule = "sequential";
  bool schedule_set = false;
  double damping = 0.0;
  bool damping_set = false;
  int depth_limit = 64;
  bool depth_limit_set = false;
  double open_world_prior = 0.0;
  long long branch_cap = 1LL << 16;
  bool branch_cap_set = false;
  std::string format = "json";
  std::string export_dot;
  std::string weights_path;
};

int run_query(const QueryArgs& args) {
  hornbp::KnowledgeBase kb;
  if (!load_kb(args.kb_path, kb)) return 1;
  hornbp::ImplicationGraph graph = hornbp::compile(kb);

  hornbp::Query query;
  try {
    query = hornbp::parse_query(read_file(args.query_path));
  } catch (const hornbp::ParseError& e) {
    std::cerr << args.query_path << ":" << e.what() << "\n";
    return 1;
  }

  hornbp::AnswerOptions opts;
  hornbp::apply_query_options(query, opts);

  // Explicit command-line flags win over query-file options.
  if (args.engine_set) opts.engine = hornbp::parse_engine_name(args.engine);
  if (args.tol_set) {
    if (!(args.tol > 0)) throw UsageError("--tol must be positive");
    opts.bp.tol = args.tol;
  }
  if (args.max_iters_set) {
    if (args.max_iters <= 0) throw UsageError("--max-iters must be positive");
    opts.bp.max_iters = args.max_iters;
  }
  if (args.schedule_set) {
    if (args.schedule == "sequential") {
      opts.bp.schedule = hornbp::Schedule::Sequential;
    } else if (args.schedule == "synchronous") {
      opts.bp.schedule = hornbp::Schedule::Synchronous;
    } else {
      throw UsageError("--schedule must be sequential or synchronous");
    }
  }
  if (args.damping_set) {
    if (!(args.damping >= 0.0 && args.damping < 1.0))
      throw UsageError("--damping must be in [0,1)");
    opts.bp.damping = args.damping;
  }
  if (args.depth_limit_set) {
    if (args.depth_limit <= 0) throw UsageError("--depth-limit must be positive");
    opts.ground.depth_limit = args.depth_limit;
  }
  if (args.branch_cap_set) {
    if (args.branch_cap <= 0) throw UsageError("--branch-cap must be positive");
    opts.branch_cap = args.branch_cap;
  }
  opts.ground.default_leaf_prior = args.open_world_prior;

  hornbp::WeightVector weights;
  if (!args.weights_path.empty()) {
    weights = hornbp::parse_weights_json(read_file(args.weights_path), args.weights_path);
    opts.weights = &weights;
  }

  hornbp::Answer ans = hornbp::answer(kb, graph, query, opts);

  if (!args.export_dot.empty()) {
    hornbp::PropositionGraph pg = ground_for_export(kb, graph, query, opts);
    hornbp::FactorGraph fg = hornbp::build_factor_graph(pg, opts.weights, query.assumptions);
    write_file(args.export_dot, hornbp::factor_graph_dot(fg));
  }

  if (args.format == "json") {
    json out;
    out["answers"] = json::array();
    for (const auto& [prop, p] : ans.answers)
      out["answers"].push_back({{"prop", prop.text()}, {"p", p}});
    out["engine"] = ans.engine;
    out["converged"] = ans.diagnostics.converged;
    out["iterations"] = ans.diagnostics.iterations;
    out["residual"] = ans.diagnostics.residual;
    out["warnings"] = ans.diagnostics.warnings;
    if (ans.cases) out["branches"] = ans.cases->explored;
    std::cout << out.dump() << "\n";
  } else if (args.format == "text") {
    for (const auto& [prop, p] : ans.answers)
      std::cout << prop.text() << " = " << hornbp::format_double(p) << "\n";
    std::cout << "engine: " << ans.engine << (ans.diagnostics.converged ? " (converged in " : " (stopped at ")
              << ans.diagnostics.iterations << " iterations, residual "
              << hornbp::format_double(ans.diagnostics.residual) << ")\n";
    if (ans.cases) std::cout << "branches: " << ans.cases->explored << "\n";
    for (const std::string& w : ans.diagnostics.warnings) std::cout << "warning: " << w << "\n";
  } else {
    throw UsageError("--format must be json or text");
  }
  return 0;
}

struct TrainArgs {
  std::string kb_path;
  std::string data_path;
  std::string out_path = "weights.json";
  double lr = 0.1;
  int epochs = 100;
  double l2 = 0.0;
};

int run_train(const TrainArgs& args) {
  hornbp::KnowledgeBase kb;
  if (!load_kb(args.kb_path, kb)) return 1;
  hornbp::ImplicationGraph graph = hornbp::compile(kb);
  std::set<std::string> known_links;
  for (const auto& [key, rule] : graph.links)
    for (const hornbp::CompiledClause& clause : rule.clauses) known_links.insert(clause.source_rule);

  std::ifstream in(args.data_path);
  if (!in) throw IoError("cannot read " + args.data_path);
  std::vector<hornbp::TrainingExample> data =
      hornbp::load_training_jsonl(in, args.data_path);
  for (const hornbp::TrainingExample& e : data)
    for (const hornbp::GroupObservation& g : e.groups)
      if (!known_links.count(g.link))
        throw hornbp::EngineError("training data references unknown rule id '" + g.link + "'");

  hornbp::FitOptions fit;
  fit.lr = args.lr;
  fit.epochs = args.epochs;
  fit.l2 = args.l2;
  if (!(fit.lr > 0)) throw UsageError("--lr must be positive");
  if (fit.epochs < 0) throw UsageError("--epochs must be nonnegative");
  if (fit.l2 < 0) throw UsageError("--l2 must be nonnegative");

  hornbp::FitResult result = hornbp::fit_weights(data, fit);
  write_file(args.out_path, hornbp::serialize_weights(result.weights));
  std::cout << "mean log-likelihood: " << hornbp::format_double(result.mean_log_likelihood)
            << "\n";
  return 0;
}

struct BenchArgs {
  std::string chain_sizes = "1000,2000,3000,4000,5000,6000,7000,8000,9000,10000";
  int repeats = 5;
  int planning_k = 3;
  unsigned seed = 0;
};

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Propositional chain: n0 is a fact, each n<i> follows from n<i-1>.
hornbp::KnowledgeBase make_chain_kb(int n, unsigned seed) {
  hornbp::KnowledgeBase kb;
  std::mt19937 rng(seed);
  for (int i = 0; i <= n; ++i) {
    std::string name = "n" + std::to_string(i);
    kb.predicates.emplace(hornbp::PredKey{name, 0}, hornbp::Predicate{name, 0, {}});
  }
  double prior = 1.0;
  if (seed != 0) {
    // Deterministic per seed; keeps the instance family parametric.
    prior = 0.5 + 0.5 * (static_cast<double>(rng()) / 4294967295.0);
  }
  hornbp::Proposition base{"n0", {}};
  kb.facts.emplace(base, hornbp::Fact{base, prior});
  for (int i = 1; i <= n; ++i) {
    hornbp::Rule rule;
    rule.id = "r" + std::to_string(i);
    rule.premise.push_back(hornbp::Atom{"n" + std::to_string(i - 1), {}});
    rule.conclusion.push_back(hornbp::Atom{"n" + std::to_string(i), {}});
    rule.recompute_quantifiers();
    kb.rules.push_back(std::move(rule));
  }
  return kb;
}

// k independent two-way disjunctions over one certain fact, with a derived
// conclusion provable from either disjunct of the first split.
hornbp::KnowledgeBase make_planning_kb(int k) {
  hornbp::KnowledgeBase kb;
  auto declare = [&](const std::string& name) {
    kb.predicates.emplace(hornbp::PredKey{name, 0}, hornbp::Predicate{name, 0, {}});
  };
  declare("t");
  declare("ok");
  hornbp::Proposition t{"t", {}};
  kb.facts.emplace(t, hornbp::Fact{t, 1.0});
  int rule_no = 0;
  for (int i = 1; i <= k; ++i) {
    declare("u" + std::to_string(i));
    declare("w" + std::to_string(i));
    hornbp::Rule split;
    split.id = "r" + std::to_string(++rule_no);
    split.premise.push_back(hornbp::Atom{"t", {}});
    split.conclusion.push_back(hornbp::Atom{"u" + std::to_string(i), {}});
    split.conclusion.push_back(hornbp::Atom{"w" + std::to_string(i), {}});
    split.recompute_quantifiers();
    kb.rules.push_back(std::move(split));
  }
  for (const char* side : {"u1", "w1"}) {
    hornbp::Rule derive;
    derive.id = "r" + std::to_string(++rule_no);
    derive.premise.push_back(hornbp::Atom{side, {}});
    derive.conclusion.push_back(hornbp::Atom{"ok", {}});
    derive.recompute_quantifiers();
    kb.rules.push_back(std::move(derive));
  }
  return kb;
}

int run_bench(const BenchArgs& args) {
  if (args.repeats < 1) throw UsageError("--repeats must be at least 1");
  if (args.planning_k < 1 || args.planning_k > 16)
    throw UsageError("--planning-k must be in 1..16");
  std::vector<int> sizes;
  std::stringstream ss(args.chain_sizes);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    int n = 0;
    try {
      n = std::stoi(piece);
    } catch (const std::exception&) {
      throw UsageError("bad chain size '" + piece + "'");
    }
    if (n < 1) throw UsageError("chain sizes must be positive");
    sizes.push_back(n);
  }
  if (sizes.empty()) throw UsageError("no chain sizes given");

  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) {
    return std::chrono::duration<double, std::milli>(d).count();
  };

  std::cout << "kind,n,ground_ms,bp_ms,branches\n";
  for (int n : sizes) {
    hornbp::KnowledgeBase kb = make_chain_kb(n, args.seed);
    hornbp::ImplicationGraph graph = hornbp::compile(kb);
    hornbp::GroundOptions gopts;
    gopts.depth_limit = n + 2;
    std::vector<hornbp::Proposition> targets{hornbp::Proposition{"n" + std::to_string(n), {}}};
    std::vector<double> ground_times, bp_times;
    for (int r = 0; r < args.repeats; ++r) {
      auto t0 = clock::now();
      hornbp::PropositionGraph pg = hornbp::ground(graph, kb, targets, gopts);
      auto t1 = clock::now();
      hornbp::FactorGraph fg = hornbp::build_factor_graph(pg, nullptr, {});
      hornbp::BpOptions bp;
      bp.max_iters = 1;  // a single sweep; scaling, not convergence
      auto t2 = clock::now();
      hornbp::Marginals m = hornbp::run_bp(fg, bp);
      auto t3 = clock::now();
      (void)m;
      ground_times.push_back(ms(t1 - t0));
      bp_times.push_back(ms(t3 - t2));
    }
    std::cout << "chain," << n << "," << hornbp::format_double(median(ground_times)) << ","
              << hornbp::format_double(median(bp_times)) << ",1\n";
  }

  {
    hornbp::KnowledgeBase kb = make_planning_kb(args.planning_k);
    hornbp::ImplicationGraph graph = hornbp::compile(kb);
    std::vector<hornbp::Proposition> targets{hornbp::Proposition{"ok", {}}};
    std::vector<double> ground_times, split_times;
    long long branches = 0;
    for (int r = 0; r < args.repeats; ++r) {
      auto t0 = clock::now();
      hornbp::PropositionGraph pg = hornbp::ground(graph, kb, targets, hornbp::GroundOptions{});
      auto t1 = clock::now();
      (void)pg;
      hornbp::CaseSplitOptions cs;
      auto t2 = clock::now();
      hornbp::CaseSplitReport report = hornbp::case_split(graph, kb, targets, cs);
      auto t3 = clock::now();
      branches = report.explored;
      ground_times.push_back(ms(t1 - t0));
      split_times.push_back(ms(t3 - t2));
    }
    std::cout << "planning," << args.planning_k << ","
              << hornbp::format_double(median(ground_times)) << ","
              << hornbp::format_double(median(split_times)) << "," << branches << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic reasoning over weighted Horn clauses"};
  app.require_subcommand(1);

  CheckArgs check_args;
  CLI::App* check = app.add_subcommand("check", "Validate a knowledge base");
  check->add_option("--kb", check_args.kb_path, "knowledge base file")->required();
  check->add_option("--export-dot", check_args.export_dot, "write the compiled rule graph as DOT");

  QueryArgs query_args;
  CLI::App* query = app.add_subcommand("query", "Answer a query against a knowledge base");
  query->add_option("--kb", query_args.kb_path, "knowledge base file")->required();
  query->add_option("--query", query_args.query_path, "query file")->required();
  auto* engine_opt =
      query->add_option("--engine", query_args.engine, "bp | oracle | case-split | auto");
  auto* tol_opt = query->add_option("--tol", query_args.tol, "convergence tolerance");
  auto* iters_opt = query->add_option("--max-iters", query_args.max_iters, "iteration cap");
  auto* sched_opt =
      query->add_option("--schedule", query_args.schedule, "sequential | synchronous");
  auto* damp_opt = query->add_option("--damping", query_args.damping, "message damping in [0,1)");
  auto* depth_opt = query->add_option("--depth-limit", query_args.depth_limit, "grounding depth limit");
  query->add_option("--open-world-prior", query_args.open_world_prior,
                    "prior for unknown leaves (default 0, closed world)");
  auto* cap_opt = query->add_option("--branch-cap", query_args.branch_cap, "case-split branch cap");
  query->add_option("--format", query_args.format, "json | text");
  query->add_option("--export-dot", query_args.export_dot, "write the factor graph as DOT");
  query->add_option("--weights", query_args.weights_path, "weights JSON for learned rules");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Fit disjunction weights from observations");
  train->add_option("--kb", train_args.kb_path, "knowledge base file")->required();
  train->add_option("--data", train_args.data_path, "training data (JSON lines)")->required();
  train->add_option("--out", train_args.out_path, "output weights file");
  train->add_option("--lr", train_args.lr, "learning rate");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--l2", train_args.l2, "L2 penalty");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Time grounding and inference on chain KBs");
  bench->add_option("--chain-sizes", bench_args.chain_sizes, "comma-separated chain lengths");
  bench->add_option("--repeats", bench_args.repeats, "runs per size (median reported)");
  bench->add_option("--planning-k", bench_args.planning_k, "independent two-way splits");
  bench->add_option("--seed", bench_args.seed, "seed for chain fact priors (0 = prior 1.0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  query_args.engine_set = engine_opt->count() > 0;
  query_args.tol_set = tol_opt->count() > 0;
  query_args.max_iters_set = iters_opt->count() > 0;
  query_args.schedule_set = sched_opt->count() > 0;
  query_args.damping_set = damp_opt->count() > 0;
  query_args.depth_limit_set = depth_opt->count() > 0;
  query_args.branch_cap_set = cap_opt->count() > 0;

  try {
    if (check->parsed()) return run_check(check_args);
    if (query->parsed()) return run_query(query_args);
    if (train->parsed()) return run_train(train_args);
    if (bench->parsed()) return run_bench(bench_args);
    std::cerr << "no subcommand given\n";
    return 2;
  } catch (const hornbp::DataError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const hornbp::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
