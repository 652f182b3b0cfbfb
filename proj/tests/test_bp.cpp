#include <doctest.h>

#include <random>
#include <string>

#include "hornbp/compile.hpp"
#include "hornbp/factor_graph.hpp"
#include "hornbp/ground.hpp"
#include "hornbp/infer.hpp"
#include "hornbp/parse.hpp"
#include "oracles.hpp"

using namespace hornbp;

namespace {

FactorGraph graph_for(const std::string& kb_text, const std::string& target,
                      const std::map<Proposition, bool>& evidence = {}) {
  KnowledgeBase kb = parse_kb(kb_text);
  PropositionGraph pg = ground(compile(kb), kb, {parse_proposition(target)}, {});
  return build_factor_graph(pg, nullptr, evidence);
}

double prob_of(const Marginals& m, const std::string& prop) {
  return m.probs.at(parse_proposition(prop));
}

}  // namespace

TEST_CASE("a lone prior converges immediately") {
  FactorGraph fg = graph_for("pred a/0.\n0.7 :: a.\n", "a");
  Marginals m = run_bp(fg);
  CHECK(m.converged);
  CHECK(m.iterations == 1);
  CHECK(prob_of(m, "a") == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("reciprocal liking dates with the weaker prior") {
  FactorGraph fg = graph_for(
      "pred likes/2. pred date/2.\nlikes(jack, jill).\n0.9 :: likes(jill, jack).\n"
      "date(X, Y) <- likes(X, Y), likes(Y, X).\n",
      "date(jack, jill)");
  Marginals m = run_bp(fg);
  CHECK(m.converged);
  CHECK(prob_of(m, "date(jack, jill)") == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("certain chains stay certain") {
  FactorGraph fg = graph_for("pred a/0. pred b/0. pred c/0.\na.\nb <- a.\nc <- b.\n", "c");
  Marginals m = run_bp(fg);
  CHECK(m.converged);
  CHECK(prob_of(m, "c") == 1.0);
}

TEST_CASE("belief propagation is exact on random trees") {
  BpOptions opts;
  opts.tol = 1e-12;
  opts.max_iters = 300;
  for (unsigned seed = 1; seed <= 12; ++seed) {
    CAPTURE(seed);
    std::mt19937 rng(seed);
    FactorGraph fg = oracles::random_tree_graph(rng, 10);
    std::vector<double> exact = oracles::enumerate_marginals(fg);
    Marginals m = run_bp(fg, opts);
    REQUIRE(m.converged);
    for (int p = 0; p < fg.num_props; ++p) {
      CAPTURE(p);
      CHECK(m.probs.at(fg.props[p]) == doctest::Approx(exact[p]).epsilon(1e-10));
    }
  }
}

TEST_CASE("schedules agree at tree fixed points") {
  for (unsigned seed = 3; seed <= 8; ++seed) {
    std::mt19937 rng(seed);
    FactorGraph fg = oracles::random_tree_graph(rng, 10);
    BpOptions seq;
    seq.tol = 1e-12;
    seq.max_iters = 500;
    BpOptions syn = seq;
    syn.schedule = Schedule::Synchronous;
    Marginals a = run_bp(fg, seq);
    Marginals b = run_bp(fg, syn);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (int p = 0; p < fg.num_props; ++p)
      CHECK(a.probs.at(fg.props[p]) == doctest::Approx(b.probs.at(fg.props[p])).epsilon(1e-9));
  }
}

TEST_CASE("damping does not move the fixed point") {
  std::mt19937 rng(17);
  FactorGraph fg = oracles::random_tree_graph(rng, 10);
  std::vector<double> exact = oracles::enumerate_marginals(fg);
  BpOptions opts;
  opts.damping = 0.3;
  opts.tol = 1e-12;
  opts.max_iters = 1000;
  Marginals m = run_bp(fg, opts);
  REQUIRE(m.converged);
  for (int p = 0; p < fg.num_props; ++p)
    CHECK(m.probs.at(fg.props[p]) == doctest::Approx(exact[p]).epsilon(1e-9));
}

TEST_CASE("exact enumeration matches the independent oracle") {
  for (unsigned seed = 21; seed <= 26; ++seed) {
    CAPTURE(seed);
    std::mt19937 rng(seed);
    FactorGraph fg = oracles::random_loopy_graph(rng, 12);
    std::vector<double> exact = oracles::enumerate_marginals(fg);
    Marginals m = brute_force_marginals(fg);
    CHECK(m.converged);
    CHECK(m.iterations == 0);
    for (int p = 0; p < fg.num_props; ++p)
      CHECK(m.probs.at(fg.props[p]) == doctest::Approx(exact[p]).epsilon(1e-12));
  }
}

TEST_CASE("loopy graphs stay close to exact marginals when converged") {
  int converged = 0;
  for (unsigned seed = 41; seed <= 46; ++seed) {
    CAPTURE(seed);
    std::mt19937 rng(seed);
    FactorGraph fg = oracles::random_loopy_graph(rng, 13);
    CHECK(oracles::has_cycle(fg));
    BpOptions opts;
    opts.damping = 0.5;
    Marginals m = run_bp(fg, opts);
    if (!m.converged) continue;
    ++converged;
    std::vector<double> exact = oracles::enumerate_marginals(fg);
    for (int p = 0; p < fg.num_props; ++p)
      CHECK(std::abs(m.probs.at(fg.props[p]) - exact[p]) <= 0.05);
  }
  CHECK(converged >= 4);
}

TEST_CASE("enumeration rejects oversized graphs") {
  auto priors_graph = [](int n) {
    FactorGraph fg;
    fg.num_props = n;
    for (int i = 0; i < n; ++i) {
      fg.props.push_back(oracles::var_prop(i));
      Factor f;
      f.kind = FactorKind::Prior;
      f.output = i;
      f.prior = 0.5;
      fg.factors.push_back(f);
    }
    return fg;
  };
  CHECK_THROWS_WITH_AS(brute_force_marginals(priors_graph(26)),
                       "graph has 26 variables, exceeding the exact enumeration cap 25",
                       EngineError);
  // The cap is inclusive: a graph exactly at the cap still enumerates.
  CHECK_THROWS_WITH_AS(brute_force_marginals(priors_graph(12), 11),
                       "graph has 12 variables, exceeding the exact enumeration cap 11",
                       EngineError);
  CHECK_NOTHROW(brute_force_marginals(priors_graph(12), 12));
}

TEST_CASE("contradictory evidence") {
  const char* kb = "pred a/0. pred b/0.\na.\nb <- a.\n";
  std::map<Proposition, bool> ev{{Proposition{"a", {}}, true}, {Proposition{"b", {}}, false}};
  FactorGraph fg = graph_for(kb, "b", ev);

  SUBCASE("enumeration refuses") {
    CHECK_THROWS_WITH_AS(brute_force_marginals(fg), "inconsistent evidence", EngineError);
  }
  SUBCASE("message passing smooths and warns") {
    Marginals m = run_bp(fg);
    bool low_mass = false;
    for (const std::string& w : m.warnings) low_mass |= w.find("low_mass") == 0;
    CHECK(low_mass);
  }
}

TEST_CASE("iteration cap reports non-convergence") {
  std::mt19937 rng(99);
  FactorGraph fg = oracles::random_loopy_graph(rng, 13);
  BpOptions opts;
  opts.max_iters = 1;
  opts.tol = 1e-15;
  Marginals m = run_bp(fg, opts);
  CHECK(!m.converged);
  CHECK(m.iterations == 1);
  REQUIRE(!m.warnings.empty());
  CHECK(m.warnings[0] == "bp did not converge within 1 iterations");
}

TEST_CASE("learned disjunctions propagate their potential") {
  KnowledgeBase kb = parse_kb(
      "pred a/0. pred b/0. pred c/0.\n0.6 :: a.\n0.3 :: b.\n"
      "learned :: c <- a.\nlearned :: c <- b.\n");
  PropositionGraph pg = ground(compile(kb), kb, {Proposition{"c", {}}}, {});
  WeightVector w;
  w.set("bias:r1", -0.5);
  w.set("act:r1", 1.0);
  w.set("act:r2", 2.0);
  w.set("pat:c/0", 0.25);
  FactorGraph fg = build_factor_graph(pg, &w, {});
  std::vector<double> exact = oracles::enumerate_marginals(fg);
  BpOptions opts;
  opts.tol = 1e-12;
  Marginals m = run_bp(fg, opts);
  REQUIRE(m.converged);
  for (int p = 0; p < fg.num_props; ++p)
    CHECK(m.probs.at(fg.props[p]) == doctest::Approx(exact[p]).epsilon(1e-10));
}
