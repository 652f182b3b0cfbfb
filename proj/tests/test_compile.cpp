#include <doctest.h>

#include "hornbp/compile.hpp"
#include "hornbp/parse.hpp"

using namespace hornbp;

TEST_CASE("fragment classification") {
  KnowledgeBase kb = parse_kb(
      "pred p/1. pred q/1. pred r/2. pred s/1.\n"
      "q(X) <- p(X).\n"
      "s(X) <- r(X, Y).\n"
      "p(X) | q(X) <- s(X).\n");
  CHECK(classify(kb.rules[0]) == FragmentTag::Direct);
  CHECK(classify(kb.rules[1]) == FragmentTag::Query);
  CHECK(classify(kb.rules[2]) == FragmentTag::Planning);
}

TEST_CASE("rules merge into DNF links by conclusion pattern") {
  KnowledgeBase kb = parse_kb(
      "pred rain/1. pred u/1. pred w/1. pred ok/1.\n"
      "rain(d).\n"
      "u(X) | w(X) <- rain(X).\n"
      "ok(X) <- u(X).\n"
      "ok(X) <- w(X).\n");
  ImplicationGraph g = compile(kb);
  REQUIRE(g.links.size() == 1);
  const CompiledRule& ok = g.links.begin()->second;
  CHECK(g.links.begin()->first == "ok/1:v0");
  REQUIRE(ok.clauses.size() == 2);
  CHECK(ok.clauses[0].source_rule == "r2");
  CHECK(ok.clauses[1].source_rule == "r3");
  CHECK(ok.fragment == FragmentTag::Direct);
  REQUIRE(g.planning_rules.size() == 1);
  CHECK(g.planning_rules[0].id == "r1");
}

TEST_CASE("pattern keys normalize variable names but not equality shape") {
  Atom xy{"p", {Term::variable("X"), Term::variable("Y")}};
  Atom ab{"p", {Term::variable("A"), Term::variable("B")}};
  Atom xx{"p", {Term::variable("X"), Term::variable("X")}};
  Atom xc{"p", {Term::variable("X"), Term::constant("c")}};
  CHECK(pattern_key(xy) == pattern_key(ab));
  CHECK(pattern_key(xy) != pattern_key(xx));
  CHECK(pattern_key(xy) != pattern_key(xc));
  CHECK(pattern_key(xy).rfind("p/2:", 0) == 0);
}

TEST_CASE("clause variables are renamed apart per link") {
  KnowledgeBase kb = parse_kb(
      "pred a/1. pred b/1. pred out/1.\n"
      "out(N) <- a(N).\n"
      "out(M) <- b(M).\n");
  ImplicationGraph g = compile(kb);
  const CompiledRule& link = g.links.begin()->second;
  REQUIRE(link.clauses.size() == 2);
  // Both clauses must be expressed over the shared conclusion pattern.
  const std::string pattern_var = link.conclusion_pattern.args[0].name;
  CHECK(link.clauses[0].premise[0].args[0].name == pattern_var);
  CHECK(link.clauses[1].premise[0].args[0].name == pattern_var);
}

TEST_CASE("existentials survive compilation per clause") {
  KnowledgeBase kb = parse_kb(
      "pred want/2. pred competing/2.\n"
      "competing(X1, X2) <- want(X1, X3), want(X2, X3).\n");
  ImplicationGraph g = compile(kb);
  const CompiledRule& link = g.links.begin()->second;
  CHECK(link.fragment == FragmentTag::Query);
  REQUIRE(link.clauses.size() == 1);
  CHECK(link.clauses[0].existentials.size() == 1);
}

TEST_CASE("compile and expand are inverse") {
  const char* texts[] = {
      "pred likes/2. pred date/2.\nlikes(a, b).\ndate(X, Y) <- likes(X, Y), likes(Y, X).\n",
      "pred rain/1. pred u/1. pred w/1. pred ok/1.\nrain(d).\n"
      "u(X) | w(X) <- rain(X).\nok(X) <- u(X).\nok(X) <- w(X).\n",
      "pred a/0. pred b/0. pred c/0.\na.\nlearned :: b <- a.\nc <- b.\n",
  };
  for (const char* text : texts) {
    KnowledgeBase kb = parse_kb(text);
    ImplicationGraph g = compile(kb);
    std::vector<Rule> rules = expand(g);
    KnowledgeBase kb2 = kb;
    kb2.rules = rules;
    CHECK(compile(kb2) == g);
  }
}

TEST_CASE("learned mode is preserved on clauses") {
  KnowledgeBase kb = parse_kb("pred a/0. pred b/0. pred c/0.\nlearned :: c <- a.\nc <- b.\n");
  ImplicationGraph g = compile(kb);
  const CompiledRule& link = g.links.begin()->second;
  CHECK(link.clauses[0].mode == WeightMode::Learned);
  CHECK(link.clauses[1].mode == WeightMode::Deterministic);
}
