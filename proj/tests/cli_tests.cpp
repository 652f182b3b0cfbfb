#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

// End-to-end checks against the installed binary; the harness passes its
// path in HORNBP_CLI.

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const char* cli = std::getenv("HORNBP_CLI");
  REQUIRE_MESSAGE(cli != nullptr, "HORNBP_CLI must point at the binary");
  std::string cmd = std::string(cli) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult r;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "hornbp-cli-tests";
  fs::create_directories(dir);
  return dir;
}

std::string put(const std::string& name, const std::string& content) {
  fs::path path = scratch_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  REQUIRE(out.good());
  return path.string();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

const char* kDatingKb =
    "pred likes/2 .\n"
    "pred date/2 .\n"
    "likes(jack, jill) .\n"
    "0.9 :: likes(jill, jack) .\n"
    "date(X, Y) <- likes(X, Y), likes(Y, X) .\n";

const char* kUmbrellaKb =
    "pred rain/1 . pred umbrella/1 . pred wet/1 . pred ok/1 .\n"
    "rain(d) .\n"
    "umbrella(X) | wet(X) <- rain(X) .\n"
    "ok(X) <- umbrella(X) .\n"
    "ok(X) <- wet(X) .\n";

const char* kLearnedKb =
    "pred a/0 .\n"
    "pred c/0 .\n"
    "a .\n"
    "learned :: c <- a .\n";

std::string chain_kb(int n) {
  std::string text;
  for (int i = 0; i <= n; ++i) text += "pred n" + std::to_string(i) + "/0 .\n";
  text += "n0 .\n";
  for (int i = 1; i <= n; ++i)
    text += "n" + std::to_string(i) + " <- n" + std::to_string(i - 1) + " .\n";
  return text;
}

}  // namespace

TEST_CASE("check reports knowledge base statistics") {
  std::string kb = put("dating.kb", kDatingKb);
  RunResult r = run_cli("check --kb " + kb);
  CHECK(r.code == 0);
  CHECK(r.output == "ok: 2 predicates, 2 facts, 1 rules, 1 compiled links, 0 disjunctive rules\n");

  SUBCASE("disjunctive rules are counted separately") {
    std::string u = put("umbrella.kb", kUmbrellaKb);
    RunResult s = run_cli("check --kb " + u);
    CHECK(s.code == 0);
    CHECK(s.output ==
          "ok: 4 predicates, 1 facts, 3 rules, 1 compiled links, 1 disjunctive rules\n");
  }
}

TEST_CASE("check surfaces parse and validation diagnostics") {
  std::string bad = put("bad.kb", "pred p/0 .\n1.5 :: p .\n");
  RunResult r = run_cli("check --kb " + bad);
  CHECK(r.code == 1);
  CHECK(r.output.rfind(bad + ":2:", 0) == 0);

  SUBCASE("validation diagnostics name the rule") {
    std::string unsafe = put(
        "unsafe.kb", "pred p/1 .\npred q/1 .\np(a) .\nq(Z) <- p(X) .\n");
    RunResult s = run_cli("check --kb " + unsafe);
    CHECK(s.code == 1);
    CHECK(s.output.rfind(unsafe + ": ", 0) == 0);
    CHECK(s.output.find("unsafe variable Z") != std::string::npos);
    CHECK(s.output.find("r1") != std::string::npos);
  }
}

TEST_CASE("missing input files exit with code 2") {
  RunResult r = run_cli("check --kb /nonexistent/x.kb");
  CHECK(r.code == 2);
  CHECK(r.output == "cannot read /nonexistent/x.kb\n");
}

TEST_CASE("query emits machine-readable json") {
  std::string kb = put("dating.kb", kDatingKb);
  std::string q = put("date.q", "ask date(jack, jill) ?\n");
  RunResult r = run_cli("query --kb " + kb + " --query " + q);
  REQUIRE(r.code == 0);
  json j = json::parse(r.output);
  REQUIRE(j["answers"].size() == 1);
  CHECK(j["answers"][0]["prop"] == "date(jack,jill)");
  CHECK(j["answers"][0]["p"].get<double>() == doctest::Approx(0.9).epsilon(1e-9));
  CHECK(j["engine"] == "bp");
  CHECK(j["converged"] == true);
  CHECK(j["warnings"].is_array());
  CHECK(j.count("branches") == 0);

  SUBCASE("probabilities survive the json round trip bit for bit") {
    std::string tiny = put("tiny.kb", "pred a/0 .\n0.9 :: a .\n");
    std::string ask = put("tiny.q", "ask a ?\n");
    RunResult s = run_cli("query --kb " + tiny + " --query " + ask + " --engine oracle");
    REQUIRE(s.code == 0);
    json out = json::parse(s.output);
    CHECK(out["answers"][0]["p"].get<double>() == 0.9);
    CHECK(out["engine"] == "oracle");
    CHECK(out["iterations"] == 0);
  }
  SUBCASE("text format prints one answer per line") {
    std::string tiny = put("tiny.kb", "pred a/0 .\n0.9 :: a .\n");
    std::string ask = put("tiny.q", "ask a ?\n");
    RunResult s = run_cli("query --kb " + tiny + " --query " + ask + " --format text");
    REQUIRE(s.code == 0);
    std::vector<std::string> lines = lines_of(s.output);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] == "a = 0.9");
    CHECK(lines[1].rfind("engine: bp (converged in ", 0) == 0);
  }
}

TEST_CASE("command-line flags override query file options") {
  std::string kb = put("umbrella.kb", kUmbrellaKb);
  std::string q = put("ok.q", "ask ok(d) ?\n");
  RunResult split = run_cli("query --kb " + kb + " --query " + q);
  REQUIRE(split.code == 0);
  json js = json::parse(split.output);
  CHECK(js["engine"] == "case-split");
  CHECK(js["branches"] == 2);
  CHECK(js["answers"][0]["p"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));

  RunResult forced = run_cli("query --kb " + kb + " --query " + q + " --engine bp");
  REQUIRE(forced.code == 0);
  json jf = json::parse(forced.output);
  CHECK(jf["engine"] == "bp");
  CHECK(jf["answers"][0]["p"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("query reports grounding warnings") {
  std::string kb = put("chain5.kb", chain_kb(5));
  std::string q = put("chain5.q", "ask n5 ?\n");
  RunResult r = run_cli("query --kb " + kb + " --query " + q + " --depth-limit 2");
  REQUIRE(r.code == 0);
  json j = json::parse(r.output);
  CHECK(j["answers"][0]["p"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(j["warnings"].size() > 0);
  std::string w = j["warnings"][0].get<std::string>();
  CHECK(w.rfind("depth limit 2 reached at ", 0) == 0);
}

TEST_CASE("query rejects malformed query files") {
  std::string kb = put("dating.kb", kDatingKb);
  std::string q = put("broken.q", "ask date(jack, jill)\n");
  RunResult r = run_cli("query --kb " + kb + " --query " + q);
  CHECK(r.code == 1);
  CHECK(r.output.rfind(q + ":", 0) == 0);
}

TEST_CASE("the oracle refuses graphs beyond its enumeration cap") {
  std::string kb = put("chain30.kb", chain_kb(30));
  std::string q = put("chain30.q", "ask n30 ?\n");
  RunResult r = run_cli("query --kb " + kb + " --query " + q + " --engine oracle");
  CHECK(r.code == 1);
  CHECK(r.output ==
        "error: graph has 61 variables, exceeding the exact enumeration cap 25\n");
}

TEST_CASE("train writes a weights file the query can consume") {
  std::string kb = put("learned.kb", kLearnedKb);
  std::string data = put(
      "train.jsonl",
      "{\"target\":{\"prop\":\"c\",\"value\":true},\"groups\":[{\"link\":\"r1\",\"value\":true}]}\n"
      "{\"target\":{\"prop\":\"c\",\"value\":false},\"groups\":[{\"link\":\"r1\",\"value\":false}]}\n");
  std::string out = (scratch_dir() / "weights.json").string();
  RunResult r = run_cli("train --kb " + kb + " --data " + data + " --out " + out);
  REQUIRE(r.code == 0);
  CHECK(r.output.rfind("mean log-likelihood: ", 0) == 0);

  std::ifstream in(out);
  REQUIRE(in.good());
  json w = json::parse(in);
  CHECK(w.is_object());
  CHECK(w.contains("bias:r1"));
  CHECK(w.contains("act:r1"));
  CHECK(w.contains("pat:c/0"));

  SUBCASE("the trained weights soften the answer") {
    std::string q = put("c.q", "ask c ?\n");
    RunResult s = run_cli("query --kb " + kb + " --query " + q + " --weights " + out);
    REQUIRE(s.code == 0);
    double p = json::parse(s.output)["answers"][0]["p"].get<double>();
    CHECK(p > 0.5);
    CHECK(p < 1.0);
  }
}

TEST_CASE("train validates its data against the compiled rules") {
  std::string kb = put("learned.kb", kLearnedKb);

  SUBCASE("unknown rule ids are rejected") {
    std::string data = put(
        "stray.jsonl",
        "{\"target\":{\"prop\":\"c\",\"value\":true},\"groups\":[{\"link\":\"r9\",\"value\":true}]}\n");
    RunResult r = run_cli("train --kb " + kb + " --data " + data);
    CHECK(r.code == 1);
    CHECK(r.output == "error: training data references unknown rule id 'r9'\n");
  }
  SUBCASE("malformed records name their line") {
    std::string data = put(
        "broken.jsonl",
        "{\"target\":{\"prop\":\"c\",\"value\":true},\"groups\":[{\"link\":\"r1\",\"value\":true}]}\n"
        "{oops\n");
    RunResult r = run_cli("train --kb " + kb + " --data " + data);
    CHECK(r.code == 2);
    CHECK(r.output.rfind(data + ":2: malformed JSON", 0) == 0);
  }
}

TEST_CASE("bench prints a csv of timings") {
  RunResult r = run_cli("bench --chain-sizes 50,100 --repeats 1 --planning-k 2");
  REQUIRE(r.code == 0);
  std::vector<std::string> lines = lines_of(r.output);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "kind,n,ground_ms,bp_ms,branches");
  CHECK(lines[1].rfind("chain,50,", 0) == 0);
  CHECK(lines[2].rfind("chain,100,", 0) == 0);
  CHECK(lines[3].rfind("planning,2,", 0) == 0);
  CHECK(lines[1].substr(lines[1].size() - 2) == ",1");
  CHECK(lines[3].substr(lines[3].size() - 2) == ",4");

  SUBCASE("bad shapes are usage errors") {
    CHECK(run_cli("bench --chain-sizes 0").code == 2);
    CHECK(run_cli("bench --chain-sizes abc").code == 2);
    CHECK(run_cli("bench --repeats 0").code == 2);
    CHECK(run_cli("bench --planning-k 20").code == 2);
  }
}

TEST_CASE("dot exports land on disk") {
  std::string kb = put("umbrella.kb", kUmbrellaKb);
  std::string rules_dot = (scratch_dir() / "rules.dot").string();
  RunResult r = run_cli("check --kb " + kb + " --export-dot " + rules_dot);
  REQUIRE(r.code == 0);
  {
    std::ifstream in(rules_dot);
    std::string first;
    std::getline(in, first);
    CHECK(first == "digraph implications {");
  }

  std::string q = put("ok.q", "ask ok(d) ?\n");
  std::string fg_dot = (scratch_dir() / "factors.dot").string();
  RunResult s = run_cli("query --kb " + kb + " --query " + q + " --export-dot " + fg_dot);
  REQUIRE(s.code == 0);
  std::ifstream in(fg_dot);
  std::string first;
  std::getline(in, first);
  CHECK(first == "digraph factor_graph {");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("query --frobnicate").code == 2);
  CHECK(run_cli("query --kb only.kb").code == 2);  // --query is required
  std::string kb = put("dating.kb", kDatingKb);
  std::string q = put("date.q", "ask date(jack, jill) ?\n");
  RunResult r = run_cli("query --kb " + kb + " --query " + q + " --format yaml");
  CHECK(r.code == 2);
  CHECK(r.output == "--format must be json or text\n");
  RunResult s = run_cli("query --kb " + kb + " --query " + q + " --damping 1.5");
  CHECK(s.code == 2);
  CHECK(s.output == "--damping must be in [0,1)\n");
}
