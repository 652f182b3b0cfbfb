#pragma once

#include <compare>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hornbp {

enum class TermKind { Constant, Variable };

/// A constant or a variable. The two live in disjoint namespaces; in the
/// text format variables start with an uppercase letter.
struct Term {
  TermKind kind = TermKind::Constant;
  std::string name;

  static Term constant(std::string n) { return {TermKind::Constant, std::move(n)}; }
  static Term variable(std::string n) { return {TermKind::Variable, std::move(n)}; }
  bool is_var() const { return kind == TermKind::Variable; }
  auto operator<=>(const Term&) const = default;
};

struct Predicate {
  std::string name;
  int arity = 0;
  std::vector<std::string> roles;  // empty, or one distinct label per argument

  auto operator<=>(const Predicate&) const = default;
};

/// Predicate applied to terms; may contain variables.
struct Atom {
  std::string pred;
  std::vector<Term> args;

  bool is_ground() const;
  std::string text() const;
  auto operator<=>(const Atom&) const = default;
};

/// A fully ground atom: the binary random variables of the engine.
struct Proposition {
  std::string pred;
  std::vector<std::string> args;

  static Proposition from_atom(const Atom& a);  // throws on variables
  Atom to_atom() const;
  std::string text() const;
  auto operator<=>(const Proposition&) const = default;
};

struct Fact {
  Proposition prop;
  double prior = 1.0;  // in [0,1]

  auto operator<=>(const Fact&) const = default;
};

enum class WeightMode { Deterministic, Learned };

/// Quantified implication: conjunctive premise, disjunctive conclusion.
/// Conclusion size > 1 marks a Planning rule; premise-only variables mark
/// a Query rule.
struct Rule {
  std::string id;
  std::vector<Atom> premise;
  std::vector<Atom> conclusion;
  std::set<std::string> universals;    // variables appearing in the conclusion
  std::set<std::string> existentials;  // variables appearing only in the premise
  WeightMode weight_mode = WeightMode::Deterministic;

  /// Recompute universals/existentials from the atoms.
  void recompute_quantifiers();
  auto operator<=>(const Rule&) const = default;
};

struct PredKey {
  std::string name;
  int arity = 0;
  auto operator<=>(const PredKey&) const = default;
};

struct KnowledgeBase {
  std::map<PredKey, Predicate> predicates;
  std::map<Proposition, Fact> facts;
  std::vector<Rule> rules;
  std::set<std::string> builtins;  // evaluated computationally during grounding

  const Predicate* find_predicate(const std::string& name, int arity) const;
  bool is_builtin(const std::string& name) const { return builtins.count(name) > 0; }

  auto operator<=>(const KnowledgeBase&) const = default;
};

/// One validation finding. `rule` is the rule id or a fact/predicate label,
/// `variable` is set for safety violations.
struct Diagnostic {
  std::string rule;
  std::string variable;
  std::string message;
};

/// Full invariant check: safety of every rule, declaredness and arity of
/// every atom, prior ranges, builtin placement. Empty result means valid.
std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb);

/// Render back to the text format; parse_kb(serialize_kb(kb)) is
/// structurally equal to kb.
std::string serialize_kb(const KnowledgeBase& kb);

/// Shortest decimal form that round-trips through double.
std::string format_double(double v);

std::set<std::string> atom_variables(const Atom& a);

}  // namespace hornbp
