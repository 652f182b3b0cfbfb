#include "hornbp/kb.hpp"

#include <charconv>
#include <sstream>

namespace hornbp {

bool Atom::is_ground() const {
  for (const Term& t : args)
    if (t.is_var()) return false;
  return true;
}

std::string Atom::text() const {
  std::string out = pred;
  if (!args.empty()) {
    out += '(';
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i].name;
    }
    out += ')';
  }
  return out;
}

Proposition Proposition::from_atom(const Atom& a) {
  Proposition p;
  p.pred = a.pred;
  p.args.reserve(a.args.size());
  for (const Term& t : a.args) {
    if (t.is_var())
      throw std::invalid_argument("atom " + a.text() + " is not ground: variable " + t.name);
    p.args.push_back(t.name);
  }
  return p;
}

Atom Proposition::to_atom() const {
  Atom a;
  a.pred = pred;
  a.args.reserve(args.size());
  for (const std::string& c : args) a.args.push_back(Term::constant(c));
  return a;
}

std::string Proposition::text() const {
  std::string out = pred;
  if (!args.empty()) {
    out += '(';
    for (size_t i = 0; i < args.size(); ++i) {
      if (i) out += ',';
      out += args[i];
    }
    out += ')';
  }
  return out;
}

std::set<std::string> atom_variables(const Atom& a) {
  std::set<std::string> vars;
  for (const Term& t : a.args)
    if (t.is_var()) vars.insert(t.name);
  return vars;
}

void Rule::recompute_quantifiers() {
  universals.clear();
  existentials.clear();
  for (const Atom& a : conclusion)
    for (const std::string& v : atom_variables(a)) universals.insert(v);
  for (const Atom& a : premise)
    for (const std::string& v : atom_variables(a))
      if (!universals.count(v)) existentials.insert(v);
}

const Predicate* KnowledgeBase::find_predicate(const std::string& name, int arity) const {
  auto it = predicates.find(PredKey{name, arity});
  return it == predicates.end() ? nullptr : &it->second;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, end);
}

namespace {

void check_atom(const KnowledgeBase& kb, const Atom& a, const std::string& context,
                std::vector<Diagnostic>& out) {
  bool declared = false;
  for (const auto& [key, pred] : kb.predicates) {
    if (key.name == a.pred) {
      declared = true;
      if (key.arity == static_cast<int>(a.args.size())) return;
    }
  }
  if (declared)
    out.push_back({context, "",
                   "arity mismatch: " + a.text() + " has " + std::to_string(a.args.size()) +
                       " arguments but no declaration of " + a.pred + " matches"});
  else
    out.push_back({context, "", "undeclared predicate " + a.pred + " in " + a.text()});
}

}  // namespace

std::vector<Diagnostic> validate_kb(const KnowledgeBase& kb) {
  std::vector<Diagnostic> out;

  for (const auto& [key, pred] : kb.predicates) {
    if (pred.arity < 0)
      out.push_back({pred.name, "", "negative arity"});
    if (!pred.roles.empty()) {
      if (static_cast<int>(pred.roles.size()) != pred.arity)
        out.push_back({pred.name, "", "role label count differs from arity"});
      std::set<std::string> seen(pred.roles.begin(), pred.roles.end());
      if (seen.size() != pred.roles.size())
        out.push_back({pred.name, "", "duplicate role labels"});
    }
  }

  for (const auto& [prop, fact] : kb.facts) {
    std::string context = "fact " + prop.text();
    check_atom(kb, prop.to_atom(), context, out);
    if (fact.prior < 0.0 || fact.prior > 1.0)
      out.push_back({context, "", "prior " + format_double(fact.prior) + " outside [0,1]"});
    if (kb.is_builtin(prop.pred))
      out.push_back({context, "", "builtin predicate " + prop.pred + " cannot appear as a fact"});
  }

  for (const Rule& rule : kb.rules) {
    if (rule.premise.empty())
      out.push_back({rule.id, "", "empty premise"});
    if (rule.conclusion.empty())
      out.push_back({rule.id, "", "empty conclusion"});
    for (const Atom& a : rule.premise) check_atom(kb, a, rule.id, out);
    for (const Atom& a : rule.conclusion) check_atom(kb, a, rule.id, out);

    // Safety: every conclusion variable must occur in some premise atom.
    std::set<std::string> premise_vars;
    for (const Atom& a : rule.premise)
      for (const std::string& v : atom_variables(a)) premise_vars.insert(v);
    std::set<std::string> flagged;
    for (const Atom& a : rule.conclusion) {
      for (const std::string& v : atom_variables(a)) {
        if (!premise_vars.count(v) && flagged.insert(v).second)
          out.push_back({rule.id, v,
                         "unsafe variable " + v + " in conclusion of rule " + rule.id +
                             ": it does not occur in the premise"});
      }
    }

    // Quantifier partition must match the atoms.
    Rule recomputed = rule;
    recomputed.recompute_quantifiers();
    if (recomputed.universals != rule.universals || recomputed.existentials != rule.existentials)
      out.push_back({rule.id, "", "universal/existential partition does not match the rule's atoms"});

    for (const Atom& a : rule.conclusion)
      if (kb.is_builtin(a.pred))
        out.push_back({rule.id, "", "builtin predicate " + a.pred + " cannot be concluded by a rule"});

    bool has_groundable = false;
    for (const Atom& a : rule.premise)
      if (!kb.is_builtin(a.pred)) has_groundable = true;
    if (!rule.premise.empty() && !has_groundable)
      out.push_back({rule.id, "", "premise consists only of builtin atoms"});
  }

  return out;
}

std::string serialize_kb(const KnowledgeBase& kb) {
  std::ostringstream os;
  for (const auto& [key, pred] : kb.predicates) {
    os << "pred " << pred.name << "/" << pred.arity;
    if (!pred.roles.empty()) {
      os << " (";
      for (size_t i = 0; i < pred.roles.size(); ++i) {
        if (i) os << ", ";
        os << pred.roles[i];
      }
      os << ")";
    }
    os << ".\n";
  }
  for (const std::string& b : kb.builtins) {
    // A builtin may be declared at several arities; emit one line per match.
    for (const auto& [key, pred] : kb.predicates)
      if (key.name == b) os << "builtin " << key.name << "/" << key.arity << ".\n";
  }
  for (const auto& [prop, fact] : kb.facts) {
    if (fact.prior != 1.0) os << format_double(fact.prior) << " :: ";
    os << prop.text() << ".\n";
  }
  for (const Rule& rule : kb.rules) {
    if (rule.weight_mode == WeightMode::Learned) os << "learned :: ";
    for (size_t i = 0; i < rule.conclusion.size(); ++i) {
      if (i) os << " | ";
      os << rule.conclusion[i].text();
    }
    os << " <- ";
    for (size_t i = 0; i < rule.premise.size(); ++i) {
      if (i) os << ", ";
      os << rule.premise[i].text();
    }
    os << ".\n";
  }
  return os.str();
}

}  // namespace hornbp
