#include "hornbp/builtins.hpp"

#include <charconv>

namespace hornbp {

namespace {

long long to_number(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw GroundError("builtin argument '" + s + "' is not an integer");
  return v;
}

}  // namespace

void BuiltinRegistry::add(const std::string& name, int arity, BuiltinFn fn) {
  fns_[PredKey{name, arity}] = std::move(fn);
}

bool BuiltinRegistry::has(const std::string& name, int arity) const {
  return fns_.count(PredKey{name, arity}) > 0;
}

bool BuiltinRegistry::eval(const Atom& atom) const {
  if (!atom.is_ground())
    throw GroundError("builtin " + atom.text() + " has unbound variables at evaluation time");
  auto it = fns_.find(PredKey{atom.pred, static_cast<int>(atom.args.size())});
  if (it == fns_.end())
    throw GroundError("no evaluator registered for builtin " + atom.pred + "/" +
                      std::to_string(atom.args.size()));
  std::vector<std::string> args;
  args.reserve(atom.args.size());
  for (const Term& t : atom.args) args.push_back(t.name);
  return it->second(args);
}

bool eval_builtin(const BuiltinRegistry& registry, const Atom& atom) {
  return registry.eval(atom);
}

const BuiltinRegistry& BuiltinRegistry::standard() {
  static const BuiltinRegistry registry = [] {
    BuiltinRegistry r;
    r.add("sum", 3, [](const std::vector<std::string>& a) {
      return to_number(a[0]) + to_number(a[1]) == to_number(a[2]);
    });
    r.add("prod", 3, [](const std::vector<std::string>& a) {
      return to_number(a[0]) * to_number(a[1]) == to_number(a[2]);
    });
    r.add("lt", 2, [](const std::vector<std::string>& a) { return to_number(a[0]) < to_number(a[1]); });
    r.add("leq", 2, [](const std::vector<std::string>& a) { return to_number(a[0]) <= to_number(a[1]); });
    r.add("gt", 2, [](const std::vector<std::string>& a) { return to_number(a[0]) > to_number(a[1]); });
    r.add("geq", 2, [](const std::vector<std::string>& a) { return to_number(a[0]) >= to_number(a[1]); });
    r.add("eq", 2, [](const std::vector<std::string>& a) { return a[0] == a[1]; });
    r.add("neq", 2, [](const std::vector<std::string>& a) { return a[0] != a[1]; });
    return r;
  }();
  return registry;
}

}  // namespace hornbp
