#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hornbp/kb.hpp"

namespace hornbp {

struct GroundError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using BuiltinFn = std::function<bool(const std::vector<std::string>&)>;

/// Evaluators for computed predicates. They run during grounding and never
/// become graph nodes.
class BuiltinRegistry {
 public:
  void add(const std::string& name, int arity, BuiltinFn fn);

  /// Evaluate a ground atom. Throws GroundError for an unregistered
  /// builtin or a non-ground atom.
  bool eval(const Atom& atom) const;

  bool has(const std::string& name, int arity) const;

  /// sum/3, prod/3 (integer arithmetic), lt/2, leq/2, gt/2, geq/2 on
  /// numbers, eq/2, neq/2 on arbitrary constants.
  static const BuiltinRegistry& standard();

 private:
  std::map<PredKey, BuiltinFn> fns_;
};

bool eval_builtin(const BuiltinRegistry& registry, const Atom& atom);

}  // namespace hornbp
