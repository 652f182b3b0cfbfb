#pragma once

#include <map>
#include <string>
#include <vector>

#include "hornbp/factor_graph.hpp"

namespace hornbp {

struct Marginals {
  std::map<Proposition, double> probs;  // P(prop = true)
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  std::vector<std::string> warnings;
};

enum class Schedule { Sequential, Synchronous };

struct BpOptions {
  Schedule schedule = Schedule::Sequential;
  double tol = 1e-6;      // L-infinity over message components
  int max_iters = 100;
  double damping = 0.0;   // applied to factor-to-variable messages
  double epsilon = 1e-9;  // smoothing used only when a message loses all mass
};

/// Sum-product loopy belief propagation over binary variables. Unary
/// factors emit their (constant) messages at initialization; all other
/// messages start uniform. A sweep recomputes every non-unary factor's
/// outgoing messages — in factor index order for `sequential`, from the
/// previous iteration's snapshot for `synchronous`. Terminates when the
/// largest message change drops below tol, else at max_iters with
/// converged=false. Messages that lose all mass (contradictory evidence)
/// are smoothed and reported via a `low_mass` warning, never thrown.
Marginals run_bp(const FactorGraph& fg, const BpOptions& opts = {});

/// Exact marginals by joint enumeration with raw (unsmoothed) potentials.
/// Throws EngineError when the variable count exceeds `cap` or when the
/// partition function is zero ("inconsistent evidence").
Marginals brute_force_marginals(const FactorGraph& fg, int cap = 25);

}  // namespace hornbp
