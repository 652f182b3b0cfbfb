#include "hornbp/infer.hpp"

#include <array>
#include <cmath>
#include <set>

namespace hornbp {

namespace {

using Msg = std::array<double, 2>;  // mass for value 0 and value 1

constexpr double kTinyMass = 1e-300;

bool normalize(Msg& m) {
  double s = m[0] + m[1];
  if (!(s > kTinyMass) || !std::isfinite(s)) {
    m = {0.5, 0.5};
    return false;
  }
  m[0] /= s;
  m[1] /= s;
  return true;
}

class BpRun {
 public:
  BpRun(const FactorGraph& fg, const BpOptions& opts) : fg_(fg), opts_(opts) { init(); }

  Marginals run() {
    Marginals out;
    for (int it = 1; it <= opts_.max_iters; ++it) {
      double res = opts_.schedule == Schedule::Sequential ? sweep(msg_) : sweep_snapshot();
      out.iterations = it;
      out.residual = res;
      if (res < opts_.tol) {
        out.converged = true;
        break;
      }
    }
    if (!out.converged && has_iterative_factor())
      warn("bp did not converge within " + std::to_string(opts_.max_iters) + " iterations");
    read_beliefs(out);
    out.warnings = warnings_;
    return out;
  }

 private:
  void init() {
    edge_start_.reserve(fg_.factors.size());
    int edges = 0;
    for (const Factor& f : fg_.factors) {
      edge_start_.push_back(edges);
      edges += 1 + static_cast<int>(f.inputs.size());
    }
    msg_.assign(edges, Msg{0.5, 0.5});
    edge_var_.assign(edges, -1);
    var_edges_.assign(fg_.num_vars(), {});
    for (size_t fi = 0; fi < fg_.factors.size(); ++fi) {
      const Factor& f = fg_.factors[fi];
      int base = edge_start_[fi];
      edge_var_[base] = f.output;
      var_edges_[f.output].push_back(base);
      for (size_t s = 0; s < f.inputs.size(); ++s) {
        edge_var_[base + 1 + s] = f.inputs[s];
        var_edges_[f.inputs[s]].push_back(base + 1 + static_cast<int>(s));
      }
      // Unary factors emit a constant message; set it once here.
      if (f.kind == FactorKind::Prior) {
        msg_[base] = {1.0 - f.prior, f.prior};
      } else if (f.kind == FactorKind::Evidence) {
        msg_[base] = {f.value ? 0.0 : 1.0, f.value ? 1.0 : 0.0};
      }
    }
  }

  bool has_iterative_factor() const {
    for (const Factor& f : fg_.factors)
      if (f.kind != FactorKind::Prior && f.kind != FactorKind::Evidence) return true;
    return false;
  }

  void warn(const std::string& text) {
    if (seen_.insert(text).second) warnings_.push_back(text);
  }

  std::string node_name(int var) const {
    if (fg_.is_prop_var(var)) return fg_.props[var].text();
    return "g" + std::to_string(var - fg_.num_props);
  }

  // Product of all factor-to-variable messages at `var` except `skip`.
  Msg incoming(const std::vector<Msg>& store, int var, int skip) {
    Msg nu{1.0, 1.0};
    for (int e : var_edges_[var]) {
      if (e == skip) continue;
      nu[0] *= store[e][0];
      nu[1] *= store[e][1];
    }
    if (!normalize(nu)) warn("low_mass at " + node_name(var));
    return nu;
  }

  // One full update of factor `fi`, reading incoming products from `from`
  // and writing damped outgoing messages into msg_. Returns the largest
  // component change.
  double update_factor(size_t fi, const std::vector<Msg>& from) {
    const Factor& f = fg_.factors[fi];
    if (f.kind == FactorKind::Prior || f.kind == FactorKind::Evidence) return 0.0;
    int base = edge_start_[fi];
    size_t n = f.inputs.size();
    Msg nu_out = incoming(from, f.output, base);
    std::vector<Msg> nu(n);
    for (size_t s = 0; s < n; ++s)
      nu[s] = incoming(from, f.inputs[s], base + 1 + static_cast<int>(s));

    std::vector<Msg> out(n + 1);
    switch (f.kind) {
      case FactorKind::And: {
        // psi = [g == AND(p_1..p_n)]; incoming messages are normalized, so
        // the mass of "some input false" is 1 minus the all-true product.
        std::vector<double> pre(n + 1, 1.0), suf(n + 1, 1.0);
        for (size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * nu[i][1];
        for (size_t i = n; i > 0; --i) suf[i - 1] = suf[i] * nu[i - 1][1];
        double all = pre[n];
        out[0] = {1.0 - all, all};
        for (size_t k = 0; k < n; ++k) {
          double rest = pre[k] * suf[k + 1];
          out[k + 1] = {nu_out[0], nu_out[1] * rest + nu_out[0] * (1.0 - rest)};
        }
        break;
      }
      case FactorKind::OrDet: {
        std::vector<double> pre(n + 1, 1.0), suf(n + 1, 1.0);
        for (size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * nu[i][0];
        for (size_t i = n; i > 0; --i) suf[i - 1] = suf[i] * nu[i - 1][0];
        double none = pre[n];
        out[0] = {none, 1.0 - none};
        for (size_t k = 0; k < n; ++k) {
          double rest = pre[k] * suf[k + 1];
          out[k + 1] = {nu_out[1] * (1.0 - rest) + nu_out[0] * rest, nu_out[1]};
        }
        break;
      }
      case FactorKind::OrLearned: {
        // psi(1, x) factors into per-input terms exp(b_i + x_i a_i); psi(0, x) = 1.
        std::vector<double> t0(n), t1(n), term(n);
        for (size_t i = 0; i < n; ++i) {
          t0[i] = std::exp(f.bias[i]);
          t1[i] = std::exp(f.bias[i] + f.act[i]);
          term[i] = nu[i][0] * t0[i] + nu[i][1] * t1[i];
        }
        std::vector<double> pre(n + 1, 1.0), suf(n + 1, 1.0);
        for (size_t i = 0; i < n; ++i) pre[i + 1] = pre[i] * term[i];
        for (size_t i = n; i > 0; --i) suf[i - 1] = suf[i] * term[i - 1];
        out[0] = {1.0, pre[n]};
        for (size_t k = 0; k < n; ++k) {
          double rest = pre[k] * suf[k + 1];
          out[k + 1] = {nu_out[0] + nu_out[1] * t0[k] * rest,
                        nu_out[0] + nu_out[1] * t1[k] * rest};
        }
        break;
      }
      default:
        return 0.0;
    }

    double res = 0.0;
    for (size_t s = 0; s <= n; ++s) {
      int e = base + static_cast<int>(s);
      if (!normalize(out[s])) warn("low_mass at " + node_name(edge_var_[e]));
      Msg next = out[s];
      if (opts_.damping > 0.0) {
        next[0] = (1.0 - opts_.damping) * out[s][0] + opts_.damping * msg_[e][0];
        next[1] = (1.0 - opts_.damping) * out[s][1] + opts_.damping * msg_[e][1];
      }
      res = std::max(res, std::abs(next[0] - msg_[e][0]));
      res = std::max(res, std::abs(next[1] - msg_[e][1]));
      msg_[e] = next;
    }
    return res;
  }

  double sweep(const std::vector<Msg>& from) {
    double res = 0.0;
    for (size_t fi = 0; fi < fg_.factors.size(); ++fi)
      res = std::max(res, update_factor(fi, from));
    return res;
  }

  double sweep_snapshot() {
    snapshot_ = msg_;
    return sweep(snapshot_);
  }

  void read_beliefs(Marginals& out) {
    for (int v = 0; v < fg_.num_props; ++v) {
      Msg b{1.0, 1.0};
      for (int e : var_edges_[v]) {
        b[0] *= msg_[e][0];
        b[1] *= msg_[e][1];
      }
      if (!normalize(b)) warn("low_mass at " + node_name(v));
      out.probs[fg_.props[v]] = b[1];
    }
  }

  const FactorGraph& fg_;
  const BpOptions& opts_;
  std::vector<int> edge_start_, edge_var_;
  std::vector<std::vector<int>> var_edges_;
  std::vector<Msg> msg_, snapshot_;
  std::vector<std::string> warnings_;
  std::set<std::string> seen_;
};

double potential(const Factor& f, uint64_t assign) {
  auto bit = [&](int v) { return (assign >> v) & 1ULL; };
  bool outv = bit(f.output) != 0;
  switch (f.kind) {
    case FactorKind::And: {
      bool conj = true;
      for (int v : f.inputs) conj = conj && bit(v);
      return outv == conj ? 1.0 : 0.0;
    }
    case FactorKind::OrDet: {
      bool disj = false;
      for (int v : f.inputs) disj = disj || bit(v);
      return outv == disj ? 1.0 : 0.0;
    }
    case FactorKind::OrLearned: {
      if (!outv) return 1.0;
      double s = 0.0;
      for (size_t i = 0; i < f.inputs.size(); ++i)
        s += f.bias[i] + (bit(f.inputs[i]) ? f.act[i] : 0.0);
      return std::exp(s);
    }
    case FactorKind::Prior:
      return outv ? f.prior : 1.0 - f.prior;
    case FactorKind::Evidence:
      return outv == f.value ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace

Marginals run_bp(const FactorGraph& fg, const BpOptions& opts) {
  return BpRun(fg, opts).run();
}

Marginals brute_force_marginals(const FactorGraph& fg, int cap) {
  int n = fg.num_vars();
  if (n > cap)
    throw EngineError("graph has " + std::to_string(n) +
                      " variables, exceeding the exact enumeration cap " + std::to_string(cap));
  if (n > 62) throw EngineError("exact enumeration cap cannot exceed 62 variables");
  double z = 0.0;
  std::vector<double> mass(static_cast<size_t>(n), 0.0);
  const uint64_t total = n == 0 ? 1 : (1ULL << n);
  for (uint64_t a = 0; a < total; ++a) {
    double w = 1.0;
    for (const Factor& f : fg.factors) {
      w *= potential(f, a);
      if (w == 0.0) break;
    }
    if (w == 0.0) continue;
    z += w;
    for (int v = 0; v < n; ++v)
      if ((a >> v) & 1ULL) mass[static_cast<size_t>(v)] += w;
  }
  if (z == 0.0) throw EngineError("inconsistent evidence");
  Marginals out;
  out.iterations = 0;
  out.residual = 0.0;
  out.converged = true;
  for (int v = 0; v < fg.num_props; ++v)
    out.probs[fg.props[v]] = mass[static_cast<size_t>(v)] / z;
  return out;
}

}  // namespace hornbp
