#include "hornbp/dot.hpp"

#include <set>
#include <sstream>

#include "hornbp/kb.hpp"

namespace hornbp {

namespace {

std::string factor_label(const Factor& f) {
  switch (f.kind) {
    case FactorKind::And:
      return "and";
    case FactorKind::OrDet:
      return "or";
    case FactorKind::OrLearned:
      return "or*";
    case FactorKind::Prior:
      return "prior " + format_double(f.prior);
    case FactorKind::Evidence:
      return f.value ? "=true" : "=false";
  }
  return "?";
}

std::string var_name(const FactorGraph& fg, int v) {
  if (fg.is_prop_var(v)) return "p" + std::to_string(v);
  return "g" + std::to_string(v - fg.num_props);
}

}  // namespace

std::string factor_graph_dot(const FactorGraph& fg) {
  std::ostringstream out;
  out << "digraph factor_graph {\n  rankdir=LR;\n";
  for (int p = 0; p < fg.num_props; ++p)
    out << "  p" << p << " [shape=ellipse, label=\"" << fg.props[p].text() << "\"];\n";
  for (int g = 0; g < fg.num_groups; ++g)
    out << "  g" << g << " [shape=box, label=\"g" << g << "\"];\n";
  for (size_t i = 0; i < fg.factors.size(); ++i) {
    const Factor& f = fg.factors[i];
    out << "  f" << i << " [shape=diamond, width=0.25, height=0.25, label=\"" << factor_label(f)
        << "\"];\n";
    for (int v : f.inputs) out << "  " << var_name(fg, v) << " -> f" << i << ";\n";
    out << "  f" << i << " -> " << var_name(fg, f.output) << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string implication_graph_dot(const ImplicationGraph& graph) {
  std::ostringstream out;
  out << "digraph implications {\n  rankdir=BT;\n";
  std::set<std::string> nodes;
  auto node_id = [](const std::string& pred, size_t arity) {
    return pred + "_" + std::to_string(arity);
  };
  auto declare = [&](const std::string& pred, size_t arity) {
    std::string id = node_id(pred, arity);
    if (nodes.insert(id).second)
      out << "  " << id << " [label=\"" << pred << "/" << arity << "\"];\n";
    return id;
  };
  for (const auto& [key, rule] : graph.links) {
    std::string head =
        declare(rule.conclusion_pattern.pred, rule.conclusion_pattern.args.size());
    for (const CompiledClause& clause : rule.clauses)
      for (const Atom& a : clause.premise) {
        std::string body = declare(a.pred, a.args.size());
        out << "  " << body << " -> " << head << " [label=\"" << clause.source_rule << "\"];\n";
      }
  }
  for (const Rule& rule : graph.planning_rules)
    for (const Atom& head : rule.conclusion) {
      std::string h = declare(head.pred, head.args.size());
      for (const Atom& a : rule.premise) {
        std::string body = declare(a.pred, a.args.size());
        out << "  " << body << " -> " << h << " [style=dashed, label=\"" << rule.id << "\"];\n";
      }
    }
  out << "}\n";
  return out.str();
}

}  // namespace hornbp
