#pragma once

#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hlc/ffg/rules.hpp"

namespace hlc::ffg {

struct Step {
  NodeId node;
  EdgeId edge;  // outgoing edge of `node`
  Rule rule = Rule::sum_product;
};

/// Ordered message-update plan. Schedules are data: they can be validated,
/// dumped and replayed against any graph with matching ids.
struct Schedule {
  std::vector<Step> steps;

  Schedule& add(NodeId n, EdgeId e, Rule r = Rule::sum_product) {
    steps.push_back({n, e, r});
    return *this;
  }
  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

// Failure while running a schedule; carries the index of the failing step.
class ScheduleError : public Error {
 public:
  ScheduleError(std::size_t step, const std::string& what)
      : Error("schedule step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Checks that every step names an attached edge and that its inputs are
/// produced earlier, by clamps/priors, or by a dangling (constant) end.
/// Variational steps need at least one direction of each neighbouring edge.
inline void validate(const Graph& g, const Schedule& s) {
  std::set<std::pair<NodeId, EdgeId>> produced;
  for (const Node& n : g.nodes())
    if (n.kind == NodeKind::clamp || n.kind == NodeKind::prior) produced.insert({n.id, n.ports[0]});
  auto available_into = [&](NodeId n, EdgeId e) {
    auto far = g.other_end(n, e);
    return !far || produced.count({*far, e}) > 0;
  };
  auto fed_by_clamp = [&](NodeId n, EdgeId e) {
    auto far = g.other_end(n, e);
    return far && g.node(*far).kind == NodeKind::clamp;
  };
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const Step& st = s.steps[i];
    if (st.node >= g.nodes().size() || st.edge >= g.edges().size())
      throw ScheduleError(i, "unknown node or edge id");
    const Node& n = g.node(st.node);
    std::size_t out = 0;
    try {
      out = g.port_of(st.node, st.edge);
    } catch (const Error& e) {
      throw ScheduleError(i, e.what());
    }
    if (n.kind != NodeKind::clamp && n.kind != NodeKind::prior) {
      bool any_point = false;
      if (n.kind == NodeKind::equality)
        for (std::size_t p = 0; p < n.ports.size(); ++p)
          if (p != out && fed_by_clamp(st.node, n.ports[p])) any_point = true;
      for (std::size_t p = 0; p < n.ports.size() && !any_point; ++p) {
        if (p == out) continue;
        const EdgeId e = n.ports[p];
        bool ok = available_into(st.node, e);
        if (st.rule == Rule::variational && !ok) ok = produced.count({st.node, e}) > 0;
        // sum-product toward a noise parameter only reads the two other ends,
        // which the generic check already covers
        if (!ok)
          throw ScheduleError(i, "input on edge '" + g.edge(e).name + "' of node '" + n.name +
                                     "' is not produced before this step");
      }
    }
    produced.insert({st.node, st.edge});
  }
}

/// Runs every step in order and refreshes the marginal of each touched edge
/// once both of its directions are known.
inline void execute_schedule(Graph& g, const Schedule& s) {
  for (const Node& n : g.nodes())
    if (n.kind == NodeKind::clamp || n.kind == NodeKind::prior) g.set_outgoing(n.id, n.ports[0], *n.value);
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const Step& st = s.steps[i];
    try {
      g.set_outgoing(st.node, st.edge, compute_message(g, st.node, st.edge, st.rule));
      auto fw = g.forward_or_uninformative(st.edge);
      auto bw = g.backward_or_uninformative(st.edge);
      if (fw && bw) g.set_marginal(st.edge, multiply(*fw, *bw));
    } catch (const ScheduleError&) {
      throw;
    } catch (const Error& e) {
      throw ScheduleError(i, e.what());
    }
  }
}

/// Plain-text listing of nodes, edges and steps.
inline std::string dump(const Graph& g, const Schedule& s = {}) {
  std::ostringstream os;
  os << "nodes " << g.nodes().size() << "\n";
  for (const Node& n : g.nodes()) {
    os << "  [" << n.id << "] " << to_string(n.kind) << " '" << n.name << "' ports:";
    for (EdgeId e : n.ports) os << ' ' << e;
    if (n.kind == NodeKind::gaussian_noise)
      os << (n.noise == NoiseParam::precision ? " (precision)" : " (variance)");
    if (n.value) os << " value=" << describe(*n.value);
    os << "\n";
  }
  os << "edges " << g.edges().size() << "\n";
  for (const Edge& e : g.edges()) {
    os << "  (" << e.id << ") '" << e.name << "' ";
    os << (e.tail ? std::to_string(*e.tail) : std::string("-")) << " -> "
       << (e.head ? std::to_string(*e.head) : std::string("-"));
    if (e.forward) os << " fw=" << describe(*e.forward);
    if (e.backward) os << " bw=" << describe(*e.backward);
    os << "\n";
  }
  os << "steps " << s.steps.size() << "\n";
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const Step& st = s.steps[i];
    os << "  " << i + 1 << ": node " << st.node << " ('" << g.node(st.node).name << "') -> edge "
       << st.edge << " ('" << g.edge(st.edge).name << "') "
       << (st.rule == Rule::sum_product ? "sum-product" : "variational") << "\n";
  }
  return os.str();
}

}  // namespace hlc::ffg
