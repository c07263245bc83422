#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hlc/error.hpp"
#include "hlc/ffg/message.hpp"

namespace hlc::ffg {

using EdgeId = std::size_t;
using NodeId = std::size_t;

enum class NodeKind {
  equality,        // (a, b, c): delta(a - b) delta(a - c)
  addition,        // (x, y, z): delta(z - x - y)
  gaussian_noise,  // (out, mean, param): N(out | mean, param)
  zurek,           // (in, out, params): delta(out - L(in; alpha, beta))
  observation,     // (in, obs, params, variance): N(obs | L(in; alpha, beta), variance)
  clamp,           // (e): observed value
  prior,           // (e): fixed distribution
};

inline const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::equality: return "equality";
    case NodeKind::addition: return "addition";
    case NodeKind::gaussian_noise: return "gaussian-noise";
    case NodeKind::zurek: return "zurek";
    case NodeKind::observation: return "observation";
    case NodeKind::clamp: return "clamp";
    case NodeKind::prior: return "prior";
  }
  return "?";
}

inline std::size_t arity(NodeKind k) {
  switch (k) {
    case NodeKind::equality:
    case NodeKind::addition:
    case NodeKind::gaussian_noise:
    case NodeKind::zurek:
      return 3;
    case NodeKind::observation:
      return 4;
    case NodeKind::clamp:
    case NodeKind::prior:
      return 1;
  }
  return 0;
}

// How the third port of a gaussian-noise node parameterizes the spread.
enum class NoiseParam { precision, variance };

enum class Rule { sum_product, variational };

struct Edge {
  EdgeId id = 0;
  std::string name;
  std::optional<NodeId> tail;  // forward messages leave the tail
  std::optional<NodeId> head;  // backward messages leave the head
  std::optional<Message> forward;
  std::optional<Message> backward;
  std::optional<Message> marginal;
};

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::equality;
  std::string name;
  std::vector<EdgeId> ports;
  NoiseParam noise = NoiseParam::precision;
  std::optional<Message> value;  // clamp and prior nodes only
};

/// Forney-style factor graph: variables live on edges, each edge joins at
/// most two nodes. An edge end with no node behaves as a constant factor.
class Graph {
 public:
  EdgeId add_edge(std::string name) {
    Edge e;
    e.id = edges_.size();
    e.name = std::move(name);
    edges_.push_back(std::move(e));
    return edges_.back().id;
  }

  NodeId add_node(NodeKind kind, std::vector<EdgeId> ports, std::string name = {}) {
    if (ports.size() != arity(kind))
      throw ArgumentError(std::string("node kind ") + to_string(kind) + " needs " +
                          std::to_string(arity(kind)) + " edges, got " +
                          std::to_string(ports.size()));
    Node n;
    n.id = nodes_.size();
    n.kind = kind;
    n.name = name.empty() ? std::string(to_string(kind)) + "#" + std::to_string(n.id) : name;
    for (EdgeId e : ports) {
      Edge& edge = edge_ref(e);
      if (!edge.tail)
        edge.tail = n.id;
      else if (!edge.head)
        edge.head = n.id;
      else
        throw ArgumentError("edge '" + edge.name + "' already joins two nodes");
    }
    n.ports = std::move(ports);
    nodes_.push_back(std::move(n));
    return nodes_.back().id;
  }

  NodeId add_equality(EdgeId a, EdgeId b, EdgeId c, std::string name = {}) {
    return add_node(NodeKind::equality, {a, b, c}, std::move(name));
  }
  NodeId add_addition(EdgeId x, EdgeId y, EdgeId z, std::string name = {}) {
    return add_node(NodeKind::addition, {x, y, z}, std::move(name));
  }
  NodeId add_gaussian_noise(EdgeId out, EdgeId mean, EdgeId param, NoiseParam p,
                            std::string name = {}) {
    NodeId id = add_node(NodeKind::gaussian_noise, {out, mean, param}, std::move(name));
    nodes_[id].noise = p;
    return id;
  }
  NodeId add_zurek(EdgeId in, EdgeId out, EdgeId params, std::string name = {}) {
    return add_node(NodeKind::zurek, {in, out, params}, std::move(name));
  }
  NodeId add_observation(EdgeId in, EdgeId obs, EdgeId params, EdgeId variance,
                         std::string name = {}) {
    return add_node(NodeKind::observation, {in, obs, params, variance}, std::move(name));
  }
  NodeId add_clamp(EdgeId e, Message value, std::string name = {}) {
    NodeId id = add_node(NodeKind::clamp, {e}, std::move(name));
    nodes_[id].value = std::move(value);
    return id;
  }
  NodeId add_prior(EdgeId e, Message value, std::string name = {}) {
    NodeId id = add_node(NodeKind::prior, {e}, std::move(name));
    nodes_[id].value = std::move(value);
    return id;
  }

  // Replaces the value of a clamp or prior node (e.g. the next observation).
  void set_value(NodeId n, Message value) {
    Node& node = node_ref(n);
    if (node.kind != NodeKind::clamp && node.kind != NodeKind::prior)
      throw ArgumentError("node '" + node.name + "' carries no value");
    node.value = std::move(value);
  }

  const Edge& edge(EdgeId e) const { return const_cast<Graph*>(this)->edge_ref(e); }
  const Node& node(NodeId n) const { return const_cast<Graph*>(this)->node_ref(n); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  std::size_t factor_count() const {
    std::size_t n = 0;
    for (const Node& node : nodes_)
      if (node.kind != NodeKind::clamp && node.kind != NodeKind::prior) ++n;
    return n;
  }

  std::size_t port_of(NodeId n, EdgeId e) const {
    const Node& node = this->node(n);
    for (std::size_t i = 0; i < node.ports.size(); ++i)
      if (node.ports[i] == e) return i;
    throw ArgumentError("edge '" + edge(e).name + "' is not attached to node '" + node.name + "'");
  }

  // Node on the other end of e as seen from n, if any.
  std::optional<NodeId> other_end(NodeId n, EdgeId e) const {
    const Edge& edge = this->edge(e);
    return edge.tail == n ? edge.head : edge.tail;
  }

  /// Message flowing into node n along edge e. A dangling far end yields
  /// Uninformative; a far end whose message was never computed yields nullopt.
  std::optional<Message> incoming(NodeId n, EdgeId e) const {
    const Edge& edge = this->edge(e);
    if (edge.tail == n) {
      if (!edge.head) return Message{Uninformative{}};
      return edge.backward;
    }
    if (edge.head == n) {
      if (!edge.tail) return Message{Uninformative{}};
      return edge.forward;
    }
    throw ArgumentError("edge '" + edge.name + "' is not attached to node '" + node(n).name + "'");
  }

  std::optional<Message> outgoing(NodeId n, EdgeId e) const {
    const Edge& edge = this->edge(e);
    return edge.tail == n ? edge.forward : edge.backward;
  }

  void set_outgoing(NodeId n, EdgeId e, Message m) {
    Edge& edge = edge_ref(e);
    if (edge.tail == n)
      edge.forward = std::move(m);
    else if (edge.head == n)
      edge.backward = std::move(m);
    else
      throw ArgumentError("edge '" + edge.name + "' is not attached to node '" + node(n).name + "'");
  }

  // Directed message in either direction, treating dangling ends as uninformative.
  std::optional<Message> forward_or_uninformative(EdgeId e) const {
    const Edge& edge = this->edge(e);
    if (!edge.tail) return Message{Uninformative{}};
    return edge.forward;
  }
  std::optional<Message> backward_or_uninformative(EdgeId e) const {
    const Edge& edge = this->edge(e);
    if (!edge.head) return Message{Uninformative{}};
    return edge.backward;
  }

  void set_marginal(EdgeId e, std::optional<Message> m) { edge_ref(e).marginal = std::move(m); }

  // Clears every directed message and marginal.
  void reset_messages() {
    for (Edge& e : edges_) {
      e.forward.reset();
      e.backward.reset();
      e.marginal.reset();
    }
  }

 private:
  Edge& edge_ref(EdgeId e) {
    if (e >= edges_.size()) throw ArgumentError("unknown edge id " + std::to_string(e));
    return edges_[e];
  }
  Node& node_ref(NodeId n) {
    if (n >= nodes_.size()) throw ArgumentError("unknown node id " + std::to_string(n));
    return nodes_[n];
  }

  std::vector<Edge> edges_;
  std::vector<Node> nodes_;
};

}  // namespace hlc::ffg
