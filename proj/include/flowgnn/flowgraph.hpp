#pragma once

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "flowgnn/error.hpp"
#include "flowgnn/features.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/random.hpp"
#include "flowgnn/text.hpp"

namespace flowgnn {

inline constexpr int kNodeFeatureDim = 10;
inline constexpr std::size_t kDefaultMaxNeighbors = 15;

struct NodeKey {
  Ipv4 ip;
  std::uint16_t port = 0;

  std::uint64_t packed() const { return (std::uint64_t{ip.value()} << 16) | port; }
  std::string to_string() const { return ip.to_string() + ':' + std::to_string(port); }

  friend constexpr auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const { return static_cast<std::size_t>(splitmix64(k.packed())); }
};

using NodeFeatures = std::array<double, kNodeFeatureDim>;

struct Edge {
  std::uint32_t src = 0;
  std::uint32_t dst = 0;
  EdgeFeatures features;
  std::uint8_t label = 0;
  AttackType attack_type = AttackType::Benign;
};

/// Bounded encoding of a node's incident-edge count:
/// (n^2 - k^2) / (n^2 + k^2), which equals tanh(ln(n / k)) for n > 0 and
/// tends to -1 as n -> 0.
inline double degree_feature(double n, double k) {
  const double n2 = n * n;
  const double k2 = k * k;
  return (n2 - k2) / (n2 + k2);
}

/// Directed multigraph over ip:port endpoints, one edge per flow.
///
/// Every node also keeps its incident edges (in and out, self-loops once) in a
/// canonical order that depends only on edge content, never on storage order.
/// Sampling and aggregation walk that order, which keeps results stable under
/// any permutation of the input flows.
class FlowGraph {
 public:
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<NodeKey>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<NodeFeatures>& node_features() const { return node_features_; }
  const NodeFeatures& node_features(std::size_t v) const { return node_features_[v]; }
  const std::vector<std::uint32_t>& incident(std::size_t v) const { return incidence_[v]; }

  std::optional<std::size_t> find(const NodeKey& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t index_of(const NodeKey& key) const {
    if (auto v = find(key)) return *v;
    throw Error(ErrorCode::NodeNotFound, "node " + key.to_string() + " not in graph");
  }

  /// Endpoint of edge `e` opposite to `v`; for a self-loop that is `v`.
  std::uint32_t opposite(std::uint32_t e, std::size_t v) const {
    const auto& edge = edges_[e];
    return edge.src == v ? edge.dst : edge.src;
  }

  std::uint32_t add_node(const NodeKey& key) {
    auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(nodes_.size()));
    if (inserted) {
      nodes_.push_back(key);
      node_features_.push_back({});
      incidence_.emplace_back();
    }
    return it->second;
  }

  void add_edge(const NodeKey& src, const NodeKey& dst, const EdgeFeatures& features, std::uint8_t label,
                AttackType type) {
    const auto s = add_node(src);
    const auto d = add_node(dst);
    const auto e = static_cast<std::uint32_t>(edges_.size());
    edges_.push_back({s, d, features, label, type});
    incidence_[s].push_back(e);
    if (d != s) incidence_[d].push_back(e);
  }

  /// Incidence sort key: opposite endpoint, direction, then edge content.
  std::tuple<NodeKey, bool, std::array<double, kEdgeFeatureDim>, std::uint8_t, AttackType> canonical_key(
      std::uint32_t e, std::size_t v) const {
    const auto& edge = edges_[e];
    const bool outgoing = edge.src == v;
    return {nodes_[opposite(e, v)], !outgoing, edge.features.values, edge.label, edge.attack_type};
  }

  /// Sorts every incidence list into canonical order.
  void canonicalize() {
    for (std::size_t v = 0; v < nodes_.size(); ++v) {
      auto& list = incidence_[v];
      std::sort(list.begin(), list.end(), [&](std::uint32_t a, std::uint32_t b) {
        return canonical_key(a, v) < canonical_key(b, v);
      });
    }
  }

  void set_node_features(std::size_t v, const NodeFeatures& h) { node_features_[v] = h; }

 private:
  std::vector<NodeKey> nodes_;
  std::vector<NodeFeatures> node_features_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::uint32_t>> incidence_;
  std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash> index_;
};

/// Node features: [0..8] mean of incident edges' features 1-9,
/// [9] degree_feature(number of incident edges, k_degree).
inline void init_nodes(FlowGraph& graph, double k_degree) {
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    const auto& incident = graph.incident(v);
    NodeFeatures h{};
    if (!incident.empty()) {
      for (const auto e : incident) {
        const auto& f = graph.edges()[e].features;
        for (int i = 0; i < kNodeFeatureDim - 1; ++i) h[i] += f[i];
      }
      const double n = static_cast<double>(incident.size());
      for (int i = 0; i < kNodeFeatureDim - 1; ++i) h[i] /= n;
    }
    h[kNodeFeatureDim - 1] = degree_feature(static_cast<double>(incident.size()), k_degree);
    graph.set_node_features(v, h);
  }
}

inline FlowGraph build_graph(const std::vector<RawFlow>& flows, const NormCoefficients& k = {}) {
  FlowGraph graph;
  for (const auto& f : flows) {
    graph.add_edge({f.src_ip, f.src_port}, {f.dst_ip, f.dst_port}, derive(f, k), f.label, f.attack_type);
  }
  graph.canonicalize();
  init_nodes(graph, k.degree);
  return graph;
}

/// Stream for sampling node `key` during forward pass number `pass`.
inline Rng node_stream(std::uint64_t seed, std::uint64_t pass, const NodeKey& key) {
  return Rng(stream_id(seed, pass, key.packed()));
}

/// All incident edges of `v` if there are at most `max_n`, otherwise `max_n`
/// distinct ones drawn uniformly without replacement. Returned in canonical
/// incidence order.
inline std::vector<std::uint32_t> sample_neighborhood(const FlowGraph& graph, std::size_t v, std::size_t max_n,
                                                      Rng& rng) {
  const auto& incident = graph.incident(v);
  if (incident.size() <= max_n) return incident;
  std::vector<std::uint32_t> out;
  out.reserve(max_n);
  for (auto pos : sample_positions(incident.size(), max_n, rng)) out.push_back(incident[pos]);
  return out;
}

inline std::vector<std::uint32_t> sample_neighborhood(const FlowGraph& graph, const NodeKey& key, std::size_t max_n,
                                                      Rng& rng) {
  return sample_neighborhood(graph, graph.index_of(key), max_n, rng);
}

/// Carrier-grade NAT space used for masked DDoS sources.
inline constexpr std::uint32_t kMaskPoolBase = (100u << 24) | (64u << 16);
inline constexpr std::uint32_t kMaskPoolSize = 1u << 22;

/// Replaces the source address of every DDoS flow with a fresh pseudorandom
/// address from 100.64.0.0/10. Other flows are returned untouched.
inline std::vector<RawFlow> mask_ddos_sources(std::vector<RawFlow> flows, std::uint64_t seed) {
  for (std::size_t i = 0; i < flows.size(); ++i) {
    auto& f = flows[i];
    if (f.attack_type != AttackType::Ddos) continue;
    Rng rng(stream_id(seed, 0x6d61736bull /* "mask" */, i));
    Ipv4 masked;
    do {
      masked = Ipv4(kMaskPoolBase + static_cast<std::uint32_t>(rng.below(kMaskPoolSize)));
    } while (masked == f.src_ip);
    f.src_ip = masked;
  }
  return flows;
}

inline void write_node_csv(std::ostream& out, const FlowGraph& graph) {
  out << "ip,port";
  for (int i = 1; i <= kNodeFeatureDim; ++i) out << ",h" << i;
  out << '\n';
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    out << graph.nodes()[v].ip.to_string() << ',' << graph.nodes()[v].port;
    for (double h : graph.node_features(v)) out << ',' << text::format_double(h);
    out << '\n';
  }
}

inline void write_edge_csv(std::ostream& out, const FlowGraph& graph) {
  out << "src,dst";
  for (int i = 1; i <= kEdgeFeatureDim; ++i) out << ",f" << i;
  out << ",label,attack_type\n";
  for (const auto& e : graph.edges()) {
    out << graph.nodes()[e.src].to_string() << ',' << graph.nodes()[e.dst].to_string();
    for (double f : e.features.values) out << ',' << text::format_double(f);
    out << ',' << int(e.label) << ',' << to_string(e.attack_type) << '\n';
  }
}

}  // namespace flowgnn
