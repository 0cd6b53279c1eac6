#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parnet/error.hpp"

namespace parnet {

using NodeId = std::uint32_t;

/// Undirected edge, stored with u < v. `weight` is the similarity the edge
/// had before thresholding (1 for edges that never had one).
struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 1.0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple undirected, unweighted graph on nodes 0..n-1 (weights ride along
/// for export only; every measure reads the adjacency structure).
class Network {
 public:
  Network() = default;

  Network(std::size_t node_count, std::vector<Edge> edges, std::optional<double> target_density = {},
          std::optional<double> threshold = {})
      : n_(node_count), edges_(std::move(edges)), target_density_(target_density), threshold_(threshold) {
    for (auto& e : edges_) {
      if (e.u == e.v) throw Error("self-loop on node " + std::to_string(e.u));
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.v >= n_)
        throw Error("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                    ") references a node outside 0.." + std::to_string(n_ == 0 ? 0 : n_ - 1));
    }
    std::sort(edges_.begin(), edges_.end(),
              [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
    for (std::size_t i = 1; i < edges_.size(); ++i)
      if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v)
        throw Error("duplicate edge (" + std::to_string(edges_[i].u) + ", " + std::to_string(edges_[i].v) + ")");

    adj_.assign(n_, {});
    for (const auto& e : edges_) {
      adj_[e.u].push_back(e.v);
      adj_[e.v].push_back(e.u);
    }
    for (auto& a : adj_) std::sort(a.begin(), a.end());
  }

  std::size_t node_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId i) const { return adj_[i]; }
  std::size_t degree(NodeId i) const { return adj_[i].size(); }

  bool has_edge(NodeId a, NodeId b) const {
    const auto& l = adj_[a];
    return std::binary_search(l.begin(), l.end(), b);
  }

  std::optional<double> target_density() const { return target_density_; }
  /// Weight of the weakest retained edge when the graph came from thresholding.
  std::optional<double> threshold() const { return threshold_; }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adj_;
  std::optional<double> target_density_;
  std::optional<double> threshold_;
};

/// Convenience for tests and tools: builds a graph from (u, v) pairs.
inline Network make_network(std::size_t n, std::initializer_list<std::pair<NodeId, NodeId>> pairs) {
  std::vector<Edge> edges;
  for (auto [u, v] : pairs) edges.push_back({u, v, 1.0});
  return Network(n, std::move(edges));
}

}  // namespace parnet
