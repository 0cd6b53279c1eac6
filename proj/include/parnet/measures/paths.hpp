#pragma once

#include <algorithm>
#include <queue>
#include <vector>

#include "parnet/graph.hpp"

namespace parnet {

inline constexpr int kUnreachable = -1;

struct ShortestPaths {
  std::vector<int> dist;       // kUnreachable outside the source's component
  std::vector<double> sigma;   // number of shortest paths from the source
  std::vector<NodeId> order;   // nodes in non-decreasing distance
};

inline ShortestPaths bfs(const Network& net, NodeId source) {
  const std::size_t n = net.node_count();
  ShortestPaths sp{std::vector<int>(n, kUnreachable), std::vector<double>(n, 0.0), {}};
  sp.order.reserve(n);
  sp.dist[source] = 0;
  sp.sigma[source] = 1.0;
  std::queue<NodeId> q;
  q.push(source);
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop();
    sp.order.push_back(v);
    for (NodeId w : net.neighbors(v)) {
      if (sp.dist[w] == kUnreachable) {
        sp.dist[w] = sp.dist[v] + 1;
        q.push(w);
      }
      if (sp.dist[w] == sp.dist[v] + 1) sp.sigma[w] += sp.sigma[v];
    }
  }
  return sp;
}

inline std::vector<double> degree(const Network& net) {
  std::vector<double> k(net.node_count());
  for (NodeId i = 0; i < k.size(); ++i) k[i] = static_cast<double>(net.degree(i));
  return k;
}

inline std::vector<double> clustering(const Network& net) {
  std::vector<double> cc(net.node_count(), 0.0);
  for (NodeId i = 0; i < cc.size(); ++i) {
    const auto nb = net.neighbors(i);
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b) links += net.has_edge(nb[a], nb[b]);
    cc[i] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return cc;
}

/// Brandes accumulation over unordered pairs, unnormalized.
inline std::vector<double> betweenness(const Network& net) {
  const std::size_t n = net.node_count();
  std::vector<double> b(n, 0.0), delta(n);
  for (NodeId s = 0; s < n; ++s) {
    const auto sp = bfs(net, s);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto it = sp.order.rbegin(); it != sp.order.rend(); ++it) {
      const NodeId w = *it;
      for (NodeId v : net.neighbors(w))
        if (sp.dist[v] == sp.dist[w] - 1) delta[v] += sp.sigma[v] / sp.sigma[w] * (1.0 + delta[w]);
      if (w != s) b[w] += delta[w];
    }
  }
  for (auto& x : b) x /= 2.0;
  return b;
}

/// n_c / sum of distances inside the node's component; isolated nodes get 0.
inline std::vector<double> closeness(const Network& net) {
  const std::size_t n = net.node_count();
  std::vector<double> c(n, 0.0);
  for (NodeId i = 0; i < n; ++i) {
    const auto sp = bfs(net, i);
    long long total = 0;
    for (int d : sp.dist)
      if (d > 0) total += d;
    if (total > 0) c[i] = static_cast<double>(sp.order.size()) / static_cast<double>(total);
  }
  return c;
}

inline std::vector<double> eccentricity(const Network& net) {
  std::vector<double> e(net.node_count(), 0.0);
  for (NodeId i = 0; i < e.size(); ++i) {
    const auto sp = bfs(net, i);
    e[i] = static_cast<double>(sp.dist[sp.order.back()]);
  }
  return e;
}

/// Size of the ring of nodes at distance exactly h.
inline std::vector<double> neighborhood(const Network& net, int h = 3) {
  if (h < 1) throw Error("neighborhood level must be >= 1");
  std::vector<double> out(net.node_count(), 0.0);
  for (NodeId i = 0; i < out.size(); ++i) {
    const auto sp = bfs(net, i);
    out[i] = static_cast<double>(std::count(sp.dist.begin(), sp.dist.end(), h));
  }
  return out;
}

}  // namespace parnet
