#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "parnet/error.hpp"
#include "parnet/graph.hpp"
#include "parnet/random.hpp"

namespace parnet {

struct Partition {
  std::vector<std::size_t> assignment;  // node -> community, ids contiguous from 0

  std::size_t community_count() const {
    return assignment.empty() ? 0 : *std::max_element(assignment.begin(), assignment.end()) + 1;
  }
  friend bool operator==(const Partition&, const Partition&) = default;
};

/// Relabels communities by first appearance in node order.
inline Partition canonical_partition(const std::vector<std::size_t>& raw) {
  Partition p;
  p.assignment.resize(raw.size());
  std::map<std::size_t, std::size_t> relabel;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, _] = relabel.try_emplace(raw[i], relabel.size());
    p.assignment[i] = it->second;
  }
  return p;
}

/// Q = sum over communities of L_c/m - (d_c / 2m)^2.
inline double modularity(const Network& net, const Partition& part) {
  if (net.edge_count() == 0) throw Error("modularity is undefined for a network without edges");
  if (part.assignment.size() != net.node_count()) throw Error("partition size does not match the network");
  const double m = static_cast<double>(net.edge_count());
  const std::size_t c = part.community_count();
  std::vector<double> inside(c, 0.0), degree_sum(c, 0.0);
  for (const auto& e : net.edges())
    if (part.assignment[e.u] == part.assignment[e.v]) inside[part.assignment[e.u]] += 1.0;
  for (NodeId i = 0; i < net.node_count(); ++i)
    degree_sum[part.assignment[i]] += static_cast<double>(net.degree(i));
  double q = 0;
  for (std::size_t k = 0; k < c; ++k) q += inside[k] / m - (degree_sum[k] / (2 * m)) * (degree_sum[k] / (2 * m));
  return q;
}

namespace detail {

struct LouvainGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;  // no self-loops
  std::vector<double> strength;                                   // includes internal weight
};

// One local-moving phase. Returns true if any node changed community.
inline bool louvain_local_moves(const LouvainGraph& g, double two_m, std::vector<std::size_t>& comm, Rng& rng) {
  const std::size_t n = g.adj.size();
  std::vector<double> tot(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) tot[comm[i]] += g.strength[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle_in_place(std::span<std::size_t>(order), rng);

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  bool moved_any = false;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i : order) {
      const std::size_t own = comm[i];
      touched.clear();
      for (auto [j, w] : g.adj[i]) {
        if (link[comm[j]] == 0.0) touched.push_back(comm[j]);
        link[comm[j]] += w;
      }
      tot[own] -= g.strength[i];
      const double ki = g.strength[i];
      auto gain = [&](std::size_t c) { return link[c] - tot[c] * ki / two_m; };
      std::size_t best = own;
      double best_gain = gain(own);
      for (std::size_t c : touched)
        if (gain(c) > best_gain + 1e-12) {
          best_gain = gain(c);
          best = c;
        }
      tot[best] += ki;
      comm[i] = best;
      if (best != own) {
        improved = true;
        moved_any = true;
      }
      for (std::size_t c : touched) link[c] = 0.0;
      link[own] = 0.0;
    }
  }
  return moved_any;
}

inline LouvainGraph aggregate(const LouvainGraph& g, const std::vector<std::size_t>& comm, std::size_t count) {
  LouvainGraph out;
  out.strength.assign(count, 0.0);
  std::vector<std::map<std::size_t, double>> acc(count);
  for (std::size_t i = 0; i < g.adj.size(); ++i) {
    out.strength[comm[i]] += g.strength[i];
    for (auto [j, w] : g.adj[i])
      if (comm[i] != comm[j]) acc[comm[i]][comm[j]] += w;
  }
  out.adj.resize(count);
  for (std::size_t c = 0; c < count; ++c) out.adj[c].assign(acc[c].begin(), acc[c].end());
  return out;
}

inline Partition louvain_once(const Network& net, Rng& rng) {
  const std::size_t n = net.node_count();
  LouvainGraph g;
  g.adj.resize(n);
  g.strength.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j : net.neighbors(i)) g.adj[i].emplace_back(j, 1.0);
    g.strength[i] = static_cast<double>(net.degree(i));
  }
  const double two_m = 2.0 * static_cast<double>(net.edge_count());

  std::vector<std::size_t> node_comm(n);
  std::iota(node_comm.begin(), node_comm.end(), 0);
  while (true) {
    std::vector<std::size_t> comm(g.adj.size());
    std::iota(comm.begin(), comm.end(), 0);
    if (!louvain_local_moves(g, two_m, comm, rng)) break;
    const auto compact = canonical_partition(comm);
    for (auto& c : node_comm) c = compact.assignment[c];
    g = aggregate(g, compact.assignment, compact.community_count());
  }
  return canonical_partition(node_comm);
}

}  // namespace detail

/// Louvain local moving + aggregation, `restarts` runs from one seeded
/// stream; the highest-modularity partition wins, earlier runs on ties.
inline Partition detect_communities(const Network& net, std::uint64_t seed, int restarts = 10) {
  if (net.edge_count() == 0) {
    std::vector<std::size_t> own(net.node_count());
    std::iota(own.begin(), own.end(), 0);
    return Partition{own};
  }
  Rng rng(seed);
  Partition best;
  double best_q = -INFINITY;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    auto p = detail::louvain_once(net, rng);
    const double q = modularity(net, p);
    if (q > best_q) {
      best_q = q;
      best = std::move(p);
    }
  }
  return best;
}

}  // namespace parnet
