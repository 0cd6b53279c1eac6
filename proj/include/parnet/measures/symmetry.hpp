#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "parnet/graph.hpp"
#include "parnet/measures/paths.hpp"

namespace parnet {

enum class SymmetryVariant { Backbone, Merged };

/// BFS rings around a root, cut at depth h.
struct ConcentricPattern {
  NodeId root = 0;
  std::vector<std::vector<NodeId>> levels;  // levels[r] = nodes at distance r
  std::vector<int> level_of;                // -1 beyond depth h or unreachable
};

inline ConcentricPattern concentric_pattern(const Network& net, NodeId root, int h) {
  ConcentricPattern cp;
  cp.root = root;
  cp.level_of.assign(net.node_count(), -1);
  cp.levels.assign(static_cast<std::size_t>(h) + 1, {});
  cp.level_of[root] = 0;
  cp.levels[0].push_back(root);
  for (int r = 0; r < h; ++r)
    for (NodeId v : cp.levels[r])
      for (NodeId w : net.neighbors(v))
        if (cp.level_of[w] == -1) {
          cp.level_of[w] = r + 1;
          cp.levels[r + 1].push_back(w);
        }
  return cp;
}

namespace detail {

// Units of flow at one level: single nodes (backbone) or connected
// intra-level groups (merged). `unit_of` maps a node to its unit index.
struct LevelUnits {
  std::vector<std::vector<NodeId>> units;
};

inline LevelUnits level_units(const Network& net, const ConcentricPattern& cp, int r, SymmetryVariant variant,
                              std::vector<int>& unit_of) {
  LevelUnits lu;
  const auto& nodes = cp.levels[r];
  if (variant == SymmetryVariant::Backbone) {
    for (NodeId v : nodes) {
      unit_of[v] = static_cast<int>(lu.units.size());
      lu.units.push_back({v});
    }
    return lu;
  }
  for (NodeId v : nodes) unit_of[v] = -1;
  for (NodeId start : nodes) {
    if (unit_of[start] != -1) continue;
    const int id = static_cast<int>(lu.units.size());
    lu.units.push_back({start});
    unit_of[start] = id;
    for (std::size_t q = 0; q < lu.units.back().size(); ++q) {
      const NodeId v = lu.units.back()[q];
      for (NodeId w : net.neighbors(v))
        if (cp.level_of[w] == r && unit_of[w] == -1) {
          unit_of[w] = id;
          lu.units.back().push_back(w);
        }
    }
  }
  return lu;
}

}  // namespace detail

/// Mass starts at the root and flows outward one level at a time, split
/// evenly over distinct next-level units. Units without a next-level
/// neighbor are dead ends: counted in eta, their mass lost. The score is
/// exp(entropy of the level-h mass, renormalized) / (|H_h| + sum eta).
inline double symmetry_at(const Network& net, NodeId root, int h, SymmetryVariant variant) {
  const auto cp = concentric_pattern(net, root, h);
  if (cp.levels[h].empty()) return 0.0;

  std::vector<int> unit_of(net.node_count(), -1);
  auto current = detail::level_units(net, cp, 0, variant, unit_of);
  std::vector<double> mass(current.units.size(), 1.0);
  std::size_t dead_ends = 0;

  for (int r = 0; r < h; ++r) {
    std::vector<int> unit_of_next(net.node_count(), -1);
    auto next = detail::level_units(net, cp, r + 1, variant, unit_of_next);
    std::vector<double> next_mass(next.units.size(), 0.0);
    std::vector<int> seen(next.units.size(), -1);
    for (std::size_t u = 0; u < current.units.size(); ++u) {
      std::vector<int> targets;
      for (NodeId v : current.units[u])
        for (NodeId w : net.neighbors(v))
          if (cp.level_of[w] == r + 1 && seen[unit_of_next[w]] != static_cast<int>(u)) {
            seen[unit_of_next[w]] = static_cast<int>(u);
            targets.push_back(unit_of_next[w]);
          }
      if (targets.empty()) {
        ++dead_ends;
        continue;
      }
      const double share = mass[u] / static_cast<double>(targets.size());
      for (int t : targets) next_mass[t] += share;
    }
    current = std::move(next);
    mass = std::move(next_mass);
  }

  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  double entropy = 0;
  for (double m : mass)
    if (m > 0) {
      const double p = m / total;
      entropy -= p * std::log(p);
    }
  return std::exp(entropy) / static_cast<double>(current.units.size() + dead_ends);
}

inline std::vector<double> symmetry(const Network& net, int h, SymmetryVariant variant) {
  if (h < 1) throw Error("symmetry needs h >= 1");
  std::vector<double> s(net.node_count());
  for (NodeId i = 0; i < s.size(); ++i) s[i] = symmetry_at(net, i, h, variant);
  return s;
}

}  // namespace parnet
