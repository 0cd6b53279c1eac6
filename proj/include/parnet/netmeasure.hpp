#pragma once

#include <cstdint>

#include "parnet/graph.hpp"
#include "parnet/measures/community.hpp"
#include "parnet/measures/paths.hpp"
#include "parnet/measures/record.hpp"
#include "parnet/measures/symmetry.hpp"
#include "parnet/measures/walks.hpp"

namespace parnet {

inline NodeMeasures node_measures(const Network& net) {
  return {degree(net),
          betweenness(net),
          clustering(net),
          neighborhood(net, 3),
          eccentricity(net),
          eigenvector_centrality(net).values,
          closeness(net),
          symmetry(net, 2, SymmetryVariant::Backbone),
          symmetry(net, 2, SymmetryVariant::Merged),
          symmetry(net, 3, SymmetryVariant::Backbone),
          symmetry(net, 3, SymmetryVariant::Merged),
          symmetry(net, 4, SymmetryVariant::Backbone),
          symmetry(net, 4, SymmetryVariant::Merged),
          generalized_accessibility(net),
          accessibility(net, 2),
          accessibility(net, 3)};
}

/// All 33 features of one network. `seed` drives community detection only.
inline std::array<double, kFeatureCount> measure_features(const Network& net, std::uint64_t seed) {
  if (net.edge_count() == 0) throw Error("cannot measure a network without edges");
  const double q = modularity(net, detect_communities(net, seed));
  return summarize(node_measures(net), q);
}

inline MeasurementRecord measure_network(const Network& net, std::uint64_t seed, std::string doc_id = {},
                                         DocKind kind = DocKind::RT, std::optional<int> sample = {}) {
  return MeasurementRecord{std::move(doc_id), kind, sample, measure_features(net, seed)};
}

}  // namespace parnet
