#pragma once

// Paragraph similarity networks: tf-idf vectors per paragraph, the complete
// cosine-weighted graph, and its reduction to a fixed edge density.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "parnet/corpus.hpp"
#include "parnet/error.hpp"
#include "parnet/graph.hpp"

namespace parnet {

struct TfIdfOptions {
  /// Base of the idf logarithm. Cosine similarities do not depend on it.
  double log_base = std::numbers::e;
};

/// Sparse tf-idf weights of one paragraph; `terms` index the model's
/// vocabulary and are strictly increasing. Zero weights are not stored.
struct TfIdfVector {
  std::size_t paragraph_index = 0;
  std::vector<std::uint32_t> terms;
  std::vector<double> weights;

  double norm() const {
    double s = 0;
    for (double w : weights) s += w * w;
    return std::sqrt(s);
  }
};

struct TfIdfModel {
  std::vector<std::string> vocabulary;  // first-appearance order
  std::vector<TfIdfVector> vectors;
  bool degenerate = false;              // fewer than two paragraphs: every idf is 0

  /// Weight of `word` in paragraph `p` (0 when absent).
  double weight(std::size_t p, std::string_view word) const {
    const auto it = std::find(vocabulary.begin(), vocabulary.end(), word);
    if (it == vocabulary.end()) return 0.0;
    const auto id = static_cast<std::uint32_t>(it - vocabulary.begin());
    const auto& v = vectors.at(p);
    const auto pos = std::lower_bound(v.terms.begin(), v.terms.end(), id);
    return (pos != v.terms.end() && *pos == id) ? v.weights[pos - v.terms.begin()] : 0.0;
  }
};

/// weight(w, d) = f_{w,d} / n * log(|D| / d_w), with n the token count of the
/// whole paragraph set and d_w the number of paragraphs containing w.
inline TfIdfModel tfidf_vectors(std::span<const Paragraph> paragraphs, TfIdfOptions opts = {}) {
  TfIdfModel model;
  std::unordered_map<std::string_view, std::uint32_t> ids;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> counts(paragraphs.size());
  std::vector<std::uint32_t> doc_freq;
  std::size_t total_tokens = 0;

  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    std::unordered_map<std::uint32_t, std::uint32_t> local;
    for (const auto& s : paragraphs[p].sentences) {
      for (const auto& tok : s.tokens) {
        auto [it, fresh] = ids.try_emplace(tok, static_cast<std::uint32_t>(model.vocabulary.size()));
        if (fresh) {
          model.vocabulary.push_back(tok);
          doc_freq.push_back(0);
        }
        ++local[it->second];
        ++total_tokens;
      }
    }
    for (auto [term, c] : local) {
      ++doc_freq[term];
      counts[p].emplace_back(term, c);
    }
    std::sort(counts[p].begin(), counts[p].end());
  }

  const double docs = static_cast<double>(paragraphs.size());
  model.degenerate = paragraphs.size() < 2;
  if (model.degenerate) diag::warn("degenerate corpus: a single paragraph gives every word idf 0");
  const double log_scale = 1.0 / std::log(opts.log_base);

  model.vectors.resize(paragraphs.size());
  for (std::size_t p = 0; p < paragraphs.size(); ++p) {
    auto& v = model.vectors[p];
    v.paragraph_index = paragraphs[p].index;
    for (auto [term, c] : counts[p]) {
      const double idf = std::log(docs / doc_freq[term]) * log_scale;
      if (idf <= 0.0 || total_tokens == 0) continue;
      v.terms.push_back(term);
      v.weights.push_back(static_cast<double>(c) / static_cast<double>(total_tokens) * idf);
    }
  }
  return model;
}

/// Cosine of two tf-idf vectors of the same model, 0 if either is all-zero.
inline double cosine_similarity(const TfIdfVector& a, const TfIdfVector& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  double dot = 0;
  std::size_t i = 0, j = 0;
  while (i < a.terms.size() && j < b.terms.size()) {
    if (a.terms[i] < b.terms[j]) {
      ++i;
    } else if (b.terms[j] < a.terms[i]) {
      ++j;
    } else {
      dot += a.weights[i++] * b.weights[j++];
    }
  }
  return std::clamp(dot / (na * nb), 0.0, 1.0);
}

/// Complete similarity graph: symmetric, zero diagonal, weights in [0, 1].
class WeightedNetwork {
 public:
  WeightedNetwork() = default;
  explicit WeightedNetwork(std::size_t n) : n_(n), w_(n * n, 0.0), labels_(n) {
    for (std::size_t i = 0; i < n; ++i) labels_[i] = i;
  }

  std::size_t node_count() const { return n_; }
  double weight(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  void set_weight(std::size_t i, std::size_t j, double w) {
    if (i == j) throw Error("weighted network has no self-loops");
    w_[i * n_ + j] = w;
    w_[j * n_ + i] = w;
  }
  /// Paragraph index carried by each node.
  const std::vector<std::size_t>& labels() const { return labels_; }
  std::vector<std::size_t>& labels() { return labels_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
  std::vector<std::size_t> labels_;
};

inline WeightedNetwork build_weighted(std::span<const Paragraph> paragraphs, TfIdfOptions opts = {}) {
  if (paragraphs.size() < 2)
    throw Error("a similarity network needs at least 2 paragraphs, got " + std::to_string(paragraphs.size()));
  const auto model = tfidf_vectors(paragraphs, opts);
  WeightedNetwork wn(paragraphs.size());
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    wn.labels()[i] = paragraphs[i].index;
    for (std::size_t j = i + 1; j < paragraphs.size(); ++j)
      wn.set_weight(i, j, cosine_similarity(model.vectors[i], model.vectors[j]));
  }
  return wn;
}

/// max(1, round(E * n(n-1)/2)), rounding halves up.
inline std::size_t target_edge_count(std::size_t n, double density) {
  const double pairs = static_cast<double>(n) * static_cast<double>(n - (n > 0)) / 2.0;
  const auto m = static_cast<std::size_t>(std::floor(density * pairs + 0.5));
  return std::max<std::size_t>(1, m);
}

/// Keeps the M heaviest edges, M = target_edge_count(n, E). Equal weights at
/// the cut are ordered by (min id, max id) ascending.
inline Network threshold_density(const WeightedNetwork& wn, double density = 0.05) {
  if (!(density > 0.0 && density <= 1.0))
    throw Error("density must lie in (0, 1], got " + std::to_string(density));
  const std::size_t n = wn.node_count();
  if (n < 2) throw Error("cannot threshold a network with fewer than 2 nodes");

  std::vector<Edge> all;
  all.reserve(n * (n - 1) / 2);
  bool any_signal = false;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const double w = wn.weight(i, j);
      any_signal |= w != 0.0;
      all.push_back({i, j, w});
    }
  if (!any_signal) throw Error("no signal: every similarity is zero, edges cannot be ranked");

  const std::size_t m = std::min(target_edge_count(n, density), all.size());
  auto heavier = [](const Edge& a, const Edge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), heavier);
  all.resize(m);
  const double threshold = all.back().weight;
  return Network(n, std::move(all), density, threshold);
}

}  // namespace parnet
