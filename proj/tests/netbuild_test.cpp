#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "parnet/corpus.hpp"
#include "parnet/netbuild.hpp"

using namespace parnet;

namespace {

std::vector<Paragraph> paragraphs(std::initializer_list<const char*> texts) {
  std::vector<Paragraph> out;
  for (const char* t : texts) {
    Paragraph p;
    p.index = out.size();
    p.sentences.push_back(Sentence{tokenize(t)});
    out.push_back(std::move(p));
  }
  return out;
}

// Counts occurrences by scanning every token of every paragraph for each
// query, straight from the definition.
double brute_tfidf(const std::vector<Paragraph>& ps, std::size_t d, const std::string& w, double base = std::exp(1.0)) {
  double n = 0, f = 0, dw = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    bool present = false;
    for (const auto& t : ps[i].tokens()) {
      n += 1;
      if (t == w) {
        present = true;
        if (i == d) f += 1;
      }
    }
    dw += present;
  }
  if (dw == 0) return 0;
  return f / n * std::log(static_cast<double>(ps.size()) / dw) / std::log(base);
}

double brute_cosine(const std::vector<Paragraph>& ps, std::size_t a, std::size_t b, double base = std::exp(1.0)) {
  std::set<std::string> vocab;
  for (const auto& p : ps)
    for (const auto& t : p.tokens()) vocab.insert(t);
  double dot = 0, na = 0, nb = 0;
  for (const auto& w : vocab) {
    const double x = brute_tfidf(ps, a, w, base), y = brute_tfidf(ps, b, w, base);
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  return (na == 0 || nb == 0) ? 0.0 : dot / std::sqrt(na * nb);
}

std::vector<Paragraph> random_paragraphs(std::mt19937_64& rng, std::size_t count) {
  static const char* words[] = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l"};
  std::uniform_int_distribution<int> len(1, 8), pick(0, 11);
  std::vector<Paragraph> out;
  for (std::size_t i = 0; i < count; ++i) {
    Sentence s;
    for (int k = len(rng); k > 0; --k) s.tokens.emplace_back(words[pick(rng)]);
    out.push_back(Paragraph{i, {s}});
  }
  return out;
}

}  // namespace

TEST(TfIdf, HandExample) {
  const auto ps = paragraphs({"a a b", "b c"});
  const auto m = tfidf_vectors(ps);
  EXPECT_NEAR(m.weight(0, "a"), 2.0 / 5.0 * std::log(2.0), 1e-15);
  EXPECT_NEAR(m.weight(0, "a"), 0.2773, 1e-4);
  EXPECT_EQ(m.weight(0, "b"), 0.0);
  EXPECT_EQ(m.weight(1, "b"), 0.0);
  EXPECT_NEAR(m.weight(1, "c"), 0.1386, 1e-4);
  EXPECT_NEAR(m.weight(1, "c"), brute_tfidf(ps, 1, "c"), 1e-15);
}

TEST(TfIdf, MatchesBruteForceCounting) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ps = random_paragraphs(rng, 2 + trial % 7);
    const auto m = tfidf_vectors(ps);
    for (std::size_t d = 0; d < ps.size(); ++d)
      for (const auto& w : m.vocabulary) EXPECT_NEAR(m.weight(d, w), brute_tfidf(ps, d, w), 1e-14);
  }
}

TEST(TfIdf, NoZeroEntriesStoredAndWordsFromSource) {
  std::mt19937_64 rng(6);
  const auto ps = random_paragraphs(rng, 9);
  const auto m = tfidf_vectors(ps);
  for (std::size_t d = 0; d < ps.size(); ++d) {
    const auto toks = ps[d].tokens();
    const auto& v = m.vectors[d];
    EXPECT_TRUE(std::is_sorted(v.terms.begin(), v.terms.end()));
    for (std::size_t k = 0; k < v.terms.size(); ++k) {
      EXPECT_GT(v.weights[k], 0.0);
      EXPECT_NE(std::find(toks.begin(), toks.end(), m.vocabulary[v.terms[k]]), toks.end());
    }
  }
}

TEST(TfIdf, UbiquitousWordHasZeroWeight) {
  const auto m = tfidf_vectors(paragraphs({"the cat", "the dog", "the end"}));
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(m.weight(d, "the"), 0.0);
}

TEST(TfIdf, SingleParagraphIsDegenerate) {
  std::vector<std::string> warnings;
  auto old = diag::set_warning_sink([&](const std::string& w) { warnings.push_back(w); });
  const auto m = tfidf_vectors(paragraphs({"only one paragraph"}));
  diag::set_warning_sink(old);
  EXPECT_TRUE(m.degenerate);
  ASSERT_EQ(m.vectors.size(), 1u);
  EXPECT_TRUE(m.vectors[0].terms.empty());
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("degenerate corpus"), std::string::npos);
}

TEST(Cosine, Examples) {
  TfIdfVector u{0, {0, 1}, {1.0, 1.0}}, v{1, {0}, {1.0}}, z{2, {}, {}}, w{3, {2, 3}, {0.5, 2.0}};
  EXPECT_NEAR(cosine_similarity(u, v), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(cosine_similarity(u, u), 1.0, 1e-15);
  EXPECT_EQ(cosine_similarity(u, w), 0.0);
  EXPECT_EQ(cosine_similarity(u, z), 0.0);
  EXPECT_EQ(cosine_similarity(z, z), 0.0);
  EXPECT_EQ(cosine_similarity(u, v), cosine_similarity(v, u));
}

TEST(Cosine, InvariantUnderLogBase) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ps = random_paragraphs(rng, 8);
    const auto e = build_weighted(ps);
    for (double base : {2.0, 10.0, 1.5}) {
      const auto b = build_weighted(ps, TfIdfOptions{base});
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = 0; j < ps.size(); ++j) EXPECT_NEAR(e.weight(i, j), b.weight(i, j), 1e-12);
    }
  }
}

TEST(BuildWeighted, IdenticalParagraphsGiveWeightOne) {
  // a third paragraph keeps idf positive for the shared words
  const auto wn = build_weighted(paragraphs({"red fox", "red fox", "blue sky"}));
  EXPECT_NEAR(wn.weight(0, 1), 1.0, 1e-15);
  EXPECT_EQ(wn.weight(0, 2), 0.0);
}

TEST(BuildWeighted, AllSharedWordsGiveZero) {
  const auto wn = build_weighted(paragraphs({"a b", "b a"}));
  EXPECT_EQ(wn.weight(0, 1), 0.0);
}

TEST(BuildWeighted, MatchesPairwiseOracle) {
  const auto ps = paragraphs({"a b c a", "b c d", "d e a a"});
  const auto wn = build_weighted(ps);
  ASSERT_EQ(wn.node_count(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(wn.weight(i, i), 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(wn.weight(i, j), wn.weight(j, i));
      if (i != j) EXPECT_NEAR(wn.weight(i, j), brute_cosine(ps, i, j), 1e-14);
    }
  }
}

TEST(BuildWeighted, RandomCorporaStayInUnitInterval) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ps = random_paragraphs(rng, 12);
    const auto wn = build_weighted(ps);
    for (std::size_t i = 0; i < 12; ++i)
      for (std::size_t j = 0; j < 12; ++j) {
        EXPECT_GE(wn.weight(i, j), 0.0);
        EXPECT_LE(wn.weight(i, j), 1.0);
        if (i < j) EXPECT_NEAR(wn.weight(i, j), brute_cosine(ps, i, j), 1e-12);
      }
  }
}

TEST(BuildWeighted, NeedsTwoParagraphs) { EXPECT_THROW(build_weighted(paragraphs({"solo"})), Error); }

TEST(Threshold, EdgeCountRule) {
  EXPECT_EQ(target_edge_count(10, 0.05), 2u);   // round(2.25)
  EXPECT_EQ(target_edge_count(4, 0.05), 1u);    // max(1, round(0.3))
  EXPECT_EQ(target_edge_count(10, 1.0), 45u);
  EXPECT_EQ(target_edge_count(5, 0.25), 3u);    // 2.5 rounds up
  EXPECT_EQ(target_edge_count(200, 0.05), 995u);
}

TEST(Threshold, TiesBrokenLexicographically) {
  WeightedNetwork wn(4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) wn.set_weight(i, j, 0.5);
  const auto net = threshold_density(wn, 0.5);
  ASSERT_EQ(net.edge_count(), 3u);
  EXPECT_TRUE(net.has_edge(0, 1));
  EXPECT_TRUE(net.has_edge(0, 2));
  EXPECT_TRUE(net.has_edge(0, 3));
  EXPECT_EQ(net.threshold(), 0.5);
}

TEST(Threshold, CompleteGraphAtDensityOne) {
  std::mt19937_64 rng(3);
  const auto wn = build_weighted(random_paragraphs(rng, 10));
  bool any = false;
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = i + 1; j < 10; ++j) any |= wn.weight(i, j) > 0;
  ASSERT_TRUE(any);
  EXPECT_EQ(threshold_density(wn, 1.0).edge_count(), 45u);
}

TEST(Threshold, NoSignalAndBadDensity) {
  WeightedNetwork wn(5);
  EXPECT_THROW(threshold_density(wn, 0.05), Error);
  wn.set_weight(0, 1, 0.3);
  EXPECT_THROW(threshold_density(wn, 0.0), Error);
  EXPECT_THROW(threshold_density(wn, 1.5), Error);
}

TEST(Threshold, KeepsHeaviestEdgesExactly) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> coarse(0, 4);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 5 + trial;
    WeightedNetwork wn(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) wn.set_weight(i, j, trial % 2 ? u(rng) : coarse(rng) / 4.0);
    for (double e : {0.05, 0.1, 0.3}) {
      const auto net = threshold_density(wn, e);
      EXPECT_EQ(net.edge_count(), target_edge_count(n, e));
      double min_kept = INFINITY, max_dropped = -INFINITY;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double w = wn.weight(i, j);
          if (net.has_edge(static_cast<NodeId>(i), static_cast<NodeId>(j)))
            min_kept = std::min(min_kept, w);
          else
            max_dropped = std::max(max_dropped, w);
        }
      EXPECT_GE(min_kept, max_dropped);
    }
  }
}

TEST(Threshold, PermutationEquivariantForDistinctWeights) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 1);
  const std::size_t n = 20;
  WeightedNetwork wn(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) wn.set_weight(i, j, u(rng));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  WeightedNetwork pw(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pw.set_weight(perm[i], perm[j], wn.weight(i, j));
  const auto a = threshold_density(wn, 0.1), b = threshold_density(pw, 0.1);
  ASSERT_EQ(a.edge_count(), b.edge_count());
  for (const auto& e : a.edges())
    EXPECT_TRUE(b.has_edge(static_cast<NodeId>(perm[e.u]), static_cast<NodeId>(perm[e.v])));
}

TEST(Network, RejectsInvalidEdges) {
  EXPECT_THROW(make_network(3, {{0, 0}}), Error);
  EXPECT_THROW(make_network(3, {{0, 3}}), Error);
  EXPECT_THROW(make_network(3, {{0, 1}, {1, 0}}), Error);
  const auto g = make_network(3, {{2, 0}, {1, 0}});
  EXPECT_EQ(g.edges()[0], (Edge{0, 1, 1.0}));
  EXPECT_EQ(g.edges()[1], (Edge{0, 2, 1.0}));
  EXPECT_EQ(g.degree(0), 2u);
}
