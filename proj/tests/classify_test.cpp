#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "parnet/classify.hpp"

using namespace parnet;

namespace {

// Dual SVM objective 1/2 a'Qa - e'a with Q_ij = y_i y_j <x_i, x_j>.
double dual_objective(const Eigen::MatrixXd& q, const Eigen::VectorXd& a) { return 0.5 * a.dot(q * a) - a.sum(); }

// Projection onto {0 <= a <= C, y'a = 0} by bisection on the multiplier.
Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::VectorXd& y, double C) {
  auto at = [&](double lambda) { return (v - lambda * y).cwiseMax(0.0).cwiseMin(C).eval(); };
  double lo = -1e6, hi = 1e6;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (y.dot(at(mid)) > 0 ? lo : hi) = mid;
  }
  return at(0.5 * (lo + hi));
}

// Accelerated projected gradient on the dual, run far past convergence.
double qp_oracle(const std::vector<std::vector<double>>& x, const std::vector<int>& y, double C) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd q(n, n);
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    yy(i) = y[i];
    for (Eigen::Index j = 0; j < n; ++j) {
      double s = 0;
      for (std::size_t d = 0; d < x[i].size(); ++d) s += x[i][d] * x[j][d];
      q(i, j) = y[i] * y[j] * s;
    }
  }
  const double lip = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff(), 1e-12);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(n), z = a;
  double t = 1;
  for (int it = 0; it < 20000; ++it) {
    const Eigen::VectorXd next = project(z - (q * z - Eigen::VectorXd::Ones(n)) / lip, yy, C);
    const double t2 = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
    z = next + ((t - 1) / t2) * (next - a);
    a = next;
    t = t2;
  }
  return dual_objective(q, a);
}

// k Gaussian clusters in d dimensions, centres spread along the axes.
std::vector<LabeledSample> blobs(std::size_t per_class, std::size_t classes, std::size_t dim, double spread,
                                 std::uint64_t seed, double sep = 4.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, spread);
  std::vector<LabeledSample> out;
  for (std::size_t i = 0; i < per_class; ++i)
    for (std::size_t c = 0; c < classes; ++c) {
      LabeledSample s;
      s.label = "class" + std::to_string(c);
      s.doc_id = s.label + "_" + std::to_string(i);
      for (std::size_t d = 0; d < dim; ++d) s.features.push_back(g(rng) + (d % classes == c ? sep : 0.0));
      out.push_back(s);
    }
  return out;
}

FeatureMatrix kind_matrix(const std::array<std::array<double, kFeatureCount>, 3>& by_kind, std::size_t copies = 3) {
  FeatureMatrix m;
  m.standardized = true;
  for (std::size_t c = 0; c < copies; ++c)
    for (int k = 0; k < 3; ++k) m.rows.push_back({"d" + std::to_string(c), static_cast<DocKind>(k), std::nullopt, by_kind[k]});
  return m;
}

}  // namespace

TEST(SelectFeatures, SingleSeparatingFeatureRanksFirst) {
  std::array<std::array<double, kFeatureCount>, 3> v{};
  v[0][7] = 2.0;
  for (std::size_t f = 0; f < kFeatureCount; ++f) v[0][f] += 0.001 * static_cast<double>(f % 3);
  const auto sel = select_features(kind_matrix(v));
  EXPECT_EQ(sel.rank_ss[7], 0u);
  EXPECT_EQ(sel.rank_sw[7], 0u);
  EXPECT_EQ(sel.indices.front(), 7u);
  EXPECT_FALSE(sel.fallback);
  EXPECT_EQ(sel.names().front(), "N_std");
}

TEST(SelectFeatures, IntersectionOrderedByCombinedRank) {
  std::array<std::array<double, kFeatureCount>, 3> v{};
  // SW gaps: f0 > f1 > f2 ... ; SS gaps: f2 > f1 > f0, only f0..f2 and f20.. nonzero
  for (std::size_t f = 0; f < 12; ++f) {
    v[1][f] = -(12.0 - static_cast<double>(f));
    v[2][f] = -(1.0 + static_cast<double>(f));
  }
  const auto sel = select_features(kind_matrix(v));
  // top-10 SW is f0..f9, top-10 SS is f11..f2; the intersection is f2..f9
  EXPECT_EQ(sel.indices.size(), 8u);
  for (std::size_t i = 0; i < sel.indices.size(); ++i) {
    EXPECT_GE(sel.indices[i], 2u);
    EXPECT_LE(sel.indices[i], 9u);
    if (i > 0)
      EXPECT_LE(sel.rank_ss[sel.indices[i - 1]] + sel.rank_sw[sel.indices[i - 1]],
                sel.rank_ss[sel.indices[i]] + sel.rank_sw[sel.indices[i]]);
  }
}

TEST(SelectFeatures, DisjointListsFallBack) {
  std::array<std::array<double, kFeatureCount>, 3> v{};
  for (std::size_t f = 0; f < 10; ++f) {
    v[1][f] = -(3.0 + 0.1 * static_cast<double>(f));       // SW-only gaps
    v[2][f + 10] = -(3.0 + 0.1 * static_cast<double>(f));  // SS-only gaps
  }
  int warnings = 0;
  auto old = diag::set_warning_sink([&](const std::string&) { ++warnings; });
  const auto sel = select_features(kind_matrix(v));
  diag::set_warning_sink(old);
  EXPECT_TRUE(sel.fallback);
  EXPECT_EQ(warnings, 1);
  std::vector<std::size_t> got = sel.indices;
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, (std::vector<std::size_t>{5, 6, 7, 8, 9, 15, 16, 17, 18, 19}));
}

TEST(Smo, SeparableToySet) {
  std::vector<std::vector<double>> x = {{0, 0}, {1, 0}, {0, 1}, {3, 3}, {4, 3}, {3, 4}};
  std::vector<int> y = {-1, -1, -1, 1, 1, 1};
  const auto m = train_binary(x, y, {.C = 100.0});
  EXPECT_TRUE(m.converged);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_GT(y[i] * m.decision(x[i]), 0);
  // the hard margin here is between (1,0),(0,1) and (3,3): decision = +-1 on them
  EXPECT_NEAR(m.decision({1, 0}), -1.0, 1e-2);
  EXPECT_NEAR(m.decision({3, 3}), 1.0, 1e-2);
}

TEST(Smo, MatchesConvexQpOracle) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> size(4, 20), dim(1, 5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = size(rng), d = dim(rng);
    std::vector<std::vector<double>> x(n, std::vector<double>(d));
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = i % 2 == 0 ? 1 : -1;
      for (auto& v : x[i]) v = g(rng) + 0.7 * y[i];
    }
    if (trial % 5 == 0) {  // contradictory duplicates
      x[1] = x[0];
    }
    const double C = trial % 3 == 0 ? 0.1 : (trial % 3 == 1 ? 1.0 : 10.0);
    const auto m = train_binary(x, y, {.C = C});
    ASSERT_TRUE(m.converged);
    const double ref = qp_oracle(x, y, C);
    EXPECT_NEAR(m.objective, ref, 1e-4 * std::max(1.0, std::abs(ref))) << "trial " << trial;
    double ya = 0;
    for (int i = 0; i < n; ++i) {
      EXPECT_GE(m.alpha[i], -1e-12);
      EXPECT_LE(m.alpha[i], C + 1e-12);
      ya += y[i] * m.alpha[i];
    }
    EXPECT_NEAR(ya, 0.0, 1e-9);
  }
}

TEST(Smo, RejectsBadInput) {
  EXPECT_THROW(train_binary({{0}, {1}}, {1, 1}), Error);
  EXPECT_THROW(train_binary({{0}, {1}}, {1, -1}, {.C = 0}), Error);
  EXPECT_THROW(train_binary({{0}, {1, 2}}, {1, -1}), Error);
  EXPECT_THROW(train({LabeledSample{{1.0}, "a", "x"}, LabeledSample{{2.0}, "a", "y"}}), Error);
}

TEST(Smo, ScalingWithRescaledCKeepsPredictions) {
  const auto data = blobs(15, 2, 3, 1.5, 2, 2.0);
  std::vector<std::vector<double>> x, xs;
  std::vector<int> y;
  const double s = 3.0;
  for (const auto& d : data) {
    x.push_back(d.features);
    xs.push_back(d.features);
    for (auto& v : xs.back()) v *= s;
    y.push_back(d.label == "class0" ? 1 : -1);
  }
  SmoOptions tight;
  tight.tolerance = 1e-8;
  tight.C = 1.0;
  const auto a = train_binary(x, y, tight);
  tight.C = 1.0 / (s * s);
  const auto b = train_binary(xs, y, tight);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> p(3), ps(3);
    for (int d = 0; d < 3; ++d) ps[d] = s * (p[d] = g(rng));
    EXPECT_NEAR(a.decision(p), b.decision(ps), 1e-5);
  }
}

TEST(OneVsOne, ThreeClassBlobs) {
  const auto data = blobs(10, 3, 3, 0.5, 4);
  const auto clf = train(data);
  EXPECT_EQ(clf.pairs.size(), 3u);
  EXPECT_EQ(clf.classes, (std::vector<std::string>{"class0", "class1", "class2"}));
  for (const auto& s : data) EXPECT_EQ(clf.predict(s.features).label, s.label);
  EXPECT_THROW(clf.predict({1.0}), Error);
}

TEST(OneVsOne, VoteTieGoesToLargestMargin) {
  Classifier clf;
  clf.classes = {"a", "b", "c"};
  clf.dimension = 1;
  // a beats b, b beats c, c beats a: one vote each
  auto pair = [](std::size_t p, std::size_t n, double bias) {
    BinaryModel m;
    m.positive = p;
    m.negative = n;
    m.w = {0.0};
    m.bias = bias;
    return m;
  };
  clf.pairs = {pair(0, 1, 0.5), pair(1, 2, 2.0), pair(0, 2, -0.1)};
  const auto p = clf.predict({0.0});
  EXPECT_EQ(p.votes, (std::vector<int>{1, 1, 1}));
  // margins: a 0.5-0.1=0.4, b -0.5+2=1.5, c -2+0.1=-1.9
  EXPECT_EQ(p.label, "b");
  EXPECT_NEAR(p.margins[1], 1.5, 1e-12);
}

TEST(OneVsOne, ClassRenamingInvariance) {
  auto data = blobs(8, 3, 4, 1.5, 5, 1.5);
  const auto clf = train(data);
  auto renamed = data;
  const std::map<std::string, std::string> name = {{"class0", "zeta"}, {"class1", "alpha"}, {"class2", "mid"}};
  for (auto& s : renamed) s.label = name.at(s.label);
  const auto clf2 = train(renamed);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(1.0, 2.0);
  for (int t = 0; t < 300; ++t) {
    std::vector<double> p(4);
    for (auto& v : p) v = g(rng);
    EXPECT_EQ(name.at(clf.predict(p).label), clf2.predict(p).label);
  }
}

TEST(LooCv, ConfusionInvariants) {
  const auto data = blobs(8, 3, 3, 1.5, 7, 1.5);
  const auto r = loo_cv(data, {}, 2);
  ASSERT_EQ(r.confusion.size(), 3u);
  std::size_t trace = 0, total = 0;
  for (std::size_t a = 0; a < 3; ++a) {
    std::size_t row = 0;
    for (std::size_t b = 0; b < 3; ++b) row += r.confusion[a][b];
    EXPECT_EQ(row, 8u);
    trace += r.confusion[a][a];
    total += row;
    EXPECT_NEAR(r.tpr[a] + r.fnr[a], 1.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(r.accuracy, static_cast<double>(trace) / static_cast<double>(total));
  EXPECT_EQ(loo_cv(data, {}, 1).predicted, r.predicted);
  EXPECT_THROW(loo_cv({data[0], data[1]}), Error);
}

TEST(LooCv, PredictionsMatchModelsTrainedWithoutTheSample) {
  const auto data = blobs(6, 2, 3, 2.0, 8, 1.0);
  const auto r = loo_cv(data);
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto rest = data;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    EXPECT_EQ(train(rest).predict(data[i].features).label, r.predicted[i]);
  }
}

TEST(LooCv, PermutedLabelsGiveChanceAccuracy) {
  auto data = blobs(40, 2, 4, 1.0, 9, 3.0);
  std::mt19937_64 rng(10);
  std::vector<std::string> labels;
  for (const auto& s : data) labels.push_back(s.label);
  std::shuffle(labels.begin(), labels.end(), rng);
  for (std::size_t i = 0; i < data.size(); ++i) data[i].label = labels[i];
  const auto r = loo_cv(data);
  // binomial(80, 0.5) 99% interval is roughly 0.5 +- 0.144
  EXPECT_GT(r.accuracy, 0.5 - 0.144);
  EXPECT_LT(r.accuracy, 0.5 + 0.144);
  EXPECT_EQ(loo_cv(blobs(40, 2, 4, 1.0, 9, 3.0)).accuracy, 1.0);
}

TEST(LooCv, GridSelection) {
  const auto data = blobs(6, 2, 2, 1.0, 11, 2.0);
  const auto r = loo_cv(data, {.value = 1.0, .grid = true});
  for (double c : r.chosen_c)
    EXPECT_NE(std::find(default_c_grid().begin(), default_c_grid().end(), c), default_c_grid().end());
  const auto j = to_json(r);
  EXPECT_EQ(j["predictions"].size(), data.size());
}

TEST(Lda, SeparatesSphericalClusters) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> x;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    const int c = i % 2;
    x.push_back({g(rng) + 8.0 * c, g(rng) - 5.0 * c, g(rng)});
    labels.push_back(c);
  }
  const auto p = lda_project(x, labels);
  EXPECT_FALSE(p.regularized);
  double norm = 0;
  for (double v : p.w) norm += v * v;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  double sum = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(p.projection[i] > 0, labels[i] == 1);
    sum += p.projection[i];
  }
  EXPECT_NEAR(sum, 0.0, 1e-9);
}

TEST(Lda, InvariantUnderLinearTransform) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g;
  std::vector<std::vector<double>> x, tx;
  std::vector<int> labels;
  const double a[3][3] = {{2, 1, 0}, {0, 1, -1}, {1, 0, 3}};
  for (int i = 0; i < 40; ++i) {
    const int c = i % 2;
    std::vector<double> v = {g(rng) + c, g(rng), g(rng) - c};
    std::vector<double> t(3, 0.0);
    for (int r = 0; r < 3; ++r)
      for (int k = 0; k < 3; ++k) t[r] += a[r][k] * v[k];
    x.push_back(v);
    tx.push_back(t);
    labels.push_back(c);
  }
  auto argsort = [](const std::vector<double>& v) {
    std::vector<std::size_t> o(v.size());
    std::iota(o.begin(), o.end(), 0);
    std::sort(o.begin(), o.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    return o;
  };
  EXPECT_EQ(argsort(lda_project(x, labels).projection), argsort(lda_project(tx, labels).projection));
}

TEST(Lda, DegenerateInputs) {
  EXPECT_THROW(lda_project({{1, 2}, {3, 4}, {1, 2}, {3, 4}}, {0, 0, 1, 1}), Error);
  EXPECT_THROW(lda_project({{1}, {2}, {3}}, {0, 0, 1}), Error);
  // fewer samples than dimensions: singular scatter, ridge applies
  const auto p = lda_project({{1, 0, 0, 0}, {1, 1, 0, 0}, {0, 0, 1, 2}, {0, 0, 2, 1}}, {0, 0, 1, 1});
  EXPECT_TRUE(p.regularized);
  EXPECT_LT(p.projection[0], 0);
  EXPECT_GT(p.projection[3], 0);
}

TEST(ClassifyUnknown, TrainingRecordAndModelRoundTrip) {
  // raw records: RT rows have a high Q
  std::mt19937_64 rng(14);
  std::normal_distribution<double> g;
  FeatureMatrix raw;
  for (int d = 0; d < 8; ++d)
    for (int k = 0; k < 3; ++k) {
      MeasurementRecord r{"d" + std::to_string(d), static_cast<DocKind>(k), k ? std::optional<int>(0) : std::nullopt, {}};
      for (auto& v : r.features) v = 5.0 + g(rng);
      r.features[kQ] = (k == 0 ? 0.7 : 0.4) + 0.02 * g(rng);
      raw.rows.push_back(r);
    }
  const auto z = standardize(raw);
  const std::vector<std::size_t> feats = {kQ, 3};
  std::vector<LabeledSample> samples;
  for (const auto& r : z.rows)
    samples.push_back({{r.features[kQ], r.features[3]}, r.kind == DocKind::RT ? "REAL" : "SHUFFLED", r.doc_id});
  TrainedModel model{train(samples), feats, *z.parameters};
  EXPECT_EQ(classify_unknown(model, raw.rows[0]).label, "REAL");
  EXPECT_EQ(classify_unknown(model, raw.rows[1]).label, "SHUFFLED");
  EXPECT_THROW(classify_unknown(model.classifier, raw.rows[0], {kQ}, model.standardization), Error);

  const auto back = model_from_json(nlohmann::json::parse(to_json(model).dump()));
  EXPECT_EQ(back.features, feats);
  for (const auto& r : raw.rows) {
    const auto a = classify_unknown(model, r), b = classify_unknown(back, r);
    EXPECT_EQ(a.label, b.label);
    EXPECT_DOUBLE_EQ(a.margins[0], b.margins[0]);
  }
  auto broken = to_json(model);
  broken["features"][0] = "bogus";
  EXPECT_THROW(model_from_json(broken), Error);
  broken = to_json(model);
  broken.erase("models");
  EXPECT_THROW(model_from_json(broken), Error);
}
