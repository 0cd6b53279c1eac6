#pragma once

// Feature selection, linear SVM trained by SMO (one-vs-one for more than two
// classes), leave-one-out evaluation, a 1-D discriminant projection, and
// verdicts for held-out documents.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parnet/error.hpp"
#include "parnet/experiment.hpp"
#include "parnet/measures/record.hpp"
#include "parnet/parallel.hpp"

namespace parnet {

// ---------------------------------------------------------------------------
// Feature selection

struct FeatureSelection {
  std::vector<std::size_t> indices;  // selected features, best first
  bool fallback = false;             // top lists were disjoint
  std::array<std::size_t, kFeatureCount> rank_ss{};  // 0 = largest |RT - SS|
  std::array<std::size_t, kFeatureCount> rank_sw{};

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (auto i : indices) out.emplace_back(kFeatureNames[i]);
    return out;
  }
};

/// Ranks features by |mean RT - mean SS| and by |mean RT - mean SW| and
/// keeps those in both top-`top` lists, ordered by summed rank (ties by
/// column). Disjoint lists fall back to the union of both top-`fallback_top`.
inline FeatureSelection select_features(const FeatureMatrix& m, std::size_t top = 10, std::size_t fallback_top = 5) {
  const auto rep = criterion_a(m);
  FeatureSelection sel;
  auto rank_by = [&](auto gap) {
    std::vector<std::size_t> order(kFeatureCount);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(gap(rep.features[a])) > std::abs(gap(rep.features[b]));
    });
    std::array<std::size_t, kFeatureCount> rank{};
    for (std::size_t r = 0; r < kFeatureCount; ++r) rank[order[r]] = r;
    return rank;
  };
  sel.rank_ss = rank_by([](const CriterionARow& r) { return r.gap_ss; });
  sel.rank_sw = rank_by([](const CriterionARow& r) { return r.gap_sw; });

  auto pick = [&](std::size_t k, bool both) {
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const bool in_ss = sel.rank_ss[f] < k, in_sw = sel.rank_sw[f] < k;
      if (both ? (in_ss && in_sw) : (in_ss || in_sw)) out.push_back(f);
    }
    std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
      return sel.rank_ss[a] + sel.rank_sw[a] < sel.rank_ss[b] + sel.rank_sw[b];
    });
    return out;
  };
  sel.indices = pick(top, true);
  if (sel.indices.empty()) {
    diag::warn("feature selection: top lists share no feature, using the union of both top-" +
               std::to_string(fallback_top));
    sel.indices = pick(fallback_top, false);
    sel.fallback = true;
  }
  return sel;
}

// ---------------------------------------------------------------------------
// Binary linear SVM (SMO)

struct SmoOptions {
  double C = 1.0;
  double tolerance = 1e-3;  // on the maximal KKT violation
  std::size_t max_iterations = 10'000'000;
};

struct BinaryModel {
  std::size_t positive = 0;  // class index predicted when decision > 0
  std::size_t negative = 1;
  double C = 1.0;
  std::vector<double> w;
  double bias = 0;
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> coefficients;  // alpha_i * y_i per support vector
  std::vector<double> alpha;         // full dual solution, training order
  double objective = 0;              // dual objective 1/2 a'Qa - e'a
  std::size_t iterations = 0;
  bool converged = false;

  double decision(const std::vector<double>& x) const {
    double s = bias;
    for (std::size_t d = 0; d < w.size(); ++d) s += w[d] * x[d];
    return s;
  }
};

/// Labels are +1 / -1. Working pairs are the maximal violating pair, ties
/// broken by the lower index, so training is deterministic.
inline BinaryModel train_binary(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                const SmoOptions& opt = {}) {
  const std::size_t n = x.size();
  if (n == 0 || y.size() != n) throw Error("SMO needs a non-empty, labelled training set");
  if (!(opt.C > 0)) throw Error("SVM regularization C must be positive");
  const bool has_pos = std::count(y.begin(), y.end(), 1) > 0;
  const bool has_neg = std::count(y.begin(), y.end(), -1) > 0;
  if (!has_pos || !has_neg) throw Error("SVM training needs samples of both classes");
  const std::size_t dim = x.front().size();
  for (const auto& row : x)
    if (row.size() != dim) throw Error("training samples differ in dimensionality");

  std::vector<double> k(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0;
      for (std::size_t d = 0; d < dim; ++d) s += x[i][d] * x[j][d];
      k[i * n + j] = k[j * n + i] = s;
    }
  auto K = [&](std::size_t i, std::size_t j) { return k[i * n + j]; };

  const double C = opt.C;
  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  BinaryModel m;
  m.C = C;
  auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0); };
  auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0) || (y[t] == -1 && alpha[t] < C); };

  for (m.iterations = 0; m.iterations < opt.max_iterations; ++m.iterations) {
    double gmax = -INFINITY, gmin = INFINITY;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > gmax) gmax = v, i = t;
      if (in_low(t) && v < gmin) gmin = v, j = t;
    }
    if (i == n || j == n || gmax - gmin < opt.tolerance) {
      m.converged = true;
      break;
    }

    double quad = K(i, i) + K(j, j) - 2 * K(i, j);
    if (quad <= 0) quad = 1e-12;
    const double old_i = alpha[i], old_j = alpha[j];
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else if (alpha[i] < 0) {
        alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else if (alpha[j] > C) {
        alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else if (alpha[j] < 0) {
        alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else if (alpha[i] < 0) {
        alpha[i] = 0, alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * (y[i] * K(t, i) * di + y[j] * K(t, j) * dj);
  }
  if (!m.converged) diag::warn("SMO stopped at the iteration cap before meeting the KKT tolerance");

  // bias: average over free vectors, else midpoint of the feasible range
  double ub = INFINITY, lb = -INFINITY, sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2;
  m.bias = -rho;

  m.w.assign(dim, 0.0);
  double obj = 0;
  for (std::size_t t = 0; t < n; ++t) {
    obj += alpha[t] * (grad[t] - 1.0);
    if (alpha[t] <= 0) continue;
    const double c = alpha[t] * y[t];
    for (std::size_t d = 0; d < dim; ++d) m.w[d] += c * x[t][d];
    m.support_vectors.push_back(x[t]);
    m.coefficients.push_back(c);
  }
  m.objective = obj / 2;
  m.alpha = std::move(alpha);
  return m;
}

// ---------------------------------------------------------------------------
// Multi-class (one-vs-one)

struct LabeledSample {
  std::vector<double> features;
  std::string label;
  std::string doc_id;
};

struct Prediction {
  std::size_t class_index = 0;
  std::string label;
  std::vector<int> votes;        // per class
  std::vector<double> margins;   // per class: summed decision values oriented toward it
};

struct Classifier {
  std::vector<std::string> classes;  // first-appearance order in training data
  double C = 1.0;
  std::size_t dimension = 0;
  std::vector<BinaryModel> pairs;    // (a, b) with a < b, a is the positive side

  Prediction predict(const std::vector<double>& x) const {
    if (x.size() != dimension)
      throw Error("sample has " + std::to_string(x.size()) + " features, the model expects " +
                  std::to_string(dimension));
    Prediction p;
    p.votes.assign(classes.size(), 0);
    p.margins.assign(classes.size(), 0.0);
    for (const auto& m : pairs) {
      const double d = m.decision(x);
      ++p.votes[d > 0 ? m.positive : m.negative];
      p.margins[m.positive] += d;
      p.margins[m.negative] -= d;
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes.size(); ++c)
      if (p.votes[c] > p.votes[best] || (p.votes[c] == p.votes[best] && p.margins[c] > p.margins[best])) best = c;
    p.class_index = best;
    p.label = classes[best];
    return p;
  }
};

inline Classifier train(const std::vector<LabeledSample>& samples, double C = 1.0, const SmoOptions& base = {}) {
  Classifier clf;
  clf.C = C;
  std::vector<std::size_t> cls;
  for (const auto& s : samples) {
    auto it = std::find(clf.classes.begin(), clf.classes.end(), s.label);
    if (it == clf.classes.end()) {
      clf.classes.push_back(s.label);
      it = clf.classes.end() - 1;
    }
    cls.push_back(static_cast<std::size_t>(it - clf.classes.begin()));
  }
  if (clf.classes.size() < 2) throw Error("training needs at least two classes");
  clf.dimension = samples.front().features.size();
  SmoOptions opt = base;
  opt.C = C;
  for (std::size_t a = 0; a < clf.classes.size(); ++a)
    for (std::size_t b = a + 1; b < clf.classes.size(); ++b) {
      std::vector<std::vector<double>> x;
      std::vector<int> y;
      for (std::size_t i = 0; i < samples.size(); ++i)
        if (cls[i] == a || cls[i] == b) {
          x.push_back(samples[i].features);
          y.push_back(cls[i] == a ? 1 : -1);
        }
      auto m = train_binary(x, y, opt);
      m.positive = a;
      m.negative = b;
      clf.pairs.push_back(std::move(m));
    }
  return clf;
}

// ---------------------------------------------------------------------------
// Leave-one-out evaluation

inline const std::vector<double>& default_c_grid() {
  static const std::vector<double> grid{0.01, 0.1, 1, 10, 100};
  return grid;
}

/// Either a fixed C or a grid searched by inner leave-one-out.
struct SvmC {
  double value = 1.0;
  bool grid = false;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [actual][predicted]
  double accuracy = 0;
  std::vector<double> tpr, fnr, fpr;
  std::vector<std::string> doc_ids, actual, predicted;
  std::vector<double> chosen_c;                     // per fold
  std::size_t samples = 0;
};

namespace detail {
inline double loo_accuracy(const std::vector<LabeledSample>& samples, double C) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::vector<LabeledSample> rest;
    rest.reserve(samples.size() - 1);
    for (std::size_t j = 0; j < samples.size(); ++j)
      if (j != i) rest.push_back(samples[j]);
    hits += train(rest, C).predict(samples[i].features).label == samples[i].label;
  }
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}
}  // namespace detail

/// Highest inner-LOO accuracy on the grid; ties go to the earlier entry.
inline double select_c(const std::vector<LabeledSample>& samples, const std::vector<double>& grid = default_c_grid()) {
  double best_c = grid.front(), best_acc = -1;
  for (double c : grid) {
    const double acc = detail::loo_accuracy(samples, c);
    if (acc > best_acc) best_acc = acc, best_c = c;
  }
  return best_c;
}

inline EvalReport loo_cv(const std::vector<LabeledSample>& samples, SvmC c = {}, std::size_t workers = 0) {
  const std::size_t n = samples.size();
  if (n < 3) throw Error("leave-one-out evaluation needs at least 3 samples");
  EvalReport rep;
  rep.samples = n;
  for (const auto& s : samples)
    if (std::find(rep.classes.begin(), rep.classes.end(), s.label) == rep.classes.end())
      rep.classes.push_back(s.label);
  rep.predicted.resize(n);
  rep.chosen_c.resize(n);
  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<LabeledSample> rest;
    rest.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) rest.push_back(samples[j]);
    const double C = c.grid ? select_c(rest) : c.value;
    rep.chosen_c[i] = C;
    rep.predicted[i] = train(rest, C).predict(samples[i].features).label;
  });

  const std::size_t k = rep.classes.size();
  auto index_of = [&](const std::string& l) {
    return static_cast<std::size_t>(std::find(rep.classes.begin(), rep.classes.end(), l) - rep.classes.begin());
  };
  rep.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.doc_ids.push_back(samples[i].doc_id);
    rep.actual.push_back(samples[i].label);
    ++rep.confusion[index_of(samples[i].label)][index_of(rep.predicted[i])];
    hits += samples[i].label == rep.predicted[i];
  }
  rep.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  for (std::size_t a = 0; a < k; ++a) {
    std::size_t row = 0, col_other = 0, negatives = 0;
    for (std::size_t b = 0; b < k; ++b) {
      row += rep.confusion[a][b];
      if (b != a) {
        col_other += rep.confusion[b][a];
        for (std::size_t p = 0; p < k; ++p) negatives += rep.confusion[b][p];
      }
    }
    const double tpr = row ? static_cast<double>(rep.confusion[a][a]) / static_cast<double>(row) : 0.0;
    rep.tpr.push_back(tpr);
    rep.fnr.push_back(row ? 1.0 - tpr : 0.0);
    rep.fpr.push_back(negatives ? static_cast<double>(col_other) / static_cast<double>(negatives) : 0.0);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Linear discriminant projection

struct LdaProjection {
  std::vector<double> w;           // unit length, oriented so class 1 projects higher
  std::vector<double> projection;  // per sample, pooled mean at 0
  bool regularized = false;
};

/// w ~ Sw^-1 (mu1 - mu0). `labels` are 0/1.
inline LdaProjection lda_project(const std::vector<std::vector<double>>& x, const std::vector<int>& labels) {
  const std::size_t n = x.size();
  if (n == 0 || labels.size() != n) throw Error("LDA needs labelled samples");
  const auto d = static_cast<Eigen::Index>(x.front().size());
  Eigen::MatrixXd X(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(x[i].size()) != d) throw Error("LDA samples differ in dimensionality");
    for (Eigen::Index j = 0; j < d; ++j) X(static_cast<Eigen::Index>(i), j) = x[i][static_cast<std::size_t>(j)];
  }
  std::array<Eigen::VectorXd, 2> mu{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
  std::array<std::size_t, 2> count{};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw Error("LDA labels must be 0 or 1");
    mu[labels[i]] += X.row(static_cast<Eigen::Index>(i)).transpose();
    ++count[labels[i]];
  }
  if (count[0] < 2 || count[1] < 2) throw Error("LDA needs at least 2 samples per class");
  for (int c = 0; c < 2; ++c) mu[c] /= static_cast<double>(count[c]);
  const Eigen::VectorXd gap = mu[1] - mu[0];
  if (gap.cwiseAbs().maxCoeff() == 0.0) throw Error("degenerate projection: class means are identical");

  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd c = X.row(static_cast<Eigen::Index>(i)).transpose() - mu[labels[i]];
    sw += c * c.transpose();
  }
  LdaProjection out;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sw);
  if (lu.rank() < d) {
    const double trace = sw.trace();
    const double eps = trace > 0 ? 1e-8 * trace / static_cast<double>(d) : 1e-8;
    sw += eps * Eigen::MatrixXd::Identity(d, d);
    out.regularized = true;
  }
  Eigen::VectorXd w = sw.ldlt().solve(gap);
  w.normalize();
  if (w.dot(gap) < 0) w = -w;

  const Eigen::VectorXd pooled = X.colwise().mean().transpose();
  out.w.assign(w.data(), w.data() + d);
  for (std::size_t i = 0; i < n; ++i)
    out.projection.push_back(w.dot(X.row(static_cast<Eigen::Index>(i)).transpose() - pooled));
  return out;
}

// ---------------------------------------------------------------------------
// Trained model bundle and held-out verdicts

struct TrainedModel {
  Classifier classifier;
  std::vector<std::size_t> features;  // indices into the 33-feature record
  Standardization standardization;    // fitted on the training matrix

  std::vector<double> project(const MeasurementRecord& raw) const {
    const auto z = standardization.apply(raw);
    std::vector<double> out;
    for (auto f : features) out.push_back(z.features[f]);
    return out;
  }
};

/// Standardizes a raw record with the training parameters, keeps the
/// selected features and predicts.
inline Prediction classify_unknown(const Classifier& clf, const MeasurementRecord& record,
                                   const std::vector<std::size_t>& features, const Standardization& s) {
  if (features.size() != clf.dimension)
    throw Error("dimensionality mismatch: " + std::to_string(features.size()) + " selected features, model expects " +
                std::to_string(clf.dimension));
  const auto z = s.apply(record);
  std::vector<double> x;
  for (auto f : features) {
    if (f >= kFeatureCount) throw Error("feature index out of range");
    x.push_back(z.features[f]);
  }
  return clf.predict(x);
}

inline Prediction classify_unknown(const TrainedModel& m, const MeasurementRecord& record) {
  return classify_unknown(m.classifier, record, m.features, m.standardization);
}

inline nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["kernel"] = "linear";
  j["C"] = m.classifier.C;
  j["classes"] = m.classifier.classes;
  std::vector<std::string> names, means, stds;
  nlohmann::json jm = nlohmann::json::array(), js = nlohmann::json::array();
  for (auto f : m.features) {
    names.emplace_back(kFeatureNames[f]);
    jm.push_back(m.standardization.means[f]);
    js.push_back(m.standardization.stds[f]);
  }
  j["features"] = names;
  j["standardization"] = {{"means", jm}, {"stds", js}};
  auto& pairs = j["models"] = nlohmann::json::array();
  for (const auto& b : m.classifier.pairs)
    pairs.push_back({{"positive", m.classifier.classes[b.positive]},
                     {"negative", m.classifier.classes[b.negative]},
                     {"w", b.w},
                     {"bias", b.bias},
                     {"support_vectors", b.support_vectors},
                     {"coefficients", b.coefficients}});
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("kernel").get<std::string>() != "linear") throw Error("only linear models can be loaded");
    TrainedModel m;
    m.classifier.C = j.at("C").get<double>();
    m.classifier.classes = j.at("classes").get<std::vector<std::string>>();
    const auto names = j.at("features").get<std::vector<std::string>>();
    const auto means = j.at("standardization").at("means").get<std::vector<double>>();
    const auto stds = j.at("standardization").at("stds").get<std::vector<double>>();
    if (means.size() != names.size() || stds.size() != names.size())
      throw Error("standardization parameters do not match the feature list");
    for (std::size_t i = 0; i < names.size(); ++i) {
      const auto f = feature_index(names[i]);
      m.features.push_back(f);
      m.standardization.means[f] = means[i];
      m.standardization.stds[f] = stds[i];
    }
    m.classifier.dimension = names.size();
    auto class_index = [&](const std::string& c) {
      const auto it = std::find(m.classifier.classes.begin(), m.classifier.classes.end(), c);
      if (it == m.classifier.classes.end()) throw Error("model refers to unknown class '" + c + "'");
      return static_cast<std::size_t>(it - m.classifier.classes.begin());
    };
    for (const auto& p : j.at("models")) {
      BinaryModel b;
      b.positive = class_index(p.at("positive").get<std::string>());
      b.negative = class_index(p.at("negative").get<std::string>());
      b.C = m.classifier.C;
      b.w = p.at("w").get<std::vector<double>>();
      b.bias = p.at("bias").get<double>();
      b.support_vectors = p.at("support_vectors").get<std::vector<std::vector<double>>>();
      b.coefficients = p.at("coefficients").get<std::vector<double>>();
      if (b.w.size() != names.size()) throw Error("weight vector does not match the feature list");
      m.classifier.pairs.push_back(std::move(b));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed model file: ") + e.what());
  }
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json j;
  j["classes"] = r.classes;
  j["samples"] = r.samples;
  j["accuracy"] = r.accuracy;
  j["confusion"] = r.confusion;
  nlohmann::json per = nlohmann::json::object();
  for (std::size_t c = 0; c < r.classes.size(); ++c)
    per[r.classes[c]] = {{"tpr", r.tpr[c]}, {"fnr", r.fnr[c]}, {"fpr", r.fpr[c]}};
  j["per_class"] = per;
  auto& rows = j["predictions"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.samples; ++i)
    rows.push_back({{"doc_id", r.doc_ids[i]}, {"actual", r.actual[i]}, {"predicted", r.predicted[i]},
                    {"C", r.chosen_c[i]}});
  return j;
}

}  // namespace parnet
