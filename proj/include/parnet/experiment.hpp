#pragma once

// Shuffle ensembles, standardization, and the informativeness and
// variability analyses built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "parnet/corpus.hpp"
#include "parnet/error.hpp"
#include "parnet/netbuild.hpp"
#include "parnet/netmeasure.hpp"
#include "parnet/parallel.hpp"
#include "parnet/random.hpp"

namespace parnet {

// ---------------------------------------------------------------------------
// Ensembles

struct EnsembleOptions {
  double density = 0.05;
  std::size_t samples = 30;
  bool enable_ss = true;
  std::uint64_t base_seed = 0;
  std::size_t workers = 0;
};

struct Ensemble {
  std::string doc_id;
  MeasurementRecord rt;
  std::vector<MeasurementRecord> sw;
  std::optional<std::vector<MeasurementRecord>> ss;

  std::size_t record_count() const { return 1 + sw.size() + (ss ? ss->size() : 0); }
  const std::vector<MeasurementRecord>& variant(DocKind k) const {
    if (k == DocKind::SW) return sw;
    if (k == DocKind::SS && ss) return *ss;
    throw Error("ensemble '" + doc_id + "' has no " + std::string(to_string(k)) + " replicates");
  }
};

/// RT first, then SW replicates 0..S-1, then SS replicates; replicate i of
/// either kind is shuffled with seed base_seed + i.
inline std::vector<Document> ensemble_documents(const Document& rt, const EnsembleOptions& opt) {
  std::vector<Document> docs{rt};
  for (std::size_t i = 0; i < opt.samples; ++i) {
    docs.push_back(shuffle_words(rt, opt.base_seed + i));
    docs.back().sample_index = static_cast<int>(i);
  }
  if (opt.enable_ss)
    for (std::size_t i = 0; i < opt.samples; ++i) {
      docs.push_back(shuffle_sentences(rt, opt.base_seed + i));
      docs.back().sample_index = static_cast<int>(i);
    }
  return docs;
}

inline Network build_network(const Document& doc, double density) {
  return threshold_density(build_weighted(doc.paragraphs), density);
}

/// truncate -> (shuffle) -> build -> threshold -> measure for the real text
/// and every replicate.
inline Ensemble build_ensemble(const Document& doc, std::size_t nodes, const EnsembleOptions& opt) {
  const auto rt = truncate_paragraphs(doc, nodes);
  const auto docs = ensemble_documents(rt, opt);
  std::vector<MeasurementRecord> records(docs.size());
  parallel_for(docs.size(), opt.workers, [&](std::size_t i) {
    records[i] = measure_network(build_network(docs[i], opt.density), opt.base_seed, docs[i].id, docs[i].kind,
                                 docs[i].sample_index);
  });
  Ensemble e{doc.id, records[0], {}, std::nullopt};
  e.sw.assign(records.begin() + 1, records.begin() + 1 + static_cast<std::ptrdiff_t>(opt.samples));
  if (opt.enable_ss) e.ss.emplace(records.begin() + 1 + static_cast<std::ptrdiff_t>(opt.samples), records.end());
  return e;
}

/// Regroups flat records (e.g. read from CSV) by document, in first-seen
/// order. Replicates are ordered by sample index.
inline std::vector<Ensemble> group_ensembles(const std::vector<MeasurementRecord>& records) {
  std::vector<Ensemble> out;
  std::map<std::string, std::size_t> where;
  std::vector<bool> has_rt;
  for (const auto& r : records) {
    auto [it, fresh] = where.try_emplace(r.doc_id, out.size());
    if (fresh) {
      out.push_back(Ensemble{r.doc_id, {}, {}, std::nullopt});
      has_rt.push_back(false);
    }
    auto& e = out[it->second];
    switch (r.kind) {
      case DocKind::RT:
        if (has_rt[it->second]) throw Error("document '" + r.doc_id + "' has more than one RT record");
        e.rt = r;
        has_rt[it->second] = true;
        break;
      case DocKind::SW: e.sw.push_back(r); break;
      case DocKind::SS:
        if (!e.ss) e.ss.emplace();
        e.ss->push_back(r);
        break;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!has_rt[i]) throw Error("document '" + out[i].doc_id + "' has no RT record");
    auto by_sample = [](const MeasurementRecord& a, const MeasurementRecord& b) {
      return a.sample_index.value_or(-1) < b.sample_index.value_or(-1);
    };
    std::stable_sort(out[i].sw.begin(), out[i].sw.end(), by_sample);
    if (out[i].ss) std::stable_sort(out[i].ss->begin(), out[i].ss->end(), by_sample);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature matrices

struct Standardization {
  std::array<double, kFeatureCount> means{};
  std::array<double, kFeatureCount> stds{};  // 0 marks a constant column mapped to 0

  MeasurementRecord apply(MeasurementRecord r) const {
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      r.features[f] = stds[f] == 0.0 ? 0.0 : (r.features[f] - means[f]) / stds[f];
    return r;
  }
  std::vector<std::string> constant_features() const {
    std::vector<std::string> out;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      if (stds[f] == 0.0) out.emplace_back(kFeatureNames[f]);
    return out;
  }
};

struct FeatureMatrix {
  std::vector<MeasurementRecord> rows;
  bool standardized = false;
  std::optional<Standardization> parameters;  // set by standardize()

  std::vector<double> column(std::size_t f) const {
    std::vector<double> c;
    c.reserve(rows.size());
    for (const auto& r : rows) c.push_back(r.features[f]);
    return c;
  }
};

/// One row per document and kind: RT plus the lowest-indexed SW and SS
/// replicate. This is the balanced design used for standardization,
/// criterion A, feature selection and classification.
inline FeatureMatrix dataset_matrix(const std::vector<Ensemble>& ensembles) {
  FeatureMatrix m;
  for (const auto& e : ensembles) {
    m.rows.push_back(e.rt);
    if (!e.sw.empty()) m.rows.push_back(e.sw.front());
    if (e.ss && !e.ss->empty()) m.rows.push_back(e.ss->front());
  }
  return m;
}

/// What to do with a column whose values are all equal. With a fixed node
/// count and edge count the mean degree is such a column by construction.
enum class ConstantColumns { Error, MapToZero };

inline Standardization fit_standardization(const FeatureMatrix& m, ConstantColumns policy = ConstantColumns::Error) {
  if (m.rows.size() < 2) throw Error("standardization needs at least 2 rows");
  Standardization s;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto ms = mean_std(m.column(f));
    s.means[f] = ms.mean;
    // relative cutoff: a column that is constant up to rounding noise is constant
    if (ms.std > 1e-12 * std::max(1.0, std::abs(ms.mean))) {
      s.stds[f] = ms.std;
    } else if (policy == ConstantColumns::Error) {
      throw Error("zero-variance feature '" + std::string(kFeatureNames[f]) + "' cannot be standardized");
    }
  }
  return s;
}

/// Per-column z-score over all rows jointly (population std).
inline FeatureMatrix standardize(const FeatureMatrix& m, ConstantColumns policy = ConstantColumns::Error) {
  const auto s = fit_standardization(m, policy);
  FeatureMatrix out;
  out.standardized = true;
  out.parameters = s;
  out.rows.reserve(m.rows.size());
  for (const auto& r : m.rows) out.rows.push_back(s.apply(r));
  return out;
}

// ---------------------------------------------------------------------------
// Criterion A: dataset-level mean gaps between kinds

struct CriterionARow {
  std::array<MeanStd, 3> by_kind;  // indexed by DocKind
  double gap_sw = 0;               // mean RT - mean SW
  double gap_ss = 0;               // mean RT - mean SS
};

struct CriterionAReport {
  std::array<CriterionARow, kFeatureCount> features;
  std::array<std::size_t, 3> counts{};
};

inline CriterionAReport criterion_a(const FeatureMatrix& m) {
  if (!m.standardized) throw Error("criterion A expects a standardized matrix");
  CriterionAReport rep;
  for (const auto& r : m.rows) ++rep.counts[static_cast<int>(r.kind)];
  for (auto k : {DocKind::RT, DocKind::SW, DocKind::SS})
    if (rep.counts[static_cast<int>(k)] == 0)
      throw Error("criterion A needs RT, SW and SS rows; " + std::string(to_string(k)) + " is missing");
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::array<std::vector<double>, 3> vals;
    for (const auto& r : m.rows) vals[static_cast<int>(r.kind)].push_back(r.features[f]);
    auto& row = rep.features[f];
    for (int k = 0; k < 3; ++k) row.by_kind[k] = mean_std(vals[k]);
    row.gap_sw = row.by_kind[0].mean - row.by_kind[1].mean;
    row.gap_ss = row.by_kind[0].mean - row.by_kind[2].mean;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Criterion B: per-document z-scores against the document's own shuffles

struct ZScore {
  double z = 0;
  bool informative = false;
};

/// (x - mean) / std over the shuffled values. With zero spread the score is
/// +-inf when x differs from the mean and 0 otherwise.
inline ZScore z_score(double x, const std::vector<double>& shuffled, double threshold = 2.0) {
  const auto ms = mean_std(shuffled);
  if (ms.std == 0.0) {
    if (x == ms.mean) return {0.0, false};
    return {x > ms.mean ? INFINITY : -INFINITY, true};
  }
  const double z = (x - ms.mean) / ms.std;
  return {z, std::abs(z) >= threshold};
}

inline std::array<ZScore, kFeatureCount> criterion_b(const Ensemble& e, DocKind variant, double threshold = 2.0) {
  const auto& reps = e.variant(variant);
  if (reps.size() < 2)
    throw Error("criterion B needs at least 2 " + std::string(to_string(variant)) + " replicates for '" + e.doc_id +
                "'");
  std::array<ZScore, kFeatureCount> out;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    std::vector<double> vals;
    vals.reserve(reps.size());
    for (const auto& r : reps) vals.push_back(r.features[f]);
    out[f] = z_score(e.rt.features[f], vals, threshold);
  }
  return out;
}

struct InformativenessReport {
  double threshold = 2.0;
  std::vector<std::string> doc_ids;
  struct Variant {
    DocKind kind;
    std::vector<std::array<ZScore, kFeatureCount>> per_doc;  // aligned with doc_ids
    std::array<double, kFeatureCount> percent_informative{};
  };
  std::vector<Variant> variants;  // SW, then SS when every ensemble has it
};

inline InformativenessReport informativeness(const std::vector<Ensemble>& ensembles, double threshold = 2.0) {
  if (ensembles.empty()) throw Error("criterion B needs at least one ensemble");
  InformativenessReport rep;
  rep.threshold = threshold;
  for (const auto& e : ensembles) rep.doc_ids.push_back(e.doc_id);
  const bool all_ss = std::all_of(ensembles.begin(), ensembles.end(), [](const Ensemble& e) { return e.ss.has_value(); });
  for (auto kind : {DocKind::SW, DocKind::SS}) {
    if (kind == DocKind::SS && !all_ss) continue;
    InformativenessReport::Variant v{kind, {}, {}};
    for (const auto& e : ensembles) v.per_doc.push_back(criterion_b(e, kind, threshold));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      std::size_t hits = 0;
      for (const auto& d : v.per_doc) hits += d[f].informative;
      v.percent_informative[f] = 100.0 * static_cast<double>(hits) / static_cast<double>(v.per_doc.size());
    }
    rep.variants.push_back(std::move(v));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coefficient of variation: syntax vs semantics sensitivity

struct Interval {
  double lo = 0;
  double hi = 0;
};

struct CVFeature {
  std::optional<double> cv_syntax;     // empty when the mean is 0
  std::optional<double> cv_semantics;
  Interval ci_syntax;
  Interval ci_semantics;
  std::string classification;          // syntax | semantics | both | undefined
};

struct CVReport {
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  std::array<CVFeature, kFeatureCount> features;
};

inline std::optional<double> coefficient_of_variation(const std::vector<double>& v) {
  const auto ms = mean_std(v);
  if (ms.mean == 0.0) return std::nullopt;
  return ms.std / ms.mean;
}

namespace detail {
// Linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Percentile 95% CI of the CV per feature over bootstrap resamples of rows.
inline std::array<std::optional<Interval>, kFeatureCount> bootstrap_cv(const FeatureMatrix& m, std::size_t boot,
                                                                        Rng& rng) {
  const std::size_t n = m.rows.size();
  std::array<std::vector<double>, kFeatureCount> draws;
  std::vector<double> col(n);
  for (std::size_t b = 0; b < boot; ++b) {
    std::vector<std::size_t> pick(n);
    for (auto& p : pick) p = static_cast<std::size_t>(uniform_below(rng, n));
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      for (std::size_t i = 0; i < n; ++i) col[i] = m.rows[pick[i]].features[f];
      if (auto cv = coefficient_of_variation(col)) draws[f].push_back(*cv);
    }
  }
  std::array<std::optional<Interval>, kFeatureCount> out;
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    if (!draws[f].empty()) out[f] = Interval{quantile(draws[f], 0.025), quantile(draws[f], 0.975)};
  return out;
}
}  // namespace detail

/// CV per feature on a same-text/many-languages matrix (syntax) and a
/// same-language/many-texts matrix (semantics), with bootstrap intervals.
/// A feature is "semantics" when its semantics interval lies strictly above
/// the syntax interval, "syntax" when strictly below, else "both".
inline CVReport cv_analysis(const FeatureMatrix& syntax, const FeatureMatrix& semantics, std::size_t boot = 1000,
                            std::uint64_t seed = 0) {
  if (syntax.rows.size() < 3 || semantics.rows.size() < 3)
    throw Error("CV analysis needs at least 3 documents per matrix");
  if (boot == 0) throw Error("CV analysis needs at least one bootstrap resample");
  CVReport rep;
  rep.resamples = boot;
  rep.seed = seed;
  Rng rng(seed);
  const auto ci_syn = detail::bootstrap_cv(syntax, boot, rng);
  const auto ci_sem = detail::bootstrap_cv(semantics, boot, rng);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    auto& out = rep.features[f];
    out.cv_syntax = coefficient_of_variation(syntax.column(f));
    out.cv_semantics = coefficient_of_variation(semantics.column(f));
    if (!out.cv_syntax || !out.cv_semantics || !ci_syn[f] || !ci_sem[f]) {
      out.classification = "undefined";
      continue;
    }
    // widen to cover the point estimate, which a percentile interval can miss
    out.ci_syntax = {std::min(ci_syn[f]->lo, *out.cv_syntax), std::max(ci_syn[f]->hi, *out.cv_syntax)};
    out.ci_semantics = {std::min(ci_sem[f]->lo, *out.cv_semantics), std::max(ci_sem[f]->hi, *out.cv_semantics)};
    if (out.ci_semantics.lo > out.ci_syntax.hi)
      out.classification = "semantics";
    else if (out.ci_semantics.hi < out.ci_syntax.lo)
      out.classification = "syntax";
    else
      out.classification = "both";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON reports

namespace detail {
inline nlohmann::json z_json(double z) {
  if (std::isinf(z)) return z > 0 ? "+inf" : "-inf";
  return z;
}
}  // namespace detail

inline nlohmann::json to_json(const CriterionAReport& rep) {
  nlohmann::json j;
  j["counts"] = {{"RT", rep.counts[0]}, {"SW", rep.counts[1]}, {"SS", rep.counts[2]}};
  auto& feats = j["features"] = nlohmann::json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& r = rep.features[f];
    nlohmann::json row;
    row["feature"] = kFeatureNames[f];
    for (int k = 0; k < 3; ++k)
      row[std::string(to_string(static_cast<DocKind>(k)))] = {{"mean", r.by_kind[k].mean}, {"std", r.by_kind[k].std}};
    row["gap_RT_SW"] = r.gap_sw;
    row["gap_RT_SS"] = r.gap_ss;
    feats.push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json to_json(const InformativenessReport& rep) {
  nlohmann::json j;
  j["z_threshold"] = rep.threshold;
  j["documents"] = rep.doc_ids;
  auto& feats = j["features"] = nlohmann::json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    nlohmann::json row;
    row["feature"] = kFeatureNames[f];
    for (const auto& v : rep.variants) {
      nlohmann::json z = nlohmann::json::array(), flags = nlohmann::json::array();
      for (const auto& d : v.per_doc) {
        z.push_back(detail::z_json(d[f].z));
        flags.push_back(d[f].informative);
      }
      row[std::string(to_string(v.kind))] = {
          {"percent_informative", v.percent_informative[f]}, {"z", std::move(z)}, {"informative", std::move(flags)}};
    }
    feats.push_back(std::move(row));
  }
  return j;
}

inline nlohmann::json to_json(const CVReport& rep) {
  nlohmann::json j;
  j["bootstrap_resamples"] = rep.resamples;
  j["seed"] = rep.seed;
  auto& feats = j["features"] = nlohmann::json::array();
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const auto& r = rep.features[f];
    nlohmann::json row;
    row["feature"] = kFeatureNames[f];
    row["cv_syntax"] = r.cv_syntax ? nlohmann::json(*r.cv_syntax) : nlohmann::json(nullptr);
    row["cv_semantics"] = r.cv_semantics ? nlohmann::json(*r.cv_semantics) : nlohmann::json(nullptr);
    if (r.classification != "undefined") {
      row["ci_syntax"] = {r.ci_syntax.lo, r.ci_syntax.hi};
      row["ci_semantics"] = {r.ci_semantics.lo, r.ci_semantics.hi};
    }
    row["class"] = r.classification;
    feats.push_back(std::move(row));
  }
  return j;
}

}  // namespace parnet
