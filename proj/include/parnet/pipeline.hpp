#pragma once

// End-to-end orchestration: manifest -> networks on disk -> measurements CSV
// -> experiment reports -> classifier evaluation and verdicts.

#include <algorithm>
#include <filesystem>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "parnet/classify.hpp"
#include "parnet/corpus.hpp"
#include "parnet/corpus_io.hpp"
#include "parnet/experiment.hpp"
#include "parnet/graph_io.hpp"
#include "parnet/netbuild.hpp"
#include "parnet/netmeasure.hpp"
#include "parnet/parallel.hpp"

namespace parnet {

namespace fs = std::filesystem;

/// Invalid configuration; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::optional<std::size_t> nodes_per_network;
  double density = 0.05;
  std::size_t samples = 30;
  std::uint64_t base_seed = 0;
  double z_threshold = 2.0;
  SvmC svm_c{};
  bool enable_ss = true;
  fs::path output_dir = "parnet-out";
  std::size_t workers = 0;
  std::size_t bootstrap_resamples = 1000;

  void validate(bool need_nodes = false) const {
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
    if (samples < 1) throw ConfigError("samples must be at least 1");
    if (nodes_per_network && *nodes_per_network < 10) throw ConfigError("nodes_per_network must be at least 10");
    if (need_nodes && !nodes_per_network) throw ConfigError("nodes_per_network is required");
    if (!svm_c.grid && !(svm_c.value > 0)) throw ConfigError("svm_C must be positive or \"grid\"");
    if (!(z_threshold > 0)) throw ConfigError("z_threshold must be positive");
    if (bootstrap_resamples < 1) throw ConfigError("bootstrap_resamples must be at least 1");
  }

  EnsembleOptions ensemble_options() const { return {density, samples, enable_ss, base_seed, workers}; }
};

inline SvmC parse_svm_c(const std::string& s) {
  if (s == "grid") return {1.0, true};
  try {
    return {parse_double(s), false};
  } catch (const Error&) {
    throw ConfigError("svm_C must be a number or \"grid\", got '" + s + "'");
  }
}

/// Unknown keys are rejected so typos do not silently fall back to defaults.
inline RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "nodes_per_network") c.nodes_per_network = v.get<std::size_t>();
      else if (key == "density") c.density = v.get<double>();
      else if (key == "samples") c.samples = v.get<std::size_t>();
      else if (key == "base_seed") c.base_seed = v.get<std::uint64_t>();
      else if (key == "z_threshold") c.z_threshold = v.get<double>();
      else if (key == "svm_C") c.svm_c = v.is_string() ? parse_svm_c(v.get<std::string>()) : SvmC{v.get<double>(), false};
      else if (key == "enable_ss") c.enable_ss = v.get<bool>();
      else if (key == "output_dir") c.output_dir = v.get<std::string>();
      else if (key == "workers") c.workers = v.get<std::size_t>();
      else if (key == "bootstrap_resamples") c.bootstrap_resamples = v.get<std::size_t>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["nodes_per_network"] = c.nodes_per_network ? nlohmann::json(*c.nodes_per_network) : nlohmann::json(nullptr);
  j["density"] = c.density;
  j["samples"] = c.samples;
  j["base_seed"] = c.base_seed;
  j["z_threshold"] = c.z_threshold;
  j["svm_C"] = c.svm_c.grid ? nlohmann::json("grid") : nlohmann::json(c.svm_c.value);
  j["enable_ss"] = c.enable_ss;
  j["bootstrap_resamples"] = c.bootstrap_resamples;
  return j;
}

inline void write_json(const fs::path& path, const nlohmann::json& j) { detail::write_file(path, j.dump(2) + "\n"); }

// ---------------------------------------------------------------------------
// build

struct DocumentFailure {
  std::string doc_id;
  std::string path;
  std::string message;
};

struct BuildSummary {
  std::size_t networks = 0;
  std::vector<DocumentFailure> failures;
};

inline std::string network_stem(const std::string& doc_id, DocKind kind, std::optional<int> sample) {
  return doc_id + "." + std::string(to_string(kind)) + "." + std::to_string(sample.value_or(0));
}

inline fs::path networks_dir(const RunConfig& c) { return c.output_dir / "networks"; }

/// One GraphML and one edge list per network. Failing documents are
/// recorded in errors.json and skipped.
inline BuildSummary run_build(const std::vector<ManifestEntry>& manifest, const RunConfig& cfg) {
  cfg.validate(true);
  const auto dir = networks_dir(cfg);
  fs::create_directories(dir);
  BuildSummary summary;
  for (const auto& entry : manifest) {
    try {
      const auto doc = truncate_paragraphs(parse_document(load_raw_document(entry)), *cfg.nodes_per_network);
      const auto docs = ensemble_documents(doc, cfg.ensemble_options());
      std::vector<NetworkFile> files(docs.size());
      parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
        std::vector<std::size_t> paragraphs;
        for (const auto& p : docs[i].paragraphs) paragraphs.push_back(p.index);
        files[i] = NetworkFile{build_network(docs[i], cfg.density), docs[i].id, docs[i].kind, docs[i].sample_index,
                               std::move(paragraphs)};
      });
      for (const auto& f : files) {
        const auto stem = network_stem(f.doc_id, *f.kind, f.sample);
        write_graphml(dir / (stem + ".graphml"), f);
        write_edge_list(dir / (stem + ".edges"), f.network);
      }
      summary.networks += files.size();
    } catch (const Error& e) {
      summary.failures.push_back({entry.id, entry.path.string(), e.what()});
    }
  }
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& f : summary.failures) errs.push_back({{"doc_id", f.doc_id}, {"path", f.path}, {"error", f.message}});
  write_json(cfg.output_dir / "errors.json", errs);
  return summary;
}

// ---------------------------------------------------------------------------
// measure

/// Measures every *.graphml under `dir`. Rows are ordered by document id,
/// then RT, SW, SS, then sample index.
inline std::vector<MeasurementRecord> run_measure(const fs::path& dir, std::uint64_t seed, std::size_t workers = 0) {
  if (!fs::is_directory(dir)) throw Error("network directory '" + dir.string() + "' does not exist");
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".graphml") paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  std::vector<MeasurementRecord> rows(paths.size());
  parallel_for(paths.size(), workers, [&](std::size_t i) {
    const auto f = read_graphml(paths[i]);
    if (!f.kind) throw Error("network file '" + paths[i].string() + "' lacks a kind attribute");
    try {
      rows[i] = measure_network(f.network, seed, f.doc_id, *f.kind, f.kind == DocKind::RT ? std::nullopt : f.sample);
    } catch (const Error& e) {
      throw Error("cannot measure '" + paths[i].string() + "': " + e.what());
    }
  });
  std::stable_sort(rows.begin(), rows.end(), [](const MeasurementRecord& a, const MeasurementRecord& b) {
    return std::tuple(a.doc_id, static_cast<int>(a.kind), a.sample_index.value_or(-1)) <
           std::tuple(b.doc_id, static_cast<int>(b.kind), b.sample_index.value_or(-1));
  });
  return rows;
}

inline void write_measurements(const fs::path& path, const std::vector<MeasurementRecord>& rows) {
  detail::write_file(path, to_csv(rows));
}

inline std::vector<MeasurementRecord> read_measurements(const fs::path& path) {
  return parse_csv(read_text_file(path), path.string());
}

// ---------------------------------------------------------------------------
// experiment

struct ExperimentOutcome {
  std::optional<CriterionAReport> criterion_a;
  std::vector<std::string> constant_features;
  InformativenessReport criterion_b;
  std::optional<CVReport> cv;
};

/// RT rows of a measurements file, as the document-level matrix for CV.
inline FeatureMatrix rt_matrix(const std::vector<MeasurementRecord>& rows) {
  FeatureMatrix m;
  for (const auto& r : rows)
    if (r.kind == DocKind::RT) m.rows.push_back(r);
  return m;
}

inline ExperimentOutcome run_experiment(const std::vector<MeasurementRecord>& records, const RunConfig& cfg,
                                        const std::vector<MeasurementRecord>* cv_syntax = nullptr,
                                        const std::vector<MeasurementRecord>* cv_semantics = nullptr) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  ExperimentOutcome out;
  const auto ensembles = group_ensembles(records);
  const auto z = standardize(dataset_matrix(ensembles), ConstantColumns::MapToZero);
  out.constant_features = z.parameters->constant_features();

  const bool has_ss = std::all_of(ensembles.begin(), ensembles.end(), [](const Ensemble& e) { return e.ss.has_value(); });
  if (has_ss) {
    out.criterion_a = criterion_a(z);
    auto j = to_json(*out.criterion_a);
    j["constant_features"] = out.constant_features;
    write_json(cfg.output_dir / "criterion_a.json", j);
  } else {
    diag::warn("criterion A skipped: measurements contain no SS replicates");
  }

  out.criterion_b = informativeness(ensembles, cfg.z_threshold);
  write_json(cfg.output_dir / "criterion_b.json", to_json(out.criterion_b));

  if (cv_syntax && cv_semantics) {
    out.cv = cv_analysis(rt_matrix(*cv_syntax), rt_matrix(*cv_semantics), cfg.bootstrap_resamples, cfg.base_seed);
    write_json(cfg.output_dir / "cv.json", to_json(*out.cv));
  }
  return out;
}

// ---------------------------------------------------------------------------
// classify

inline constexpr const char* kReal = "REAL";
inline constexpr const char* kShuffled = "SHUFFLED";

struct Verdict {
  std::string doc_id;
  DocKind kind = DocKind::RT;
  std::optional<int> sample;
  std::string label;
  double decision = 0;  // toward REAL
};

struct ClassifyOutcome {
  FeatureSelection selection;
  std::size_t training_documents = 0;
  EvalReport binary;
  EvalReport q_only;
  std::optional<EvalReport> three_class;
  TrainedModel model;
  std::vector<Verdict> verdicts;  // unknown document: RT first, then replicates
};

namespace detail {
inline std::vector<LabeledSample> labeled(const FeatureMatrix& z, const std::vector<std::size_t>& features,
                                          bool binary) {
  std::vector<LabeledSample> out;
  for (const auto& r : z.rows) {
    LabeledSample s;
    for (auto f : features) s.features.push_back(r.features[f]);
    s.label = binary ? (r.kind == DocKind::RT ? kReal : kShuffled) : std::string(to_string(r.kind));
    s.doc_id = r.doc_id;
    out.push_back(std::move(s));
  }
  return out;
}
}  // namespace detail

/// Trains on the balanced matrix of every document except `unknown`, runs
/// the leave-one-out evaluations, and gives the unknown document's RT and
/// replicate networks a verdict.
inline ClassifyOutcome run_classify(const std::vector<MeasurementRecord>& records, const RunConfig& cfg,
                                    const std::optional<std::string>& unknown = {}) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  std::vector<MeasurementRecord> train_rows, unknown_rows;
  for (const auto& r : records) (unknown && r.doc_id == *unknown ? unknown_rows : train_rows).push_back(r);
  if (unknown && unknown_rows.empty()) throw Error("unknown document '" + *unknown + "' not found in measurements");

  ClassifyOutcome out;
  const auto ensembles = group_ensembles(train_rows);
  out.training_documents = ensembles.size();
  const auto raw = dataset_matrix(ensembles);
  const auto z = standardize(raw, ConstantColumns::MapToZero);
  const bool has_ss = std::all_of(ensembles.begin(), ensembles.end(), [](const Ensemble& e) { return e.ss.has_value(); });
  if (!has_ss) throw Error("classification needs SS replicates for feature selection");

  out.selection = select_features(z);
  const auto binary = detail::labeled(z, out.selection.indices, true);
  out.binary = loo_cv(binary, cfg.svm_c, cfg.workers);
  out.q_only = loo_cv(detail::labeled(z, {kQ}, true), cfg.svm_c, cfg.workers);
  out.three_class = loo_cv(detail::labeled(z, out.selection.indices, false), cfg.svm_c, cfg.workers);

  const double final_c = cfg.svm_c.grid ? select_c(binary) : cfg.svm_c.value;
  out.model = TrainedModel{train(binary, final_c), out.selection.indices, *z.parameters};

  auto with_meta = [&](const EvalReport& r, const std::vector<std::size_t>& feats) {
    auto j = to_json(r);
    std::vector<std::string> names;
    for (auto f : feats) names.emplace_back(kFeatureNames[f]);
    j["features"] = names;
    j["training_documents"] = out.training_documents;
    if (unknown) j["excluded_document"] = *unknown;
    return j;
  };
  nlohmann::json eval;
  eval["selection"] = {{"features", out.selection.names()}, {"fallback", out.selection.fallback}};
  eval["binary"] = with_meta(out.binary, out.selection.indices);
  eval["q_only"] = with_meta(out.q_only, {kQ});
  eval["three_class"] = with_meta(*out.three_class, out.selection.indices);
  write_json(cfg.output_dir / "eval.json", eval);
  write_json(cfg.output_dir / "model.json", to_json(out.model));

  if (unknown) {
    std::stable_sort(unknown_rows.begin(), unknown_rows.end(), [](const auto& a, const auto& b) {
      return std::tuple(static_cast<int>(a.kind), a.sample_index.value_or(-1)) <
             std::tuple(static_cast<int>(b.kind), b.sample_index.value_or(-1));
    });
    const auto real = static_cast<std::size_t>(
        std::find(out.model.classifier.classes.begin(), out.model.classifier.classes.end(), kReal) -
        out.model.classifier.classes.begin());
    nlohmann::json v;
    v["doc_id"] = *unknown;
    v["training_documents"] = out.training_documents;
    auto& list = v["networks"] = nlohmann::json::array();
    std::size_t sw_total = 0, sw_shuffled = 0;
    for (const auto& r : unknown_rows) {
      const auto p = classify_unknown(out.model, r);
      out.verdicts.push_back({r.doc_id, r.kind, r.sample_index, p.label, p.margins[real]});
      nlohmann::json e{{"kind", to_string(r.kind)}, {"label", p.label}, {"margin", p.margins[p.class_index]},
                       {"decision_toward_REAL", p.margins[real]}};
      e["sample_index"] = r.sample_index ? nlohmann::json(*r.sample_index) : nlohmann::json(nullptr);
      list.push_back(std::move(e));
      if (r.kind == DocKind::SW) {
        ++sw_total;
        sw_shuffled += p.label == kShuffled;
      }
    }
    v["sw_classified_shuffled"] = {{"count", sw_shuffled}, {"of", sw_total}};
    write_json(cfg.output_dir / "verdict.json", v);
  }
  return out;
}

}  // namespace parnet
