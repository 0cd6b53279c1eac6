// Command-line front end: build, measure, experiment, classify, run.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "parnet/pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::size_t> nodes;
  std::optional<double> density;
  std::optional<std::size_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<double> z_threshold;
  std::optional<std::string> svm_c;
  bool no_ss = false;
  std::optional<std::string> out;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "JSON config file; flags override it");
  app->add_option("--nodes", f.nodes, "paragraphs (nodes) per network");
  app->add_option("--density", f.density, "edge density E in (0, 1]");
  app->add_option("--samples", f.samples, "shuffled replicates per variant");
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--z-threshold", f.z_threshold, "|z| cutoff for informativeness");
  app->add_option("--svm-c", f.svm_c, "SVM C, a number or 'grid'");
  app->add_flag("--no-ss", f.no_ss, "skip sentence-shuffled replicates");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--workers", f.workers, "worker threads (0 = all cores)");
}

parnet::RunConfig resolve(const Flags& f) {
  parnet::RunConfig c = f.config.empty() ? parnet::RunConfig{} : parnet::load_config(f.config);
  if (f.nodes) c.nodes_per_network = *f.nodes;
  if (f.density) c.density = *f.density;
  if (f.samples) c.samples = *f.samples;
  if (f.seed) c.base_seed = *f.seed;
  if (f.z_threshold) c.z_threshold = *f.z_threshold;
  if (f.svm_c) c.svm_c = parnet::parse_svm_c(*f.svm_c);
  if (f.no_ss) c.enable_ss = false;
  if (f.out) c.output_dir = *f.out;
  if (f.workers) c.workers = *f.workers;
  return c;
}

int report_build(const parnet::BuildSummary& s) {
  std::cout << "networks written: " << s.networks << "\n";
  for (const auto& f : s.failures) std::cerr << "parnet: " << f.doc_id << ": " << f.message << "\n";
  return s.failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Paragraph-network analysis of texts against shuffled null models"};
  app.require_subcommand(1);
  Flags flags;
  std::string manifest, networks, measurements, cv_syntax, cv_semantics;
  std::optional<std::string> unknown;

  auto* build = app.add_subcommand("build", "Write RT/SW/SS networks for every manifest document");
  build->add_option("--manifest", manifest, "manifest JSON")->required();
  add_common(build, flags);

  auto* measure = app.add_subcommand("measure", "Measure every network into measurements.csv");
  measure->add_option("--networks", networks, "network directory (default <out>/networks)");
  add_common(measure, flags);

  auto* experiment = app.add_subcommand("experiment", "Criterion A/B and CV reports");
  experiment->add_option("--measurements", measurements, "measurements CSV (default <out>/measurements.csv)");
  experiment->add_option("--cv-syntax", cv_syntax, "measurements of one text in many languages");
  experiment->add_option("--cv-semantics", cv_semantics, "measurements of many texts in one language");
  add_common(experiment, flags);

  auto* classify = app.add_subcommand("classify", "LOO evaluation, model and optional verdict");
  classify->add_option("--measurements", measurements, "measurements CSV (default <out>/measurements.csv)");
  classify->add_option("--unknown", unknown, "document id held out and classified");
  add_common(classify, flags);

  auto* run = app.add_subcommand("run", "build, measure, experiment and classify in one go");
  run->add_option("--manifest", manifest, "manifest JSON")->required();
  run->add_option("--unknown", unknown, "document id held out and classified");
  add_common(run, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto cfg = resolve(flags);
    cfg.validate(build->parsed() || run->parsed());
    std::filesystem::create_directories(cfg.output_dir);
    parnet::write_json(cfg.output_dir / "config.json", parnet::to_json(cfg));
    const auto csv = measurements.empty() ? cfg.output_dir / "measurements.csv" : std::filesystem::path(measurements);

    if (build->parsed()) return report_build(parnet::run_build(parnet::load_manifest(manifest), cfg));

    if (measure->parsed()) {
      const auto dir = networks.empty() ? parnet::networks_dir(cfg) : std::filesystem::path(networks);
      const auto rows = parnet::run_measure(dir, cfg.base_seed, cfg.workers);
      parnet::write_measurements(cfg.output_dir / "measurements.csv", rows);
      std::cout << "rows measured: " << rows.size() << "\n";
      return 0;
    }

    if (experiment->parsed()) {
      if (cv_syntax.empty() != cv_semantics.empty())
        throw parnet::ConfigError("--cv-syntax and --cv-semantics must be given together");
      const auto rows = parnet::read_measurements(csv);
      std::optional<std::vector<parnet::MeasurementRecord>> syn, sem;
      if (!cv_syntax.empty()) {
        syn = parnet::read_measurements(cv_syntax);
        sem = parnet::read_measurements(cv_semantics);
      }
      parnet::run_experiment(rows, cfg, syn ? &*syn : nullptr, sem ? &*sem : nullptr);
      std::cout << "reports written to " << cfg.output_dir.string() << "\n";
      return 0;
    }

    if (classify->parsed()) {
      const auto out = parnet::run_classify(parnet::read_measurements(csv), cfg, unknown);
      std::cout << "binary LOO accuracy: " << out.binary.accuracy << "\n";
      return 0;
    }

    // run
    const auto summary = parnet::run_build(parnet::load_manifest(manifest), cfg);
    const int build_status = report_build(summary);
    const auto rows = parnet::run_measure(parnet::networks_dir(cfg), cfg.base_seed, cfg.workers);
    parnet::write_measurements(cfg.output_dir / "measurements.csv", rows);
    parnet::run_experiment(rows, cfg);
    const auto out = parnet::run_classify(rows, cfg, unknown);
    std::cout << "binary LOO accuracy: " << out.binary.accuracy << "\n";
    return build_status;
  } catch (const parnet::ConfigError& e) {
    std::cerr << "parnet: config error: " << e.what() << "\n";
    return 2;
  } catch (const parnet::Error& e) {
    std::cerr << "parnet: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "parnet: error: " << e.what() << "\n";
    return 1;
  }
}
