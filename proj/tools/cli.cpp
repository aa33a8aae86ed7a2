#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "noisecal/noisecal.hpp"
#include "noisecal/parallel.hpp"

namespace noisecal::cli {
namespace {

namespace fs = std::filesystem;

// Raised for flag combinations CLI11 cannot express; maps to kUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 42;
  std::size_t ssim_window = 11;
  double ssim_sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  std::size_t jobs = 1;

  SsimParams ssim_params() const {
    SsimParams params;
    params.window_side = ssim_window;
    params.window_sigma = ssim_sigma;
    params.k1 = k1;
    params.k2 = k2;
    return params;
  }
};

struct CorpusOptions {
  std::string path;
  std::size_t limit = 200;
  bool sample = false;
};

void diagnostic(std::ostream& err, std::string_view level, std::string_view code,
                std::string_view message) {
  err << level << ':' << code << ':' << message << '\n';
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string::npos ? text.size() : comma;
    std::string item = text.substr(start, end - start);
    const auto first = item.find_first_not_of(" \t");
    const auto last = item.find_last_not_of(" \t");
    item = first == std::string::npos ? "" : item.substr(first, last - first + 1);
    if (item.empty()) throw UsageError("empty item in list '" + text + "'");
    items.push_back(std::move(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

double parse_number(const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw UsageError("not a number: '" + text + "'");
  }
  if (used != text.size() || !std::isfinite(value)) {
    throw UsageError("not a finite number: '" + text + "'");
  }
  return value;
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> values;
  for (const auto& item : split_list(text)) values.push_back(parse_number(item));
  return values;
}

NoiseKind parse_kind(const std::string& text) {
  const auto kind = parse_noise_kind(text);
  if (!kind) {
    throw UsageError("unknown noise kind '" + text +
                     "' (expected gaussian, speckle, salt_pepper, poisson or occlusion)");
  }
  return *kind;
}

NoiseSpec parse_spec(NoiseKind kind, double magnitude) {
  const NoiseSpec spec{kind, magnitude};
  try {
    validate(spec);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return spec;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

void add_corpus_options(CLI::App* cmd, CorpusOptions& corpus) {
  cmd->add_option("corpus", corpus.path, "Directory of PNG/JPEG images")->required();
  cmd->add_option("--limit", corpus.limit,
                  "Number of images to use, 0 for all (default: first 200 by path)");
  cmd->add_flag("--sample", corpus.sample,
                "Seeded uniform sample of --limit images instead of the first ones");
}

Corpus load(const CorpusOptions& options, const GlobalOptions& global, std::ostream& err,
            bool& partial) {
  auto corpus = load_corpus(options.path, options.limit,
                            options.sample ? CorpusSampling::kUniform : CorpusSampling::kFirst,
                            Seed{global.seed});
  for (const auto& skipped : corpus.skipped) {
    diagnostic(err, "warning", "skipped", skipped);
    partial = true;
  }
  if (corpus.images.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no readable images in " + options.path);
  }
  return corpus;
}

std::string corpus_id(const CorpusOptions& options, std::size_t size) {
  return fs::absolute(options.path).lexically_normal().generic_string() +
         (options.sample ? "#sample" : "#first") + std::to_string(size);
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string reference;
  std::string test;
  std::string out;
};

int cmd_metrics(const MetricsArgs& args, const GlobalOptions& global, std::ostream& out) {
  const auto params = global.ssim_params();
  validate(params);
  if (!fs::is_directory(args.reference) && !fs::is_directory(args.test)) {
    const auto report =
        quality_report(load_image(args.reference), load_image(args.test), params);
    emit(args.out, quality_report_json(report), out);
    return kSuccess;
  }
  if (!fs::is_directory(args.reference) || !fs::is_directory(args.test)) {
    throw UsageError("metrics needs two files or two directories");
  }
  const auto refs = walk_dataset(args.reference);
  const auto tests = walk_dataset(args.test);
  std::vector<std::string> ref_paths, test_paths;
  for (const auto& e : refs.entries) ref_paths.push_back(e.relative);
  for (const auto& e : tests.entries) test_paths.push_back(e.relative);
  if (ref_paths != test_paths) {
    std::set<std::string> a(ref_paths.begin(), ref_paths.end());
    std::set<std::string> b(test_paths.begin(), test_paths.end());
    std::string example;
    for (const auto& p : a) {
      if (!b.count(p)) { example = p + " has no counterpart in " + args.test; break; }
    }
    for (const auto& p : b) {
      if (example.empty() && !a.count(p)) example = p + " has no counterpart in " + args.reference;
    }
    throw Error(ErrorCode::kShapeMismatch, "unmatched files: " + example);
  }
  std::vector<double> psnr_values(ref_paths.size());
  std::vector<double> ssim_values(ref_paths.size());
  parallel_for(ref_paths.size(), global.jobs, [&](std::size_t i) {
    const auto report = quality_report(load_image(refs.entries[i].absolute),
                                       load_image(tests.entries[i].absolute), params);
    psnr_values[i] = report.psnr_db;
    ssim_values[i] = report.ssim;
  });
  const auto dist = summarize_metrics(std::move(psnr_values), std::move(ssim_values));
  emit(args.out, distribution_to_csv(dist, ref_paths), out);
  return kSuccess;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  CorpusOptions corpus;
  std::string kind;
  std::string magnitudes;
  bool auto_grid = false;
  std::size_t grid_points = 12;
  std::string out;
};

int cmd_sweep(const SweepArgs& args, const GlobalOptions& global, std::ostream& out,
              std::ostream& err) {
  const NoiseKind kind = parse_kind(args.kind);
  std::vector<double> magnitudes;
  if (args.auto_grid == !args.magnitudes.empty()) {
    throw UsageError("sweep needs exactly one of --magnitudes or --auto-grid");
  }
  if (!args.auto_grid) {
    magnitudes = parse_numbers(args.magnitudes);
    for (double m : magnitudes) parse_spec(kind, m);
    for (std::size_t i = 1; i < magnitudes.size(); ++i) {
      if (!(magnitudes[i] > magnitudes[i - 1])) {
        throw UsageError("--magnitudes must be strictly increasing");
      }
    }
  } else if (args.grid_points < 3) {
    throw UsageError("--grid-points must be at least 3");
  }
  const auto params = global.ssim_params();
  validate(params);

  bool partial = false;
  const auto corpus = load(args.corpus, global, err, partial);
  const Seed seed{global.seed};
  if (args.auto_grid) {
    GridOptions grid;
    grid.count = args.grid_points;
    magnitudes = auto_grid(make_corpus_objective(corpus.images, kind, seed, params, global.jobs),
                           default_limits(kind), grid);
  }
  const auto result = sweep(corpus.images, kind, magnitudes, seed, params, global.jobs);
  emit(args.out, sweep_to_csv(std::span(&result, 1)), out);
  return partial ? kPartial : kSuccess;
}

// ---------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  CorpusOptions corpus;
  std::string targets = "0.25,0.5,0.7,0.8,0.9";
  std::string kinds = "gaussian,speckle,salt_pepper,poisson,occlusion";
  std::string method = "bisect";
  double tol = 0.01;
  double margin = 0.02;
  std::size_t fit_window = 4;
  std::string out;
};

int cmd_calibrate(const CalibrateArgs& args, const GlobalOptions& global, std::ostream& out,
                  std::ostream& err) {
  const auto targets = parse_numbers(args.targets);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!(targets[i] > 0.0 && targets[i] < 1.0)) throw UsageError("--targets must lie in (0, 1)");
    if (i > 0 && !(targets[i] > targets[i - 1])) {
      throw UsageError("--targets must be strictly increasing");
    }
  }
  std::vector<NoiseKind> kinds;
  for (const auto& item : split_list(args.kinds)) kinds.push_back(parse_kind(item));
  if (std::set<NoiseKind>(kinds.begin(), kinds.end()).size() != kinds.size()) {
    throw UsageError("--kinds must not repeat");
  }
  LookupOptions options;
  if (args.method == "fit") {
    options.method = CalibrationMethod::kFit;
  } else if (args.method == "bisect") {
    options.method = CalibrationMethod::kBisect;
  } else {
    throw UsageError("--method must be fit or bisect");
  }
  if (!(args.tol > 0.0)) throw UsageError("--tol must be > 0");
  if (!(args.margin >= 0.0)) throw UsageError("--margin must be >= 0");
  options.tol = args.tol;
  options.margin = args.margin;
  options.fit_window = args.fit_window;
  options.jobs = global.jobs;
  const auto params = global.ssim_params();
  validate(params);

  bool partial = false;
  const auto corpus = load(args.corpus, global, err, partial);
  options.corpus_id = corpus_id(args.corpus, corpus.images.size());
  const auto table = build_lookup(corpus.images, kinds, targets, Seed{global.seed}, params, options);

  std::size_t produced = 0;
  for (const auto& [kind, cells] : table.entries) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i]) {
        ++produced;
      } else {
        diagnostic(err, "warning", "cell_absent",
                   std::string(to_string(kind)) + "@" + format_number(targets[i]) + ": " +
                       table.reasons.at(kind).at(i));
        partial = true;
      }
    }
  }
  emit(args.out, lookup_to_json(table), out);
  if (produced == 0) {
    diagnostic(err, "error", "calibration_failed", "no lookup cell could be produced");
    return kPartial;
  }
  return kSuccess;
}

// ---------------------------------------------------------------------------
// inject

struct InjectArgs {
  std::string root;
  std::string out;
  std::string lookup;
  std::optional<double> level;
  std::string kind;
  std::optional<double> magnitude;
  std::string mixture;
  std::string weights;
  double passthrough = 0.0;
};

AugmentPolicy build_policy(const InjectArgs& args) {
  const bool from_lookup = !args.lookup.empty();
  const bool has_kind = !args.kind.empty();
  const bool has_mixture = !args.mixture.empty();
  if (has_kind && has_mixture) throw UsageError("--kind and --mixture are mutually exclusive");
  if (!has_kind && !has_mixture) throw UsageError("one of --kind or --mixture is required");
  if (from_lookup && args.magnitude) {
    throw UsageError("--magnitude conflicts with --lookup; magnitudes come from the table");
  }
  if (!from_lookup && args.level) throw UsageError("--level needs --lookup");
  if (!from_lookup && has_kind && !args.magnitude) {
    throw UsageError("--kind needs --magnitude (or --lookup)");
  }
  if (has_mixture && args.magnitude) {
    throw UsageError("--magnitude applies to --kind; give mixture items as kind@magnitude");
  }
  if (!args.weights.empty() && !has_mixture) throw UsageError("--weights needs --mixture");
  if (!(args.passthrough >= 0.0 && args.passthrough <= 1.0)) {
    throw UsageError("--passthrough must lie in [0, 1]");
  }

  // Each item is a kind (magnitude from the lookup) or kind@magnitude.
  std::vector<std::pair<NoiseKind, std::optional<double>>> items;
  for (const auto& item : has_kind ? std::vector<std::string>{args.kind}
                                   : split_list(args.mixture)) {
    const auto at = item.find('@');
    if (at == std::string::npos) {
      items.emplace_back(parse_kind(item), has_kind ? args.magnitude : std::nullopt);
    } else {
      if (from_lookup) throw UsageError("mixture items take no magnitude with --lookup");
      items.emplace_back(parse_kind(item.substr(0, at)), parse_number(item.substr(at + 1)));
    }
    if (!from_lookup && !items.back().second) {
      throw UsageError("mixture item '" + item + "' needs a magnitude (kind@magnitude)");
    }
  }

  std::vector<NoiseSpec> specs;
  if (from_lookup) {
    const double level = args.level.value_or(0.8);
    const auto table = lookup_from_json(read_text_file(args.lookup));
    for (const auto& [kind, unused] : items) {
      const auto magnitude = table.magnitude(kind, level);
      if (!magnitude) {
        throw UsageError("lookup has no " + std::string(to_string(kind)) + " entry for level " +
                         format_number(level));
      }
      specs.push_back(parse_spec(kind, *magnitude));
    }
  } else {
    for (const auto& [kind, magnitude] : items) specs.push_back(parse_spec(kind, *magnitude));
  }

  AugmentPolicy policy;
  policy.passthrough_probability = args.passthrough;
  if (has_kind) {
    policy.mode = specs.front();
  } else {
    Mixture mixture{std::move(specs), std::nullopt};
    if (!args.weights.empty()) mixture.weights = parse_numbers(args.weights);
    policy.mode = std::move(mixture);
  }
  try {
    validate(policy);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return policy;
}

int cmd_inject(const InjectArgs& args, const GlobalOptions& global, std::ostream& out,
               std::ostream& err) {
  const auto policy = build_policy(args);
  AugmentOptions options;
  options.ssim_params = global.ssim_params();
  options.jobs = global.jobs;
  validate(options.ssim_params);
  const auto manifest = augment_dataset(args.root, args.out, policy, Seed{global.seed}, options);
  const auto& header = manifest.header;
  for (const auto& skipped : header.skipped) {
    diagnostic(err, "warning", "skipped", skipped.in + ": " + skipped.reason);
  }
  out << "manifest: " << (fs::path(args.out) / kManifestFileName).generic_string() << '\n';
  out << "processed: " << header.processed << "  skipped: " << header.skipped.size() << '\n';
  out << "mean_ssim: " << format_number(header.mean_ssim) << '\n';
  out << "mean_psnr_db: " << (header.mean_psnr_db ? format_number(*header.mean_psnr_db) : "inf")
      << '\n';
  for (const auto& [kind, count] : header.kind_counts) out << kind << ": " << count << '\n';
  return header.skipped.empty() ? kSuccess : kPartial;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  CorpusOptions corpus;
  std::string kind;
  std::optional<double> magnitude;
  std::string csv = "distribution.csv";
  std::string summary = "summary.json";
};

int cmd_analyze(const AnalyzeArgs& args, const GlobalOptions& global, std::ostream& out,
                std::ostream& err) {
  const auto spec = parse_spec(parse_kind(args.kind), *args.magnitude);
  const auto params = global.ssim_params();
  validate(params);
  bool partial = false;
  const auto corpus = load(args.corpus, global, err, partial);
  const Seed seed{global.seed};
  const auto dist = metric_distribution(corpus.images, spec, seed, params, global.jobs);
  const auto summary = distribution_summary_json(dist, spec, seed, params);
  emit(args.csv, distribution_to_csv(dist, corpus.paths), out);
  emit(args.summary, summary, out);
  if (!dist.kurtosis_psnr) diagnostic(err, "warning", "kurtosis_undefined", "psnr: " + dist.kurtosis_psnr_reason);
  if (!dist.kurtosis_ssim) diagnostic(err, "warning", "kurtosis_undefined", "ssim: " + dist.kurtosis_ssim_reason);
  return partial ? kPartial : kSuccess;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string out;
  std::string manifest;
  std::string root;
  double fraction = 0.1;
};

int cmd_verify(const VerifyArgs& args, const GlobalOptions& global, std::ostream& out,
               std::ostream& err) {
  if (!(args.fraction >= 0.0 && args.fraction <= 1.0)) {
    throw UsageError("--fraction must lie in [0, 1]");
  }
  const fs::path manifest_path =
      args.manifest.empty() ? fs::path(args.out) / kManifestFileName : fs::path(args.manifest);
  const auto manifest = read_manifest(manifest_path);
  VerifyOptions options;
  options.fraction = args.fraction;
  options.sample_seed = Seed{global.seed};
  options.jobs = global.jobs;
  if (!args.root.empty()) options.root = args.root;
  const auto report = verify_manifest(args.out, manifest, options);
  for (const auto& missing : report.missing) diagnostic(err, "error", "missing_output", missing);
  for (const auto& m : report.mismatches) {
    diagnostic(err, "error", "metric_mismatch",
               m.out + " " + m.field + " stored=" + format_number(m.stored) +
                   " recomputed=" + format_number(m.recomputed));
  }
  out << "records: " << report.records << "  checked: " << report.checked
      << "  missing: " << report.missing.size() << "  mismatches: " << report.mismatches.size()
      << '\n';
  return report.ok() ? kSuccess : kPartial;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrated noise injection and image quality metrics"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(library_version()));

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Master seed (default 42)");
  app.add_option("--ssim-window", global.ssim_window, "SSIM window side, odd (default 11)");
  app.add_option("--ssim-sigma", global.ssim_sigma, "SSIM Gaussian window sigma (default 1.5)");
  app.add_option("--k1", global.k1, "SSIM K1 (default 0.01)");
  app.add_option("--k2", global.k2, "SSIM K2 (default 0.03)");
  app.add_option("--jobs", global.jobs, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);

  MetricsArgs metrics;
  auto* metrics_cmd = app.add_subcommand("metrics", "MSE/PSNR/SSIM for an image or directory pair");
  metrics_cmd->add_option("reference", metrics.reference)->required();
  metrics_cmd->add_option("test", metrics.test)->required();
  metrics_cmd->add_option("--out", metrics.out, "Output file (default stdout)");

  SweepArgs sweep_args;
  auto* sweep_cmd = app.add_subcommand("sweep", "Corpus MSSIM over a list of noise magnitudes");
  add_corpus_options(sweep_cmd, sweep_args.corpus);
  sweep_cmd->add_option("--kind", sweep_args.kind, "Noise kind")->required();
  sweep_cmd->add_option("--magnitudes", sweep_args.magnitudes, "Comma-separated, increasing");
  sweep_cmd->add_flag("--auto-grid", sweep_args.auto_grid,
                      "Geometric grid spanning MSSIM ~0.97 down to ~0.15");
  sweep_cmd->add_option("--grid-points", sweep_args.grid_points, "Auto-grid size (default 12)");
  sweep_cmd->add_option("--out", sweep_args.out, "CSV output file (default stdout)");

  CalibrateArgs calibrate;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Build a magnitude lookup table");
  add_corpus_options(calibrate_cmd, calibrate.corpus);
  calibrate_cmd->add_option("--targets", calibrate.targets, "Target MSSIM levels, increasing");
  calibrate_cmd->add_option("--kinds", calibrate.kinds, "Noise kinds to calibrate");
  calibrate_cmd->add_option("--method", calibrate.method, "fit or bisect (default bisect)");
  calibrate_cmd->add_option("--tol", calibrate.tol, "Bisection MSSIM tolerance (default 0.01)");
  calibrate_cmd->add_option("--margin", calibrate.margin,
                            "Allowed extrapolation of fitted curves in MSSIM (default 0.02)");
  calibrate_cmd->add_option("--fit-window", calibrate.fit_window,
                            "Sweep samples per fitted target; 0 fits the whole sweep (default 4)");
  calibrate_cmd->add_option("--out", calibrate.out, "JSON output file (default stdout)");

  InjectArgs inject;
  auto* inject_cmd = app.add_subcommand("inject", "Write a noised copy of a dataset");
  inject_cmd->add_option("root", inject.root, "Input dataset directory")->required();
  inject_cmd->add_option("out", inject.out, "Output directory")->required();
  inject_cmd->add_option("--lookup", inject.lookup, "Lookup table JSON from calibrate");
  inject_cmd->add_option("--level", inject.level, "Target MSSIM row of the lookup (default 0.8)");
  inject_cmd->add_option("--kind", inject.kind, "Single noise kind");
  inject_cmd->add_option("--magnitude", inject.magnitude, "Magnitude for --kind");
  inject_cmd->add_option("--mixture", inject.mixture,
                         "One kind per image from this list (kind or kind@magnitude)");
  inject_cmd->add_option("--weights", inject.weights, "Mixture probabilities");
  inject_cmd->add_option("--passthrough", inject.passthrough,
                         "Probability an image is copied clean (default 0)");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-image PSNR/SSIM and their kurtosis");
  add_corpus_options(analyze_cmd, analyze.corpus);
  analyze.corpus.limit = 0;
  analyze_cmd->add_option("--kind", analyze.kind, "Noise kind")->required();
  analyze_cmd->add_option("--magnitude", analyze.magnitude, "Noise magnitude")->required();
  analyze_cmd->add_option("--csv", analyze.csv, "Per-image CSV (default distribution.csv, - for stdout)");
  analyze_cmd->add_option("--summary", analyze.summary,
                          "Summary JSON (default summary.json, - for stdout)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Re-check an injected dataset against its manifest");
  verify_cmd->add_option("out", verify.out, "Output directory of inject")->required();
  verify_cmd->add_option("--manifest", verify.manifest, "Manifest path (default out/manifest.jsonl)");
  verify_cmd->add_option("--root", verify.root, "Input root (default from the manifest header)");
  verify_cmd->add_option("--fraction", verify.fraction, "Fraction of records to re-measure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << library_version() << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    diagnostic(err, "error", "usage", e.what());
    err << app.help();
    return kUsage;
  }

  try {
    if (*metrics_cmd) return cmd_metrics(metrics, global, out);
    if (*sweep_cmd) return cmd_sweep(sweep_args, global, out, err);
    if (*calibrate_cmd) return cmd_calibrate(calibrate, global, out, err);
    if (*inject_cmd) return cmd_inject(inject, global, out, err);
    if (*analyze_cmd) return cmd_analyze(analyze, global, out, err);
    if (*verify_cmd) return cmd_verify(verify, global, out, err);
  } catch (const UsageError& e) {
    diagnostic(err, "error", "usage", e.what());
    return kUsage;
  } catch (const Error& e) {
    // Bad SSIM flags surface here before any file is touched.
    const bool usage = e.code() == ErrorCode::kInvalidArgument;
    diagnostic(err, "error", to_string(e.code()), e.what());
    return usage ? kUsage : kIoError;
  } catch (const std::exception& e) {
    diagnostic(err, "error", "io", e.what());
    return kIoError;
  }
  return kUsage;
}

}  // namespace noisecal::cli
