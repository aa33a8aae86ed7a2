#include "noisecal/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <system_error>

#include "json_support.hpp"
#include "noisecal/dataset.hpp"
#include "noisecal/error.hpp"
#include "noisecal/image.hpp"
#include "noisecal/noisecal.hpp"
#include "noisecal/parallel.hpp"
#include "noisecal/serialization.hpp"

namespace noisecal {

namespace fs = std::filesystem;
using detail::ordered_json;

std::string_view library_version() noexcept { return NOISECAL_VERSION; }

void validate(const AugmentPolicy& policy) {
  if (!(policy.passthrough_probability >= 0.0 && policy.passthrough_probability <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "passthrough probability must lie in [0, 1]");
  }
  if (const auto* spec = std::get_if<NoiseSpec>(&policy.mode)) {
    validate(*spec);
    return;
  }
  const auto& mixture = std::get<Mixture>(policy.mode);
  if (mixture.specs.empty()) throw Error(ErrorCode::kInvalidArgument, "mixture has no specs");
  for (const auto& spec : mixture.specs) validate(spec);
  if (mixture.weights) {
    const auto& w = *mixture.weights;
    if (w.size() != mixture.specs.size()) {
      throw Error(ErrorCode::kInvalidArgument, "mixture weights must match the number of noise kinds");
    }
    if (std::any_of(w.begin(), w.end(), [](double x) { return !(x >= 0.0); })) {
      throw Error(ErrorCode::kInvalidArgument, "mixture weights must be non-negative");
    }
    if (std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, "mixture weights must sum to 1");
    }
  }
}

std::optional<NoiseSpec> choose_spec(const AugmentPolicy& policy, Seed policy_seed) {
  CounterStream stream(policy_seed, 0);
  const double coin = stream.uniform();
  const double pick = stream.uniform();
  if (coin < policy.passthrough_probability) return std::nullopt;
  if (const auto* spec = std::get_if<NoiseSpec>(&policy.mode)) return *spec;

  const auto& mixture = std::get<Mixture>(policy.mode);
  const std::size_t n = mixture.specs.size();
  if (!mixture.weights) {
    return mixture.specs[std::min(n - 1, static_cast<std::size_t>(pick * static_cast<double>(n)))];
  }
  double cumulative = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    cumulative += (*mixture.weights)[i];
    if (pick < cumulative) return mixture.specs[i];
  }
  // Rounding left the cumulative sum just under 1: take the last weighted spec.
  for (std::size_t i = n; i-- > 0;) {
    if ((*mixture.weights)[i] > 0.0) return mixture.specs[i];
  }
  return mixture.specs.back();
}

namespace {

ordered_json spec_json(const NoiseSpec& spec) {
  return {{"kind", to_string(spec.kind)}, {"magnitude", spec.magnitude}};
}

NoiseSpec spec_from_json(const ordered_json& j) {
  const auto tag = j.at("kind").get<std::string>();
  const auto kind = parse_noise_kind(tag);
  if (!kind) throw Error(ErrorCode::kCorruptData, "unknown noise kind '" + tag + "'");
  return {*kind, j.at("magnitude").get<double>()};
}

ordered_json policy_json(const AugmentPolicy& policy) {
  if (const auto* spec = std::get_if<NoiseSpec>(&policy.mode)) {
    return {{"mode", "fixed"},
            {"spec", spec_json(*spec)},
            {"passthrough", policy.passthrough_probability}};
  }
  const auto& mixture = std::get<Mixture>(policy.mode);
  ordered_json specs = ordered_json::array();
  for (const auto& spec : mixture.specs) specs.push_back(spec_json(spec));
  return {{"mode", "mixture"},
          {"specs", std::move(specs)},
          {"weights", mixture.weights ? ordered_json(*mixture.weights) : ordered_json(nullptr)},
          {"passthrough", policy.passthrough_probability}};
}

AugmentPolicy policy_from_json(const ordered_json& j) {
  AugmentPolicy policy;
  policy.passthrough_probability = j.at("passthrough").get<double>();
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "fixed") {
    policy.mode = spec_from_json(j.at("spec"));
  } else if (mode == "mixture") {
    Mixture mixture;
    for (const auto& spec : j.at("specs")) mixture.specs.push_back(spec_from_json(spec));
    if (!j.at("weights").is_null()) mixture.weights = j.at("weights").get<std::vector<double>>();
    policy.mode = std::move(mixture);
  } else {
    throw Error(ErrorCode::kCorruptData, "unknown policy mode '" + mode + "'");
  }
  return policy;
}

bool is_within(const fs::path& inner, const fs::path& outer) {
  const auto rel = inner.lexically_relative(outer);
  return !rel.empty() && *rel.begin() != "..";
}

std::string output_name(const std::string& relative, std::set<std::string>& taken) {
  std::string name = fs::path(relative).replace_extension(".png").generic_string();
  if (!taken.insert(name).second) {
    // a.jpg and a.png would both map to a.png; keep the source extension.
    name = relative + ".png";
    taken.insert(name);
  }
  return name;
}

}  // namespace

Manifest augment_dataset(const fs::path& root, const fs::path& out, const AugmentPolicy& policy,
                         Seed master, const AugmentOptions& options) {
  validate(policy);
  validate(options.ssim_params);
  const auto root_abs = fs::weakly_canonical(fs::absolute(root));
  const auto out_abs = fs::weakly_canonical(fs::absolute(out));
  if (root_abs == out_abs || is_within(out_abs, root_abs)) {
    throw Error(ErrorCode::kInvalidArgument, "output directory must lie outside the input root");
  }
  const auto listing = walk_dataset(root_abs);
  std::error_code ec;
  fs::create_directories(out_abs, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_abs.string() + ": " + ec.message());

  const auto& entries = listing.entries;
  std::set<std::string> taken;
  std::vector<std::string> out_names;
  out_names.reserve(entries.size());
  for (const auto& entry : entries) out_names.push_back(output_name(entry.relative, taken));

  std::vector<std::optional<ManifestRecord>> records(entries.size());
  std::vector<std::string> failures(entries.size());
  parallel_for(entries.size(), options.jobs, [&](std::size_t i) {
    const auto& entry = entries[i];
    try {
      const auto input = load_image(entry.absolute);
      const Seed noise_seed = derive_seed(master, entry.relative);
      const auto spec = choose_spec(policy, derive_seed(master, entry.relative + ":policy"));
      // Metrics are taken on the 8-bit result so that the files on disk
      // reproduce them exactly.
      const auto output = spec ? quantize_8bit(apply_noise(input, *spec, noise_seed)) : input;
      const auto report = quality_report(input, output, options.ssim_params);
      const auto target = out_abs / fs::path(out_names[i]);
      std::error_code dir_ec;
      fs::create_directories(target.parent_path(), dir_ec);
      save_image(output, target);
      records[i] = ManifestRecord{entry.relative, out_names[i], spec, noise_seed, report.psnr_db,
                                  report.ssim};
    } catch (const Error& e) {
      failures[i] = e.what();
    }
  });

  Manifest manifest;
  auto& header = manifest.header;
  header.tool_version = std::string(library_version());
  header.master_seed = master;
  header.root = root_abs.generic_string();
  header.policy = policy;
  header.ssim_params = options.ssim_params;
  std::vector<double> psnr_values;
  std::vector<double> ssim_values;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!records[i]) {
      header.skipped.push_back({entries[i].relative, failures[i]});
      continue;
    }
    const auto& record = *records[i];
    psnr_values.push_back(record.psnr_db);
    ssim_values.push_back(record.ssim);
    ++header.kind_counts[record.spec ? std::string(to_string(record.spec->kind)) : "clean"];
    manifest.records.push_back(std::move(*records[i]));
  }
  for (const auto& error : listing.errors) header.skipped.push_back({"", error});
  header.processed = manifest.records.size();
  if (!ssim_values.empty()) {
    const auto summary = summarize_metrics(std::move(psnr_values), std::move(ssim_values));
    header.mean_ssim = summary.mean_ssim;
    header.mean_psnr_db = summary.mean_psnr;
    header.excluded_infinite_psnr = summary.excluded_infinite_psnr;
  }
  write_file_atomic(out_abs / kManifestFileName, manifest_to_jsonl(manifest));
  return manifest;
}

std::string manifest_to_jsonl(const Manifest& manifest) {
  const auto& h = manifest.header;
  ordered_json skipped = ordered_json::array();
  for (const auto& s : h.skipped) skipped.push_back({{"in", s.in}, {"reason", s.reason}});
  ordered_json header{
      {"tool", "noisecal"},
      {"version", h.tool_version},
      {"master_seed", h.master_seed.value},
      {"root", h.root},
      {"policy", policy_json(h.policy)},
      {"ssim_params", detail::to_json(h.ssim_params)},
      {"summary",
       {{"processed", h.processed},
        {"skipped", std::move(skipped)},
        {"mean_ssim", h.mean_ssim},
        {"mean_psnr_db", h.mean_psnr_db ? ordered_json(*h.mean_psnr_db) : ordered_json(nullptr)},
        {"excluded_infinite_psnr", h.excluded_infinite_psnr},
        {"kind_counts", h.kind_counts}}},
  };
  std::string text = ordered_json{{"header", std::move(header)}}.dump() + "\n";
  for (const auto& r : manifest.records) {
    ordered_json line{
        {"in", r.in},
        {"out", r.out},
        {"kind", r.spec ? ordered_json(to_string(r.spec->kind)) : ordered_json("clean")},
        {"magnitude", r.spec ? ordered_json(r.spec->magnitude) : ordered_json(nullptr)},
        {"seed", r.seed.value},
        {"psnr_db", detail::number_or_inf(r.psnr_db)},
        {"ssim", r.ssim},
    };
    text += line.dump() + "\n";
  }
  return text;
}

Manifest manifest_from_jsonl(std::string_view text) {
  Manifest manifest;
  std::istringstream lines{std::string(text)};
  std::string line;
  bool have_header = false;
  std::size_t line_number = 0;
  try {
    while (std::getline(lines, line)) {
      ++line_number;
      if (line.empty()) continue;
      const auto j = ordered_json::parse(line);
      if (!have_header) {
        const auto& h = j.at("header");
        auto& header = manifest.header;
        header.tool_version = h.at("version").get<std::string>();
        header.master_seed = Seed{h.at("master_seed").get<std::uint64_t>()};
        header.root = h.at("root").get<std::string>();
        header.policy = policy_from_json(h.at("policy"));
        header.ssim_params = detail::ssim_params_from_json(h.at("ssim_params"));
        const auto& summary = h.at("summary");
        header.processed = summary.at("processed").get<std::size_t>();
        for (const auto& s : summary.at("skipped")) {
          header.skipped.push_back({s.at("in").get<std::string>(), s.at("reason").get<std::string>()});
        }
        header.mean_ssim = summary.at("mean_ssim").get<double>();
        if (!summary.at("mean_psnr_db").is_null()) {
          header.mean_psnr_db = summary.at("mean_psnr_db").get<double>();
        }
        header.excluded_infinite_psnr = summary.at("excluded_infinite_psnr").get<std::size_t>();
        header.kind_counts = summary.at("kind_counts").get<std::map<std::string, std::size_t>>();
        have_header = true;
        continue;
      }
      ManifestRecord record;
      record.in = j.at("in").get<std::string>();
      record.out = j.at("out").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      if (kind != "clean") {
        const auto parsed = parse_noise_kind(kind);
        if (!parsed) throw Error(ErrorCode::kCorruptData, "unknown noise kind '" + kind + "'");
        record.spec = NoiseSpec{*parsed, j.at("magnitude").get<double>()};
      }
      record.seed = Seed{j.at("seed").get<std::uint64_t>()};
      record.psnr_db = detail::inf_or_number(j.at("psnr_db"));
      record.ssim = j.at("ssim").get<double>();
      manifest.records.push_back(std::move(record));
    }
  } catch (const ordered_json::exception& e) {
    throw Error(ErrorCode::kCorruptData,
                "manifest line " + std::to_string(line_number) + ": " + e.what());
  }
  if (!have_header) throw Error(ErrorCode::kCorruptData, "manifest has no header line");
  if (manifest.records.size() != manifest.header.processed) {
    throw Error(ErrorCode::kCorruptData, "manifest record count does not match its header");
  }
  return manifest;
}

Manifest read_manifest(const fs::path& path) { return manifest_from_jsonl(read_text_file(path)); }

VerifyReport verify_manifest(const fs::path& out, const Manifest& manifest,
                             const VerifyOptions& options) {
  if (!(options.fraction >= 0.0 && options.fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "verification fraction must lie in [0, 1]");
  }
  const fs::path root = options.root ? *options.root : fs::path(manifest.header.root);
  const auto& records = manifest.records;

  VerifyReport report;
  report.records = records.size();
  std::vector<std::size_t> sample;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::error_code ec;
    if (!fs::is_regular_file(out / records[i].out, ec)) {
      report.missing.push_back(records[i].out);
      continue;
    }
    CounterStream stream(derive_seed(options.sample_seed, records[i].in + ":verify"), 0);
    if (stream.uniform() < options.fraction) sample.push_back(i);
  }

  std::vector<std::vector<VerifyMismatch>> found(sample.size());
  parallel_for(sample.size(), options.jobs, [&](std::size_t k) {
    const auto& record = records[sample[k]];
    try {
      const auto input = load_image(root / record.in);
      const auto output = load_image(out / record.out);
      const auto fresh = quality_report(input, output, manifest.header.ssim_params);
      const bool psnr_match =
          (std::isinf(fresh.psnr_db) && std::isinf(record.psnr_db))
              ? fresh.psnr_db == record.psnr_db
              : std::abs(fresh.psnr_db - record.psnr_db) <= 1e-9;
      if (!psnr_match) found[k].push_back({record.out, "psnr_db", record.psnr_db, fresh.psnr_db});
      if (!(std::abs(fresh.ssim - record.ssim) <= 1e-9)) {
        found[k].push_back({record.out, "ssim", record.ssim, fresh.ssim});
      }
    } catch (const Error& e) {
      found[k].push_back({record.out, std::string("unreadable: ") + e.what(), record.ssim,
                          std::nan("")});
    }
  });
  report.checked = sample.size();
  for (auto& list : found) {
    for (auto& mismatch : list) report.mismatches.push_back(std::move(mismatch));
  }
  return report;
}

}  // namespace noisecal
