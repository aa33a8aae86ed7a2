#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "noisecal/metrics.hpp"
#include "noisecal/noise.hpp"
#include "noisecal/random.hpp"

namespace noisecal {

/// One noise kind picked per image; weights default to uniform.
struct Mixture {
  std::vector<NoiseSpec> specs;
  std::optional<std::vector<double>> weights;

  friend bool operator==(const Mixture&, const Mixture&) = default;
};

struct AugmentPolicy {
  std::variant<NoiseSpec, Mixture> mode;
  double passthrough_probability = 0.0;

  friend bool operator==(const AugmentPolicy&, const AugmentPolicy&) = default;
};

void validate(const AugmentPolicy& policy);

/// The noise applied to an image with policy stream `policy_seed`, or nullopt
/// for a clean passthrough. The passthrough coin is always drawn first.
std::optional<NoiseSpec> choose_spec(const AugmentPolicy& policy, Seed policy_seed);

struct ManifestRecord {
  std::string in;   // relative to the input root
  std::string out;  // relative to the output root
  std::optional<NoiseSpec> spec;  // nullopt = clean
  Seed seed{};                    // noise stream seed
  double psnr_db = 0.0;
  double ssim = 1.0;
};

struct SkippedInput {
  std::string in;
  std::string reason;
};

struct ManifestHeader {
  std::string tool_version;
  Seed master_seed{};
  std::string root;
  AugmentPolicy policy;
  SsimParams ssim_params;
  std::size_t processed = 0;
  std::vector<SkippedInput> skipped;
  double mean_ssim = 0.0;
  std::optional<double> mean_psnr_db;
  std::size_t excluded_infinite_psnr = 0;
  std::map<std::string, std::size_t> kind_counts;  // includes "clean"
};

struct Manifest {
  ManifestHeader header;
  std::vector<ManifestRecord> records;
};

inline constexpr const char* kManifestFileName = "manifest.jsonl";

struct AugmentOptions {
  SsimParams ssim_params{};
  std::size_t jobs = 1;
};

/// Noises every image below `root` into a mirrored PNG tree under `out` and
/// writes `out`/manifest.jsonl. Unreadable inputs are recorded and skipped.
Manifest augment_dataset(const std::filesystem::path& root, const std::filesystem::path& out,
                         const AugmentPolicy& policy, Seed master,
                         const AugmentOptions& options = {});

/// Header line followed by one line per record.
std::string manifest_to_jsonl(const Manifest& manifest);
/// Throws Error(kCorruptData) for malformed manifests.
Manifest manifest_from_jsonl(std::string_view text);
Manifest read_manifest(const std::filesystem::path& path);

struct VerifyMismatch {
  std::string out;
  std::string field;
  double stored = 0.0;
  double recomputed = 0.0;
};

struct VerifyReport {
  std::size_t records = 0;
  std::size_t checked = 0;
  std::vector<std::string> missing;
  std::vector<VerifyMismatch> mismatches;

  bool ok() const noexcept { return missing.empty() && mismatches.empty(); }
};

struct VerifyOptions {
  double fraction = 0.1;
  Seed sample_seed{};
  std::optional<std::filesystem::path> root;  // overrides the header root
  std::size_t jobs = 1;
};

/// Every record's output must exist; a seeded sample is re-measured against
/// its input and compared with the stored metrics at 1e-9.
VerifyReport verify_manifest(const std::filesystem::path& out, const Manifest& manifest,
                             const VerifyOptions& options = {});

}  // namespace noisecal
