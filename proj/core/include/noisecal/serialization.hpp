#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "noisecal/calibration.hpp"
#include "noisecal/metrics.hpp"

namespace noisecal {

/// Shortest decimal that round-trips; non-finite values print as "inf",
/// "-inf" or "nan".
std::string format_number(double value);

/// `kind,magnitude,mssim` with a header row. Several sweeps concatenate.
std::string sweep_to_csv(std::span<const SweepResult> sweeps);

/// `index,path,psnr_db,ssim`, one row per image, LF line endings.
std::string distribution_to_csv(const MetricDistribution& dist,
                                std::span<const std::string> paths);

/// Summary document: count, kurtosis_psnr, kurtosis_ssim, mean_psnr,
/// mean_ssim, excluded_infinite_psnr. Undefined values are null and are
/// explained by *_defined / *_reason fields.
std::string distribution_summary_json(const MetricDistribution& dist, const NoiseSpec& spec,
                                      Seed seed, const SsimParams& params);

std::string quality_report_json(const QualityReport& report);

std::string lookup_to_json(const LookupTable& table);
/// Throws Error(kCorruptData) on malformed documents.
LookupTable lookup_from_json(std::string_view text);

/// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace noisecal
