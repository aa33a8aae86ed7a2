#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "noisecal/image.hpp"
#include "noisecal/noise.hpp"
#include "noisecal/random.hpp"

namespace noisecal {

/// Windowed SSIM configuration. Defaults follow Wang et al. (2004): 11x11
/// Gaussian window with sigma 1.5, K1 = 0.01, K2 = 0.03, data range 1.
struct SsimParams {
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
  std::size_t window_side = 11;
  double window_sigma = 1.5;

  double c1() const noexcept { return (k1 * data_range) * (k1 * data_range); }
  double c2() const noexcept { return (k2 * data_range) * (k2 * data_range); }

  friend bool operator==(const SsimParams&, const SsimParams&) = default;
};

void validate(const SsimParams& params);

/// Normalised 2-D window weights, row-major window_side x window_side.
std::vector<double> gaussian_window(const SsimParams& params);

struct QualityReport {
  double mse = 0.0;
  double psnr_db = 0.0;  // +inf when mse == 0
  double ssim = 1.0;
};

double mse(const ImageBuffer& a, const ImageBuffer& b);
/// 10 log10(L^2 / mse); +infinity for identical images.
double psnr(const ImageBuffer& a, const ImageBuffer& b, double data_range = 1.0);
/// Mean SSIM over all valid window positions of the luminance images.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {});
QualityReport quality_report(const ImageBuffer& reference, const ImageBuffer& test,
                             const SsimParams& params = {});

/// Item key used for per-image noise seeds in corpus-level evaluations.
std::string corpus_item_key(std::size_t index);

struct CorpusMssim {
  double mssim = 0.0;
  std::size_t evaluated = 0;
  std::vector<std::size_t> skipped;  // indices smaller than the SSIM window
};

/// Mean SSIM between each image and its noisy copy, image i being noised with
/// derive_seed(master, corpus_item_key(i)).
CorpusMssim corpus_mssim(std::span<const ImageBuffer> corpus, const NoiseSpec& spec, Seed master,
                         const SsimParams& params = {}, std::size_t jobs = 1);

/// Population excess kurtosis m4 / m2^2 - 3. Requires at least four samples
/// with non-zero variance.
double excess_kurtosis(std::span<const double> samples);

struct MetricDistribution {
  std::vector<double> psnr_db;  // may contain +inf
  std::vector<double> ssim;
  std::optional<double> kurtosis_psnr;
  std::optional<double> kurtosis_ssim;
  std::string kurtosis_psnr_reason;  // set when kurtosis_psnr is empty
  std::string kurtosis_ssim_reason;
  std::optional<double> mean_psnr;  // over finite values
  double mean_ssim = 0.0;
  std::size_t excluded_infinite_psnr = 0;

  std::size_t count() const noexcept { return ssim.size(); }
};

MetricDistribution metric_distribution(std::span<const ImageBuffer> corpus, const NoiseSpec& spec,
                                       Seed master, const SsimParams& params = {},
                                       std::size_t jobs = 1);

/// Builds a distribution from already computed per-image values.
MetricDistribution summarize_metrics(std::vector<double> psnr_db, std::vector<double> ssim);

}  // namespace noisecal
