#include "noisecal/metrics.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "noisecal/error.hpp"
#include "noisecal/parallel.hpp"

namespace noisecal {
namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorCode::kShapeMismatch,
                "image shapes differ: " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + "x" + std::to_string(a.channels()) + " vs " +
                    std::to_string(b.height()) + "x" + std::to_string(b.width()) + "x" +
                    std::to_string(b.channels()));
  }
}

std::vector<double> gaussian_taps(const SsimParams& params) {
  const auto side = params.window_side;
  const double radius = static_cast<double>(side / 2);
  std::vector<double> taps(side);
  for (std::size_t i = 0; i < side; ++i) {
    const double d = static_cast<double>(i) - radius;
    taps[i] = std::exp(-d * d / (2.0 * params.window_sigma * params.window_sigma));
  }
  const double sum = std::accumulate(taps.begin(), taps.end(), 0.0);
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" convolution of a height x width plane.
std::vector<double> filter_valid(std::span<const double> plane, std::size_t height,
                                 std::size_t width, std::span<const double> taps) {
  const std::size_t side = taps.size();
  const std::size_t out_w = width - side + 1;
  const std::size_t out_h = height - side + 1;
  std::vector<double> rows(height * out_w);
  for (std::size_t y = 0; y < height; ++y) {
    const double* src = plane.data() + y * width;
    double* dst = rows.data() + y * out_w;
    for (std::size_t x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < side; ++k) acc += taps[k] * src[x + k];
      dst[x] = acc;
    }
  }
  std::vector<double> out(out_h * out_w, 0.0);
  for (std::size_t y = 0; y < out_h; ++y) {
    double* dst = out.data() + y * out_w;
    for (std::size_t k = 0; k < side; ++k) {
      const double t = taps[k];
      const double* src = rows.data() + (y + k) * out_w;
      for (std::size_t x = 0; x < out_w; ++x) dst[x] += t * src[x];
    }
  }
  return out;
}

}  // namespace

void validate(const SsimParams& params) {
  if (!(params.k1 > 0.0) || !(params.k2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM constants k1 and k2 must be > 0");
  }
  if (!(params.data_range > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM data range must be > 0");
  }
  if (params.window_side < 3 || params.window_side % 2 == 0) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM window side must be odd and >= 3");
  }
  if (!(params.window_sigma > 0.0) || !std::isfinite(params.window_sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "SSIM window sigma must be > 0");
  }
}

std::vector<double> gaussian_window(const SsimParams& params) {
  validate(params);
  const auto taps = gaussian_taps(params);
  std::vector<double> window(taps.size() * taps.size());
  for (std::size_t i = 0; i < taps.size(); ++i) {
    for (std::size_t j = 0; j < taps.size(); ++j) window[i * taps.size() + j] = taps[i] * taps[j];
  }
  return window;
}

double mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b);
  const auto va = a.values();
  const auto vb = b.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(va.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b, double data_range) {
  const double error = mse(a, b);
  if (error == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(error / (data_range * data_range));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params) {
  validate(params);
  require_same_shape(a, b);
  const std::size_t height = a.height();
  const std::size_t width = a.width();
  if (std::min(height, width) < params.window_side) {
    throw Error(ErrorCode::kShapeMismatch,
                "image " + std::to_string(height) + "x" + std::to_string(width) +
                    " is smaller than the SSIM window " + std::to_string(params.window_side));
  }
  const auto la = to_luminance(a);
  const auto lb = to_luminance(b);
  const auto x = la.values();
  const auto y = lb.values();

  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto taps = gaussian_taps(params);
  const auto mu_x = filter_valid(x, height, width, taps);
  const auto mu_y = filter_valid(y, height, width, taps);
  const auto e_xx = filter_valid(xx, height, width, taps);
  const auto e_yy = filter_valid(yy, height, width, taps);
  const auto e_xy = filter_valid(xy, height, width, taps);

  const double c1 = params.c1();
  const double c2 = params.c2();
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double var_x = e_xx[i] - mx * mx;
    const double var_y = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
             ((mx * mx + my * my + c1) * (var_x + var_y + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

QualityReport quality_report(const ImageBuffer& reference, const ImageBuffer& test,
                             const SsimParams& params) {
  QualityReport report;
  report.mse = mse(reference, test);
  report.psnr_db = report.mse == 0.0 ? std::numeric_limits<double>::infinity()
                                     : -10.0 * std::log10(report.mse /
                                                          (params.data_range * params.data_range));
  report.ssim = ssim(reference, test, params);
  return report;
}

std::string corpus_item_key(std::size_t index) { return std::to_string(index); }

CorpusMssim corpus_mssim(std::span<const ImageBuffer> corpus, const NoiseSpec& spec, Seed master,
                         const SsimParams& params, std::size_t jobs) {
  validate(params);
  validate(spec);
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "corpus is empty");

  std::vector<double> scores(corpus.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const ImageBuffer& img = corpus[i];
    if (std::min(img.height(), img.width()) < params.window_side) return;
    const auto noisy = apply_noise(img, spec, derive_seed(master, corpus_item_key(i)));
    scores[i] = ssim(img, noisy, params);
  });

  CorpusMssim result;
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      result.skipped.push_back(i);
    } else {
      sum += scores[i];
      ++result.evaluated;
    }
  }
  if (result.evaluated == 0) {
    throw Error(ErrorCode::kEmptyInput, "no corpus image is large enough for the SSIM window");
  }
  result.mssim = sum / static_cast<double>(result.evaluated);
  return result;
}

double excess_kurtosis(std::span<const double> samples) {
  if (samples.size() < 4) {
    throw Error(ErrorCode::kInvalidArgument, "kurtosis needs at least 4 samples");
  }
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double s : samples) {
    const double d = s - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "kurtosis undefined for zero variance");
  }
  return m4 / (m2 * m2) - 3.0;
}

namespace {

void fill_kurtosis(std::span<const double> samples, std::optional<double>& value,
                   std::string& reason) {
  try {
    value = excess_kurtosis(samples);
  } catch (const Error& e) {
    value.reset();
    reason = e.what();
  }
}

}  // namespace

MetricDistribution summarize_metrics(std::vector<double> psnr_db, std::vector<double> ssim_values) {
  if (psnr_db.size() != ssim_values.size()) {
    throw Error(ErrorCode::kShapeMismatch, "psnr and ssim series differ in length");
  }
  MetricDistribution dist;
  dist.psnr_db = std::move(psnr_db);
  dist.ssim = std::move(ssim_values);

  std::vector<double> finite_psnr;
  finite_psnr.reserve(dist.psnr_db.size());
  for (double p : dist.psnr_db) {
    if (std::isfinite(p)) {
      finite_psnr.push_back(p);
    } else {
      ++dist.excluded_infinite_psnr;
    }
  }
  if (!finite_psnr.empty()) {
    dist.mean_psnr = std::accumulate(finite_psnr.begin(), finite_psnr.end(), 0.0) /
                     static_cast<double>(finite_psnr.size());
  }
  if (!dist.ssim.empty()) {
    dist.mean_ssim = std::accumulate(dist.ssim.begin(), dist.ssim.end(), 0.0) /
                     static_cast<double>(dist.ssim.size());
  }
  fill_kurtosis(finite_psnr, dist.kurtosis_psnr, dist.kurtosis_psnr_reason);
  fill_kurtosis(dist.ssim, dist.kurtosis_ssim, dist.kurtosis_ssim_reason);
  return dist;
}

MetricDistribution metric_distribution(std::span<const ImageBuffer> corpus, const NoiseSpec& spec,
                                       Seed master, const SsimParams& params, std::size_t jobs) {
  validate(params);
  validate(spec);
  if (corpus.empty()) throw Error(ErrorCode::kEmptyInput, "corpus is empty");
  std::vector<double> psnr_values(corpus.size());
  std::vector<double> ssim_values(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t i) {
    const auto noisy = apply_noise(corpus[i], spec, derive_seed(master, corpus_item_key(i)));
    const auto report = quality_report(corpus[i], noisy, params);
    psnr_values[i] = report.psnr_db;
    ssim_values[i] = report.ssim;
  });
  return summarize_metrics(std::move(psnr_values), std::move(ssim_values));
}

}  // namespace noisecal
