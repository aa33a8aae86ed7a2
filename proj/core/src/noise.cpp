#include "noisecal/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "noisecal/error.hpp"

namespace noisecal {
namespace {

std::vector<double> copy_values(const ImageBuffer& img) {
  return {img.values().begin(), img.values().end()};
}

void require_finite(double magnitude, std::string_view what) {
  if (!std::isfinite(magnitude)) {
    throw Error(ErrorCode::kInvalidArgument, std::string(what) + " must be finite");
  }
}

}  // namespace

std::string_view to_string(NoiseKind kind) noexcept {
  switch (kind) {
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kSpeckle: return "speckle";
    case NoiseKind::kSaltPepper: return "salt_pepper";
    case NoiseKind::kPoisson: return "poisson";
    case NoiseKind::kOcclusion: return "occlusion";
  }
  return "unknown";
}

std::optional<NoiseKind> parse_noise_kind(std::string_view tag) noexcept {
  for (NoiseKind kind : kAllNoiseKinds) {
    if (tag == to_string(kind)) return kind;
  }
  return std::nullopt;
}

void validate_magnitude(NoiseKind kind, double magnitude) {
  const std::string name(to_string(kind));
  require_finite(magnitude, name + " magnitude");
  switch (kind) {
    case NoiseKind::kGaussian:
    case NoiseKind::kSpeckle:
      if (magnitude < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, name + " variance must be >= 0");
      }
      return;
    case NoiseKind::kSaltPepper:
      if (magnitude < 0.0 || magnitude > 1.0) {
        throw Error(ErrorCode::kInvalidArgument, "salt_pepper probability must lie in [0, 1]");
      }
      return;
    case NoiseKind::kPoisson:
      if (!(magnitude > 0.0)) {
        throw Error(ErrorCode::kInvalidArgument, "poisson scale factor must be > 0");
      }
      return;
    case NoiseKind::kOcclusion:
      if (magnitude < 0.0) {
        throw Error(ErrorCode::kInvalidArgument, "occlusion side length must be >= 0");
      }
      return;
  }
}

ImageBuffer apply_gaussian(const ImageBuffer& img, double variance, Seed seed) {
  validate_magnitude(NoiseKind::kGaussian, variance);
  if (variance == 0.0) return img;
  const double sigma = std::sqrt(variance);
  auto values = copy_values(img);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CounterStream stream(seed, i);
    values[i] += sigma * stream.standard_normal();
  }
  return clip(img.shape(), std::move(values), img.source_depth());
}

ImageBuffer apply_speckle(const ImageBuffer& img, double variance, Seed seed) {
  validate_magnitude(NoiseKind::kSpeckle, variance);
  if (variance == 0.0) return img;
  const double sigma = std::sqrt(variance);
  auto values = copy_values(img);
  for (std::size_t i = 0; i < values.size(); ++i) {
    CounterStream stream(seed, i);
    values[i] *= 1.0 + sigma * stream.standard_normal();
  }
  return clip(img.shape(), std::move(values), img.source_depth());
}

ImageBuffer apply_salt_pepper(const ImageBuffer& img, double probability, Seed seed) {
  validate_magnitude(NoiseKind::kSaltPepper, probability);
  if (probability == 0.0) return img;
  const std::size_t channels = img.channels();
  auto values = copy_values(img);
  for (std::size_t p = 0; p < img.shape().pixel_count(); ++p) {
    CounterStream stream(seed, p);
    // Corruption and polarity use separate draws so the corrupted set grows
    // monotonically with the probability under a fixed seed.
    if (stream.uniform() >= probability) continue;
    const double level = stream.uniform() < 0.5 ? 0.0 : 1.0;
    std::fill_n(values.begin() + static_cast<std::ptrdiff_t>(p * channels), channels, level);
  }
  return ImageBuffer(img.shape(), std::move(values), img.source_depth());
}

ImageBuffer apply_poisson(const ImageBuffer& img, double scale, Seed seed) {
  validate_magnitude(NoiseKind::kPoisson, scale);
  auto values = copy_values(img);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    CounterStream stream(seed, i);
    values[i] = scale * static_cast<double>(stream.poisson(values[i] / scale));
  }
  return clip(img.shape(), std::move(values), img.source_depth());
}

ImageBuffer apply_occlusion(const ImageBuffer& img, double rel_side, Seed seed) {
  validate_magnitude(NoiseKind::kOcclusion, rel_side);
  const auto height = static_cast<std::int64_t>(img.height());
  const auto width = static_cast<std::int64_t>(img.width());
  const double side_real = std::round(rel_side * static_cast<double>(std::min(height, width)));
  // Anything beyond twice the larger side already covers the whole image.
  const auto side = static_cast<std::int64_t>(
      std::min(side_real, 2.0 * static_cast<double>(std::max(height, width)) + 2.0));
  if (side == 0) return img;

  CounterStream stream(seed, 0);
  const auto cy = static_cast<std::int64_t>(stream.uniform_index(static_cast<std::uint64_t>(height)));
  const auto cx = static_cast<std::int64_t>(stream.uniform_index(static_cast<std::uint64_t>(width)));
  const std::int64_t y0 = std::max<std::int64_t>(0, cy - side / 2);
  const std::int64_t y1 = std::min<std::int64_t>(height, cy - side / 2 + side);
  const std::int64_t x0 = std::max<std::int64_t>(0, cx - side / 2);
  const std::int64_t x1 = std::min<std::int64_t>(width, cx - side / 2 + side);

  const std::size_t channels = img.channels();
  auto values = copy_values(img);
  for (std::int64_t y = y0; y < y1; ++y) {
    const auto row = static_cast<std::size_t>(y * width);
    const auto first = (row + static_cast<std::size_t>(x0)) * channels;
    const auto last = (row + static_cast<std::size_t>(x1)) * channels;
    std::fill(values.begin() + static_cast<std::ptrdiff_t>(first),
              values.begin() + static_cast<std::ptrdiff_t>(last), 0.0);
  }
  return ImageBuffer(img.shape(), std::move(values), img.source_depth());
}

ImageBuffer apply_noise(const ImageBuffer& img, const NoiseSpec& spec, Seed seed) {
  switch (spec.kind) {
    case NoiseKind::kGaussian: return apply_gaussian(img, spec.magnitude, seed);
    case NoiseKind::kSpeckle: return apply_speckle(img, spec.magnitude, seed);
    case NoiseKind::kSaltPepper: return apply_salt_pepper(img, spec.magnitude, seed);
    case NoiseKind::kPoisson: return apply_poisson(img, spec.magnitude, seed);
    case NoiseKind::kOcclusion: return apply_occlusion(img, spec.magnitude, seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown noise kind");
}

}  // namespace noisecal
