#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "noisecal/image.hpp"
#include "noisecal/random.hpp"

namespace noisecal {

enum class NoiseKind { kGaussian, kSpeckle, kSaltPepper, kPoisson, kOcclusion };

inline constexpr std::array<NoiseKind, 5> kAllNoiseKinds = {
    NoiseKind::kGaussian, NoiseKind::kSpeckle, NoiseKind::kSaltPepper, NoiseKind::kPoisson,
    NoiseKind::kOcclusion};

/// Canonical tags: gaussian, speckle, salt_pepper, poisson, occlusion.
std::string_view to_string(NoiseKind kind) noexcept;
std::optional<NoiseKind> parse_noise_kind(std::string_view tag) noexcept;

/// A noise kind plus its magnitude: Gaussian/speckle variance, salt & pepper
/// total probability, Poisson scale factor, or occlusion side length relative
/// to the shorter image side.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::kGaussian;
  double magnitude = 0.0;

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// Throws Error(kInvalidArgument) if `magnitude` is not admissible for `kind`.
void validate_magnitude(NoiseKind kind, double magnitude);
inline void validate(const NoiseSpec& spec) { validate_magnitude(spec.kind, spec.magnitude); }

/// clip(img + n), n ~ N(0, variance) i.i.d. per pixel and channel.
ImageBuffer apply_gaussian(const ImageBuffer& img, double variance, Seed seed);

/// clip(img * (1 + n)), n ~ N(0, variance) i.i.d. per pixel and channel.
ImageBuffer apply_speckle(const ImageBuffer& img, double variance, Seed seed);

/// Each pixel is corrupted with probability p; a corrupted pixel becomes black
/// or white (all channels) with equal odds.
ImageBuffer apply_salt_pepper(const ImageBuffer& img, double probability, Seed seed);

/// clip(c * K), K ~ Poisson(v / c), per pixel and channel. Larger c is noisier.
ImageBuffer apply_poisson(const ImageBuffer& img, double scale, Seed seed);

/// Zeroes an axis-aligned square of side round(rel_side * min(H, W)) whose
/// centre is uniform over the pixel grid; the square is cut at the borders.
ImageBuffer apply_occlusion(const ImageBuffer& img, double rel_side, Seed seed);

ImageBuffer apply_noise(const ImageBuffer& img, const NoiseSpec& spec, Seed seed);

}  // namespace noisecal
