#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace noisecal {

struct ImageShape {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;

  std::size_t pixel_count() const noexcept { return height * width; }
  std::size_t value_count() const noexcept { return height * width * channels; }

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

/// Row-major, interleaved H x W x C image with every value in [0, 1].
///
/// The range invariant is checked on construction; any operation that can
/// leave the unit interval goes through `clip` first.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  ImageBuffer(ImageShape shape, std::vector<double> values, int source_depth = 8);

  static ImageBuffer filled(ImageShape shape, double value, int source_depth = 8);

  const ImageShape& shape() const noexcept { return shape_; }
  std::size_t height() const noexcept { return shape_.height; }
  std::size_t width() const noexcept { return shape_.width; }
  std::size_t channels() const noexcept { return shape_.channels; }
  int source_depth() const noexcept { return source_depth_; }
  bool empty() const noexcept { return values_.empty(); }

  std::span<const double> values() const noexcept { return values_; }
  double at(std::size_t y, std::size_t x, std::size_t c = 0) const {
    return values_[(y * shape_.width + x) * shape_.channels + c];
  }

  /// Moves the storage out; the buffer is left empty.
  std::vector<double> release() && { return std::move(values_); }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  ImageShape shape_{};
  std::vector<double> values_;
  int source_depth_ = 8;
};

/// Clamps arbitrary values into [0, 1] and wraps them as an image.
ImageBuffer clip(ImageShape shape, std::vector<double> values, int source_depth = 8);

/// Identity on a valid buffer; present so pipelines can clip uniformly.
ImageBuffer clip(const ImageBuffer& img);

/// BT.601 luma (0.299 R + 0.587 G + 0.114 B). Single-channel input is
/// returned unchanged.
ImageBuffer to_luminance(const ImageBuffer& img);

/// Rounds every value to the nearest multiple of 1/255, half away from zero.
ImageBuffer quantize_8bit(const ImageBuffer& img);

/// Decodes an 8-bit grayscale or RGB PNG/JPEG. Alpha is dropped, palettes are
/// expanded to RGB, gray+alpha becomes gray.
ImageBuffer load_image(const std::filesystem::path& path);

/// Encodes as 8-bit PNG regardless of the extension of `path`.
void save_image(const ImageBuffer& img, const std::filesystem::path& path);

/// PNG encoding into memory, used for byte-level comparisons.
std::vector<unsigned char> encode_png(const ImageBuffer& img);

}  // namespace noisecal
