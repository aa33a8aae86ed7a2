#include "noisecal/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "noisecal/error.hpp"

namespace noisecal {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kUnsupportedFormat: return "unsupported_format";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kFitFailure: return "fit_failure";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kBracketNotFound: return "bracket_not_found";
    case ErrorCode::kCorruptData: return "corrupt_data";
  }
  return "unknown";
}

namespace {

void check_shape(const ImageShape& shape, std::size_t value_count) {
  if (shape.height == 0 || shape.width == 0) {
    throw Error(ErrorCode::kInvalidArgument, "image has a zero dimension");
  }
  if (shape.channels != 1 && shape.channels != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "image must have 1 or 3 channels, got " + std::to_string(shape.channels));
  }
  if (value_count != shape.value_count()) {
    throw Error(ErrorCode::kShapeMismatch, "pixel count does not match H x W x C");
  }
}

}  // namespace

ImageBuffer::ImageBuffer(ImageShape shape, std::vector<double> values, int source_depth)
    : shape_(shape), values_(std::move(values)), source_depth_(source_depth) {
  check_shape(shape_, values_.size());
  for (double v : values_) {
    // Negated comparison also rejects NaN.
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kOutOfRange, "pixel value outside [0, 1]");
    }
  }
}

ImageBuffer ImageBuffer::filled(ImageShape shape, double value, int source_depth) {
  return ImageBuffer(shape, std::vector<double>(shape.value_count(), value), source_depth);
}

ImageBuffer clip(ImageShape shape, std::vector<double> values, int source_depth) {
  for (double& v : values) {
    if (std::isnan(v)) {
      throw Error(ErrorCode::kInvalidArgument, "cannot clip NaN");
    }
    v = std::min(1.0, std::max(0.0, v));
  }
  return ImageBuffer(shape, std::move(values), source_depth);
}

ImageBuffer clip(const ImageBuffer& img) { return img; }

ImageBuffer to_luminance(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  const auto src = img.values();
  std::vector<double> luma(img.shape().pixel_count());
  for (std::size_t i = 0; i < luma.size(); ++i) {
    const double y = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
    // The weights sum to 1 but rounding can nudge white slightly above it.
    luma[i] = std::min(1.0, y);
  }
  return ImageBuffer({img.height(), img.width(), 1}, std::move(luma), img.source_depth());
}

ImageBuffer quantize_8bit(const ImageBuffer& img) {
  std::vector<double> values(img.values().begin(), img.values().end());
  for (double& v : values) v = std::round(v * 255.0) / 255.0;
  return ImageBuffer(img.shape(), std::move(values), 8);
}

}  // namespace noisecal
