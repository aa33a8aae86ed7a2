#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace noisecal::testing {

/// Writes an 8-bit PNG straight through libpng, bypassing save_image.
/// `channels`: 1 gray, 2 gray+alpha, 3 RGB, 4 RGBA.
void write_png_raw(const std::filesystem::path& path, std::size_t height, std::size_t width,
                   std::size_t channels, const std::vector<std::uint8_t>& raw);

/// 16-bit grayscale PNG.
void write_png16_raw(const std::filesystem::path& path, std::size_t height, std::size_t width,
                     const std::vector<std::uint16_t>& raw);

/// Palette PNG; `indices` select entries of the RGB `palette`.
void write_png_palette(const std::filesystem::path& path, std::size_t height, std::size_t width,
                       const std::vector<std::uint8_t>& palette_rgb,
                       const std::vector<std::uint8_t>& indices);

/// Decodes a PNG's raw 8-bit samples with libpng (gray or RGB as stored).
std::vector<std::uint8_t> read_png_raw(const std::filesystem::path& path, std::size_t& channels);

/// Baseline JPEG through libjpeg; channels 1 or 3.
void write_jpeg(const std::filesystem::path& path, std::size_t height, std::size_t width,
                std::size_t channels, const std::vector<std::uint8_t>& raw, int quality = 95);

std::vector<unsigned char> read_bytes(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace noisecal::testing
