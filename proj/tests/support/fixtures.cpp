#include "fixtures.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <jpeglib.h>

namespace noisecal::testing {
namespace {

png_uint_32 format_for(std::size_t channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 2: return PNG_FORMAT_GA;
    case 3: return PNG_FORMAT_RGB;
    case 4: return PNG_FORMAT_RGBA;
  }
  throw std::invalid_argument("unsupported channel count");
}

void write_with(png_image& image, const std::filesystem::path& path, const void* buffer,
                const void* colormap) {
  if (!png_image_write_to_file(&image, path.c_str(), 0, buffer, 0, colormap)) {
    throw std::runtime_error(std::string("png write failed: ") + image.message);
  }
}

}  // namespace

void write_png_raw(const std::filesystem::path& path, std::size_t height, std::size_t width,
                   std::size_t channels, const std::vector<std::uint8_t>& raw) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = format_for(channels);
  write_with(image, path, raw.data(), nullptr);
}

void write_png16_raw(const std::filesystem::path& path, std::size_t height, std::size_t width,
                     const std::vector<std::uint16_t>& raw) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_LINEAR_Y;
  write_with(image, path, raw.data(), nullptr);
}

void write_png_palette(const std::filesystem::path& path, std::size_t height, std::size_t width,
                       const std::vector<std::uint8_t>& palette_rgb,
                       const std::vector<std::uint8_t>& indices) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(width);
  image.height = static_cast<png_uint_32>(height);
  image.format = PNG_FORMAT_RGB_COLORMAP;
  image.colormap_entries = static_cast<png_uint_32>(palette_rgb.size() / 3);
  write_with(image, path, indices.data(), palette_rgb.data());
}

std::vector<std::uint8_t> read_png_raw(const std::filesystem::path& path, std::size_t& channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw std::runtime_error(std::string("png read failed: ") + image.message);
  }
  image.format = (image.format & PNG_FORMAT_FLAG_COLOR) ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  channels = PNG_IMAGE_PIXEL_CHANNELS(image.format);
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    throw std::runtime_error(std::string("png read failed: ") + image.message);
  }
  return raw;
}

void write_jpeg(const std::filesystem::path& path, std::size_t height, std::size_t width,
                std::size_t channels, const std::vector<std::uint8_t>& raw, int quality) {
  FILE* file = std::fopen(path.c_str(), "wb");
  if (!file) throw std::runtime_error("cannot open " + path.string());
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file);
  cinfo.image_width = static_cast<JDIMENSION>(width);
  cinfo.image_height = static_cast<JDIMENSION>(height);
  cinfo.input_components = static_cast<int>(channels);
  cinfo.in_color_space = channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPLE*>(raw.data() + cinfo.next_scanline * width * channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(file);
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

}  // namespace noisecal::testing
