#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

// jpeglib.h needs FILE and size_t declared first.
#include <jpeglib.h>

#include "noisecal/error.hpp"
#include "noisecal/image.hpp"

namespace noisecal {
namespace {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed: " + path.string());
  return bytes;
}

ImageBuffer from_bytes(std::size_t height, std::size_t width, std::size_t stored_channels,
                       std::size_t keep_channels, const std::vector<unsigned char>& raw) {
  if (height == 0 || width == 0) {
    throw Error(ErrorCode::kUnsupportedFormat, "zero-dimension image");
  }
  std::vector<double> values(height * width * keep_channels);
  for (std::size_t p = 0; p < height * width; ++p) {
    for (std::size_t c = 0; c < keep_channels; ++c) {
      values[p * keep_channels + c] = raw[p * stored_channels + c] / 255.0;
    }
  }
  return ImageBuffer({height, width, keep_channels}, std::move(values), 8);
}

ImageBuffer decode_png(const std::vector<unsigned char>& bytes, const std::string& name) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::kUnsupportedFormat, name + ": " + image.message);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, name + ": only 8-bit images are supported");
  }
  const bool color =
      (image.format & PNG_FORMAT_FLAG_COLOR) || (image.format & PNG_FORMAT_FLAG_COLORMAP);
  const bool alpha = image.format & PNG_FORMAT_FLAG_ALPHA;
  if (color) {
    image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
  } else {
    image.format = alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
  }
  const std::size_t stored = PNG_IMAGE_PIXEL_CHANNELS(image.format);
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kUnsupportedFormat, name + ": " + message);
  }
  return from_bytes(image.height, image.width, stored, color ? 3 : 1, raw);
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Kept free of non-trivial locals so the longjmp does not skip destructors.
bool decode_jpeg_raw(const std::vector<unsigned char>& bytes, std::vector<unsigned char>& raw,
                     std::size_t& height, std::size_t& width, std::size_t& channels,
                     std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    error = jerr.message;
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.num_components == 1) {
    cinfo.out_color_space = JCS_GRAYSCALE;
  } else if (cinfo.jpeg_color_space == JCS_YCbCr || cinfo.jpeg_color_space == JCS_RGB) {
    cinfo.out_color_space = JCS_RGB;
  } else {
    jpeg_destroy_decompress(&cinfo);
    error = "unsupported JPEG color space";
    return false;
  }
  jpeg_start_decompress(&cinfo);
  height = cinfo.output_height;
  width = cinfo.output_width;
  channels = static_cast<std::size_t>(cinfo.output_components);
  raw.resize(height * width * channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = raw.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

ImageBuffer decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name) {
  std::vector<unsigned char> raw;
  std::size_t height = 0, width = 0, channels = 0;
  std::string error;
  if (!decode_jpeg_raw(bytes, raw, height, width, channels, error)) {
    throw Error(ErrorCode::kUnsupportedFormat, name + ": " + error);
  }
  return from_bytes(height, width, channels, channels, raw);
}

bool has_prefix(const std::vector<unsigned char>& bytes,
                std::initializer_list<unsigned char> magic) {
  if (bytes.size() < magic.size()) return false;
  return std::equal(magic.begin(), magic.end(), bytes.begin());
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string name = path.string();
  if (has_prefix(bytes, {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A})) {
    return decode_png(bytes, name);
  }
  if (has_prefix(bytes, {0xFF, 0xD8, 0xFF})) {
    return decode_jpeg(bytes, name);
  }
  throw Error(ErrorCode::kUnsupportedFormat, name + ": not a PNG or JPEG file");
}

std::vector<unsigned char> encode_png(const ImageBuffer& img) {
  const auto values = img.values();
  std::vector<unsigned char> raw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    // std::round is half-away-from-zero.
    raw[i] = static_cast<unsigned char>(std::round(values[i] * 255.0));
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = img.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  png_alloc_size_t size = 0;
  if (!png_image_write_get_memory_size(image, size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + image.message);
  }
  std::vector<unsigned char> out(size);
  if (!png_image_write_to_memory(&image, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::kIo, std::string("PNG encode failed: ") + image.message);
  }
  out.resize(size);
  return out;
}

void save_image(const ImageBuffer& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace noisecal
