#include "synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <unistd.h>

namespace noisecal::testing {
namespace {

// Bilinear value noise with a (cells+1)^2 lattice spanning the image.
std::vector<double> value_noise(std::size_t height, std::size_t width, std::size_t cells,
                                CounterStream& stream) {
  std::vector<double> lattice((cells + 1) * (cells + 1));
  for (double& v : lattice) v = stream.uniform() * 2.0 - 1.0;
  std::vector<double> out(height * width);
  for (std::size_t y = 0; y < height; ++y) {
    const double gy = static_cast<double>(y) / static_cast<double>(height) * static_cast<double>(cells);
    const auto y0 = static_cast<std::size_t>(gy);
    const double ty = gy - static_cast<double>(y0);
    for (std::size_t x = 0; x < width; ++x) {
      const double gx = static_cast<double>(x) / static_cast<double>(width) * static_cast<double>(cells);
      const auto x0 = static_cast<std::size_t>(gx);
      const double tx = gx - static_cast<double>(x0);
      const double a = lattice[y0 * (cells + 1) + x0];
      const double b = lattice[y0 * (cells + 1) + x0 + 1];
      const double c = lattice[(y0 + 1) * (cells + 1) + x0];
      const double d = lattice[(y0 + 1) * (cells + 1) + x0 + 1];
      out[y * width + x] = (a * (1 - tx) + b * tx) * (1 - ty) + (c * (1 - tx) + d * tx) * ty;
    }
  }
  return out;
}

std::vector<double> fractal_field(std::size_t height, std::size_t width, CounterStream& stream) {
  std::vector<double> field(height * width, 0.0);
  double amplitude = 1.0;
  const std::size_t max_cells = std::max<std::size_t>(2, std::min(height, width) / 2);
  for (std::size_t cells = 2; cells <= max_cells; cells *= 2) {
    const auto octave = value_noise(height, width, cells, stream);
    for (std::size_t i = 0; i < field.size(); ++i) field[i] += amplitude * octave[i];
    amplitude *= 0.5;
  }
  return field;
}

}  // namespace

ImageBuffer natural_image(std::size_t height, std::size_t width, std::size_t channels, Seed seed) {
  CounterStream stream(seed, 0);
  auto luma = fractal_field(height, width, stream);

  const std::size_t shapes = 2 + stream.uniform_index(4);
  for (std::size_t s = 0; s < shapes; ++s) {
    const double level = stream.uniform() * 2.0 - 1.0;
    const double cy = stream.uniform() * static_cast<double>(height);
    const double cx = stream.uniform() * static_cast<double>(width);
    const double r = (0.08 + 0.25 * stream.uniform()) * static_cast<double>(std::min(height, width));
    const bool disk = stream.uniform() < 0.5;
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = static_cast<double>(y) - cy;
        const double dx = static_cast<double>(x) - cx;
        const bool inside = disk ? dx * dx + dy * dy <= r * r
                                 : std::abs(dx) <= r && std::abs(dy) <= 0.6 * r;
        if (inside) luma[y * width + x] = 0.4 * luma[y * width + x] + 0.8 * level;
      }
    }
  }

  const auto [lo_it, hi_it] = std::minmax_element(luma.begin(), luma.end());
  const double lo = *lo_it;
  const double span = std::max(1e-12, *hi_it - lo);
  const double floor = 0.02 + 0.2 * stream.uniform();
  const double ceil = 0.7 + 0.28 * stream.uniform();

  std::vector<double> chroma;
  std::array<double, 3> tint{};
  if (channels == 3) {
    chroma = fractal_field(height, width, stream);
    for (double& t : tint) t = 0.15 * (stream.uniform() * 2.0 - 1.0);
  }
  std::vector<double> values(height * width * channels);
  for (std::size_t p = 0; p < height * width; ++p) {
    const double l = floor + (ceil - floor) * (luma[p] - lo) / span;
    for (std::size_t c = 0; c < channels; ++c) {
      double v = l;
      if (channels == 3) v += tint[c] * (0.5 + 0.5 * chroma[p]);
      v = std::clamp(v, 0.0, 1.0);
      values[p * channels + c] = std::round(v * 255.0) / 255.0;
    }
  }
  return ImageBuffer({height, width, channels}, std::move(values));
}

std::vector<ImageBuffer> natural_corpus(std::size_t count, std::size_t height, std::size_t width,
                                        std::size_t channels, Seed seed) {
  std::vector<ImageBuffer> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    corpus.push_back(natural_image(height, width, channels,
                                   derive_seed(seed, "synthetic:" + std::to_string(i))));
  }
  return corpus;
}

ImageBuffer random_image(std::size_t height, std::size_t width, std::size_t channels, Seed seed) {
  std::vector<double> values(height * width * channels);
  CounterStream stream(seed, 0);
  for (double& v : values) v = stream.uniform();
  return ImageBuffer({height, width, channels}, std::move(values));
}

std::vector<std::string> write_corpus(const std::filesystem::path& dir,
                                      const std::vector<ImageBuffer>& images) {
  std::vector<std::string> paths;
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "class%zu/img_%04zu.png", i % 3, i);
    const auto target = dir / name;
    std::filesystem::create_directories(target.parent_path());
    save_image(images[i], target);
    paths.emplace_back(name);
  }
  return paths;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("noisecal_" + tag + "_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter.fetch_add(1)));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace noisecal::testing
