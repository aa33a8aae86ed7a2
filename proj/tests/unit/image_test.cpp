#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "noisecal/error.hpp"
#include "noisecal/image.hpp"
#include "synthetic.hpp"

namespace noisecal {
namespace {

using testing::TempDir;

ImageBuffer gray(std::size_t h, std::size_t w, std::vector<double> values) {
  return ImageBuffer({h, w, 1}, std::move(values));
}

TEST(ImageBuffer, RejectsValuesOutsideUnitInterval) {
  EXPECT_THROW(gray(1, 1, {1.3}), Error);
  EXPECT_THROW(gray(1, 1, {-0.2}), Error);
  EXPECT_THROW(gray(1, 1, {std::nan("")}), Error);
  EXPECT_NO_THROW(gray(1, 2, {0.0, 1.0}));
}

TEST(ImageBuffer, RejectsBadShapes) {
  EXPECT_THROW(ImageBuffer({0, 3, 1}, {}), Error);
  EXPECT_THROW(ImageBuffer({1, 1, 2}, {0.0, 0.0}), Error);
  EXPECT_THROW(ImageBuffer({2, 2, 1}, {0.0, 0.0, 0.0}), Error);
}

TEST(LoadImage, NormalizesFullScaleAndZero) {
  TempDir dir("image");
  testing::write_png_raw(dir.path() / "white.png", 1, 1, 1, {255});
  testing::write_png_raw(dir.path() / "black.png", 1, 1, 1, {0});
  const auto white = load_image(dir.path() / "white.png");
  const auto black = load_image(dir.path() / "black.png");
  ASSERT_EQ(white.channels(), 1u);
  EXPECT_EQ(white.values()[0], 1.0);
  EXPECT_EQ(black.values()[0], 0.0);
  EXPECT_EQ(white.source_depth(), 8);
}

TEST(LoadImage, DividesRawValuesBy255) {
  TempDir dir("image");
  testing::write_png_raw(dir.path() / "quad.png", 2, 2, 1, {0, 128, 255, 64});
  const auto img = load_image(dir.path() / "quad.png");
  ASSERT_EQ(img.shape(), (ImageShape{2, 2, 1}));
  EXPECT_EQ(img.values()[0], 0.0);
  EXPECT_EQ(img.values()[1], 128.0 / 255.0);
  EXPECT_EQ(img.values()[2], 1.0);
  EXPECT_EQ(img.values()[3], 64.0 / 255.0);
}

TEST(LoadImage, DropsAlphaAndKeepsChannelCount) {
  TempDir dir("image");
  testing::write_png_raw(dir.path() / "ga.png", 1, 2, 2, {10, 0, 200, 255});
  testing::write_png_raw(dir.path() / "rgba.png", 1, 1, 4, {1, 2, 3, 77});
  const auto ga = load_image(dir.path() / "ga.png");
  ASSERT_EQ(ga.channels(), 1u);
  EXPECT_EQ(ga.values()[0], 10.0 / 255.0);
  EXPECT_EQ(ga.values()[1], 200.0 / 255.0);
  const auto rgba = load_image(dir.path() / "rgba.png");
  ASSERT_EQ(rgba.channels(), 3u);
  EXPECT_EQ(rgba.values()[2], 3.0 / 255.0);
}

TEST(LoadImage, ExpandsPaletteToRgb) {
  TempDir dir("image");
  testing::write_png_palette(dir.path() / "pal.png", 1, 2, {255, 0, 0, 0, 0, 255}, {1, 0});
  const auto img = load_image(dir.path() / "pal.png");
  ASSERT_EQ(img.channels(), 3u);
  EXPECT_EQ(img.at(0, 0, 2), 1.0);
  EXPECT_EQ(img.at(0, 1, 0), 1.0);
  EXPECT_EQ(img.at(0, 1, 1), 0.0);
}

TEST(LoadImage, DecodesJpeg) {
  TempDir dir("image");
  std::vector<std::uint8_t> raw(16 * 16 * 3, 128);
  testing::write_jpeg(dir.path() / "flat.jpg", 16, 16, 3, raw, 100);
  const auto img = load_image(dir.path() / "flat.jpg");
  ASSERT_EQ(img.shape(), (ImageShape{16, 16, 3}));
  for (double v : img.values()) EXPECT_NEAR(v, 128.0 / 255.0, 2.0 / 255.0);

  std::vector<std::uint8_t> gray_raw(8 * 8, 40);
  testing::write_jpeg(dir.path() / "gray.jpeg", 8, 8, 1, gray_raw, 100);
  EXPECT_EQ(load_image(dir.path() / "gray.jpeg").channels(), 1u);
}

TEST(LoadImage, ErrorPaths) {
  TempDir dir("image");
  EXPECT_THROW(load_image(dir.path() / "missing.png"), Error);

  testing::write_text(dir.path() / "notes.png", "definitely not an image");
  try {
    load_image(dir.path() / "notes.png");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnsupportedFormat);
  }

  testing::write_png16_raw(dir.path() / "deep.png", 1, 1, {40000});
  EXPECT_THROW(load_image(dir.path() / "deep.png"), Error);

  // A truncated PNG keeps its signature but cannot decode.
  testing::write_png_raw(dir.path() / "ok.png", 4, 4, 1, std::vector<std::uint8_t>(16, 9));
  auto bytes = testing::read_bytes(dir.path() / "ok.png");
  bytes.resize(20);
  testing::write_text(dir.path() / "cut.png", std::string(bytes.begin(), bytes.end()));
  EXPECT_THROW(load_image(dir.path() / "cut.png"), Error);
}

TEST(SaveImage, RoundsHalfAwayFromZero) {
  TempDir dir("image");
  save_image(gray(1, 3, {1.0, 0.5, 0.0}), dir.path() / "out.png");
  std::size_t channels = 0;
  const auto raw = testing::read_png_raw(dir.path() / "out.png", channels);
  ASSERT_EQ(channels, 1u);
  EXPECT_EQ(raw, (std::vector<std::uint8_t>{255, 128, 0}));
}

TEST(SaveImage, UnwritablePathThrows) {
  TempDir dir("image");
  EXPECT_THROW(save_image(gray(1, 1, {0.5}), dir.path() / "no" / "such" / "dir.png"), Error);
}

TEST(SaveImage, RoundTripIsBitIdenticalOnTheByteGrid) {
  TempDir dir("image");
  for (std::uint64_t s = 0; s < 8; ++s) {
    const std::size_t channels = s % 2 == 0 ? 1 : 3;
    const auto img = quantize_8bit(testing::random_image(5 + s, 7, channels, Seed{s}));
    const auto path = dir.path() / ("rt" + std::to_string(s) + ".png");
    save_image(img, path);
    EXPECT_EQ(load_image(path), img) << "seed " << s;
  }
}

TEST(SaveImage, QuantizationErrorIsBounded) {
  TempDir dir("image");
  const auto img = testing::random_image(9, 9, 3, Seed{99});
  save_image(img, dir.path() / "q.png");
  const auto back = load_image(dir.path() / "q.png");
  for (std::size_t i = 0; i < img.values().size(); ++i) {
    EXPECT_LE(std::abs(back.values()[i] - img.values()[i]), 1.0 / 510.0 + 1e-15);
  }
}

TEST(ToLuminance, Examples) {
  const auto g = gray(1, 2, {0.2, 0.7});
  EXPECT_EQ(to_luminance(g), g);
  const ImageBuffer white({1, 1, 3}, {1.0, 1.0, 1.0});
  EXPECT_NEAR(to_luminance(white).values()[0], 1.0, 1e-15);
  const ImageBuffer red({1, 1, 3}, {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(to_luminance(red).values()[0], 0.299);
}

TEST(ToLuminance, StaysInRange) {
  for (std::uint64_t s = 0; s < 16; ++s) {
    const auto luma = to_luminance(testing::random_image(6, 6, 3, Seed{s}));
    for (double v : luma.values()) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Clip, Examples) {
  const auto img = clip({1, 3, 1}, {1.3, -0.2, 0.5});
  EXPECT_EQ(img.values()[0], 1.0);
  EXPECT_EQ(img.values()[1], 0.0);
  EXPECT_EQ(img.values()[2], 0.5);
}

TEST(Clip, IsIdempotent) {
  CounterStream stream(Seed{5}, 0);
  std::vector<double> values(64);
  for (double& v : values) v = stream.uniform() * 3.0 - 1.0;
  const auto once = clip({8, 8, 1}, values);
  EXPECT_EQ(clip(once), once);
  EXPECT_EQ(clip(once.shape(), {once.values().begin(), once.values().end()}), once);
}

}  // namespace
}  // namespace noisecal
