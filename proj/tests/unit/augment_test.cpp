#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "fixtures.hpp"
#include "noisecal/augment.hpp"
#include "noisecal/dataset.hpp"
#include "noisecal/error.hpp"
#include "noisecal/metrics.hpp"
#include "noisecal/serialization.hpp"
#include "synthetic.hpp"

namespace noisecal {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

AugmentPolicy single(NoiseKind kind, double magnitude, double passthrough = 0.0) {
  AugmentPolicy p;
  p.mode = NoiseSpec{kind, magnitude};
  p.passthrough_probability = passthrough;
  return p;
}

std::map<std::string, std::vector<unsigned char>> tree_bytes(const fs::path& dir) {
  std::map<std::string, std::vector<unsigned char>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).generic_string()] = testing::read_bytes(e.path());
    }
  }
  return files;
}

TEST(Policy, Validation) {
  EXPECT_NO_THROW(validate(single(NoiseKind::kGaussian, 0.01)));
  EXPECT_THROW(validate(single(NoiseKind::kSaltPepper, 2.0)), Error);
  EXPECT_THROW(validate(single(NoiseKind::kGaussian, 0.01, 1.5)), Error);
  AugmentPolicy empty;
  empty.mode = Mixture{};
  EXPECT_THROW(validate(empty), Error);
  AugmentPolicy weighted;
  weighted.mode = Mixture{{{NoiseKind::kGaussian, 0.01}, {NoiseKind::kSpeckle, 0.02}},
                          std::vector<double>{0.5, 0.4}};
  EXPECT_THROW(validate(weighted), Error);
  std::get<Mixture>(weighted.mode).weights = std::vector<double>{0.5};
  EXPECT_THROW(validate(weighted), Error);
  std::get<Mixture>(weighted.mode).weights = std::vector<double>{0.25, 0.75};
  EXPECT_NO_THROW(validate(weighted));
}

TEST(ChooseSpec, PassthroughExtremes) {
  const auto never = single(NoiseKind::kGaussian, 0.01, 0.0);
  const auto always = single(NoiseKind::kGaussian, 0.01, 1.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_TRUE(choose_spec(never, Seed{s}).has_value());
    EXPECT_FALSE(choose_spec(always, Seed{s}).has_value());
  }
}

TEST(ChooseSpec, MixtureFrequenciesFollowWeights) {
  AugmentPolicy p;
  p.mode = Mixture{{{NoiseKind::kGaussian, 0.01}, {NoiseKind::kSpeckle, 0.02},
                    {NoiseKind::kOcclusion, 0.3}},
                   std::vector<double>{0.2, 0.3, 0.5}};
  p.passthrough_probability = 0.25;
  std::map<std::optional<NoiseKind>, double> counts;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    const auto spec = choose_spec(p, derive_seed(Seed{1}, std::to_string(i)));
    counts[spec ? std::optional(spec->kind) : std::nullopt] += 1.0 / n;
  }
  EXPECT_NEAR(counts[std::nullopt], 0.25, 0.015);
  EXPECT_NEAR(counts[NoiseKind::kGaussian], 0.75 * 0.2, 0.015);
  EXPECT_NEAR(counts[NoiseKind::kSpeckle], 0.75 * 0.3, 0.015);
  EXPECT_NEAR(counts[NoiseKind::kOcclusion], 0.75 * 0.5, 0.015);
}

TEST(Dataset, WalkSortsAndFiltersByExtension) {
  TempDir dir("dataset");
  fs::create_directories(dir.path() / "b");
  fs::create_directories(dir.path() / "a" / "deep");
  const auto img = testing::natural_image(12, 12, 1, Seed{1});
  save_image(img, dir.path() / "b" / "x.PNG");
  save_image(img, dir.path() / "a" / "deep" / "y.png");
  std::vector<std::uint8_t> raw(12 * 12 * 3, 90);
  testing::write_jpeg(dir.path() / "a" / "z.JPEG", 12, 12, 3, raw);
  testing::write_text(dir.path() / "a" / "readme.txt", "hi");
  const auto listing = walk_dataset(dir.path());
  ASSERT_EQ(listing.entries.size(), 3u);
  EXPECT_EQ(listing.entries[0].relative, "a/deep/y.png");
  EXPECT_EQ(listing.entries[1].relative, "a/z.JPEG");
  EXPECT_EQ(listing.entries[2].relative, "b/x.PNG");
  EXPECT_THROW(walk_dataset(dir.path() / "missing"), Error);
}

TEST(Dataset, LoadCorpusLimitsAndSkips) {
  TempDir dir("dataset");
  const auto images = testing::natural_corpus(6, 16, 16, 3, Seed{2});
  testing::write_corpus(dir.path(), images);
  testing::write_text(dir.path() / "broken.png", "nope");
  const auto all = load_corpus(dir.path());
  EXPECT_EQ(all.images.size(), 6u);
  ASSERT_EQ(all.skipped.size(), 1u);
  EXPECT_NE(all.skipped[0].find("broken.png"), std::string::npos);

  const auto first = load_corpus(dir.path(), 3);
  ASSERT_EQ(first.paths.size(), 3u);
  EXPECT_TRUE(std::is_sorted(first.paths.begin(), first.paths.end()));

  const auto a = load_corpus(dir.path(), 3, CorpusSampling::kUniform, Seed{4});
  const auto b = load_corpus(dir.path(), 3, CorpusSampling::kUniform, Seed{4});
  EXPECT_EQ(a.paths, b.paths);
  EXPECT_EQ(a.paths.size(), 3u);
}

class AugmentFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    images_ = testing::natural_corpus(10, 20, 24, 3, Seed{9});
    testing::write_corpus(root_.path(), images_);
  }
  TempDir root_{"aug_in"};
  TempDir out_{"aug_out"};
  std::vector<ImageBuffer> images_;
};

TEST_F(AugmentFixture, MirrorsTreeAndWritesManifest) {
  const auto manifest =
      augment_dataset(root_.path(), out_.path(), single(NoiseKind::kGaussian, 0.01), Seed{42});
  EXPECT_EQ(manifest.header.processed, 10u);
  EXPECT_TRUE(manifest.header.skipped.empty());
  ASSERT_EQ(manifest.records.size(), 10u);
  EXPECT_EQ(manifest.header.kind_counts.at("gaussian"), 10u);
  for (const auto& rec : manifest.records) {
    EXPECT_EQ(rec.out, rec.in);  // already .png
    ASSERT_TRUE(fs::exists(out_.path() / rec.out));
    const auto in = load_image(root_.path() / rec.in);
    const auto out = load_image(out_.path() / rec.out);
    EXPECT_EQ(out, quantize_8bit(apply_noise(in, *rec.spec, rec.seed)));
    EXPECT_EQ(rec.seed, derive_seed(Seed{42}, rec.in));
    EXPECT_EQ(rec.ssim, ssim(in, out));
    EXPECT_EQ(rec.psnr_db, psnr(in, out));
  }
  const auto text = read_text_file(out_.path() / kManifestFileName);
  EXPECT_EQ(manifest_to_jsonl(manifest), text);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
}

TEST_F(AugmentFixture, OutputsAreByteIdenticalAcrossRunsAndJobCounts) {
  TempDir other("aug_out2");
  AugmentOptions four;
  four.jobs = 4;
  AugmentPolicy mix;
  mix.mode = Mixture{{{NoiseKind::kGaussian, 0.01}, {NoiseKind::kSaltPepper, 0.05},
                      {NoiseKind::kPoisson, 0.01}, {NoiseKind::kOcclusion, 0.3}},
                     std::nullopt};
  mix.passthrough_probability = 0.2;
  augment_dataset(root_.path(), out_.path(), mix, Seed{3});
  augment_dataset(root_.path(), other.path(), mix, Seed{3}, four);
  auto a = tree_bytes(out_.path());
  auto b = tree_bytes(other.path());
  // The header records the output-independent input root, so manifests match too.
  EXPECT_EQ(a, b);
}

TEST_F(AugmentFixture, PassthroughCopiesAreClean) {
  const auto manifest = augment_dataset(root_.path(), out_.path(),
                                        single(NoiseKind::kGaussian, 0.01, 1.0), Seed{1});
  for (const auto& rec : manifest.records) {
    EXPECT_FALSE(rec.spec.has_value());
    EXPECT_TRUE(std::isinf(rec.psnr_db));
    EXPECT_EQ(rec.ssim, 1.0);
  }
  EXPECT_EQ(manifest.header.kind_counts.at("clean"), 10u);
  EXPECT_FALSE(manifest.header.mean_psnr_db.has_value());
  EXPECT_EQ(manifest.header.excluded_infinite_psnr, 10u);
}

TEST_F(AugmentFixture, SkipsUnreadableInputs) {
  testing::write_text(root_.path() / "zz_bad.jpg", "garbage");
  const auto manifest =
      augment_dataset(root_.path(), out_.path(), single(NoiseKind::kSpeckle, 0.02), Seed{1});
  EXPECT_EQ(manifest.header.processed, 10u);
  ASSERT_EQ(manifest.header.skipped.size(), 1u);
  EXPECT_EQ(manifest.header.skipped[0].in, "zz_bad.jpg");
  EXPECT_FALSE(fs::exists(out_.path() / "zz_bad.png"));
}

TEST_F(AugmentFixture, JpegInputsBecomePng) {
  std::vector<std::uint8_t> raw(16 * 16 * 3, 100);
  testing::write_jpeg(root_.path() / "photo.jpg", 16, 16, 3, raw);
  const auto manifest =
      augment_dataset(root_.path(), out_.path(), single(NoiseKind::kGaussian, 0.001), Seed{1});
  const auto it = std::find_if(manifest.records.begin(), manifest.records.end(),
                               [](const ManifestRecord& r) { return r.in == "photo.jpg"; });
  ASSERT_NE(it, manifest.records.end());
  EXPECT_EQ(it->out, "photo.png");
  EXPECT_TRUE(fs::exists(out_.path() / "photo.png"));
}

TEST_F(AugmentFixture, RejectsOutputInsideInput) {
  EXPECT_THROW(
      augment_dataset(root_.path(), root_.path() / "noisy", single(NoiseKind::kGaussian, 0.01),
                      Seed{1}),
      Error);
  EXPECT_THROW(
      augment_dataset(root_.path(), root_.path(), single(NoiseKind::kGaussian, 0.01), Seed{1}),
      Error);
}

TEST_F(AugmentFixture, ManifestRoundTripsAndVerifies) {
  AugmentPolicy mix;
  mix.mode = Mixture{{{NoiseKind::kSpeckle, 0.05}, {NoiseKind::kOcclusion, 0.4}},
                     std::vector<double>{0.3, 0.7}};
  mix.passthrough_probability = 0.1;
  const auto manifest = augment_dataset(root_.path(), out_.path(), mix, Seed{8});
  const auto back = read_manifest(out_.path() / kManifestFileName);
  EXPECT_EQ(manifest_to_jsonl(back), manifest_to_jsonl(manifest));
  EXPECT_EQ(back.header.policy, mix);

  VerifyOptions all;
  all.fraction = 1.0;
  const auto report = verify_manifest(out_.path(), back, all);
  EXPECT_TRUE(report.ok());
  EXPECT_EQ(report.checked, 10u);
  EXPECT_EQ(report.records, 10u);
}

TEST_F(AugmentFixture, VerifyDetectsTampering) {
  const auto manifest =
      augment_dataset(root_.path(), out_.path(), single(NoiseKind::kGaussian, 0.02), Seed{8});
  fs::remove(out_.path() / manifest.records[0].out);
  save_image(images_[0], out_.path() / manifest.records[1].out);
  VerifyOptions all;
  all.fraction = 1.0;
  const auto report = verify_manifest(out_.path(), manifest, all);
  EXPECT_FALSE(report.ok());
  ASSERT_EQ(report.missing.size(), 1u);
  EXPECT_EQ(report.missing[0], manifest.records[0].out);
  EXPECT_FALSE(report.mismatches.empty());
}

TEST(Manifest, RejectsCorruptText) {
  EXPECT_THROW(manifest_from_jsonl(""), Error);
  EXPECT_THROW(manifest_from_jsonl("{\"header\":{}}\n"), Error);
  EXPECT_THROW(manifest_from_jsonl("not json\n"), Error);
}

}  // namespace
}  // namespace noisecal
