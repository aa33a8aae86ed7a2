#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "noisecal/noisecal.hpp"

namespace {

using namespace noisecal;

ImageBuffer gradient(std::size_t side, std::size_t channels) {
  std::vector<double> values(side * side * channels);
  CounterStream stream(Seed{1}, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double base = static_cast<double>(i % side) / static_cast<double>(side);
    values[i] = 0.8 * base + 0.2 * stream.uniform();
  }
  return ImageBuffer({side, side, channels}, std::move(values));
}

void BM_Ssim(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto a = gradient(side, 3);
  const auto b = apply_gaussian(a, 0.01, Seed{2});
  for (auto _ : state) benchmark::DoNotOptimize(ssim(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(side * side));
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256)->Arg(512);

void BM_ApplyNoise(benchmark::State& state) {
  const auto kind = kAllNoiseKinds[static_cast<std::size_t>(state.range(0))];
  const double magnitude[] = {0.0016, 0.0054, 0.0134, 0.0035, 0.4753};
  const auto img = gradient(256, 3);
  const NoiseSpec spec{kind, magnitude[state.range(0)]};
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(apply_noise(img, spec, Seed{++seed}));
  state.SetLabel(std::string(to_string(kind)));
  state.SetItemsProcessed(state.iterations() * 256 * 256 * 3);
}
BENCHMARK(BM_ApplyNoise)->DenseRange(0, 4);

void BM_CorpusMssim(benchmark::State& state) {
  std::vector<ImageBuffer> corpus;
  for (int i = 0; i < 32; ++i) corpus.push_back(gradient(64, 3));
  const auto jobs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(corpus_mssim(corpus, {NoiseKind::kGaussian, 0.0016}, Seed{3}, {}, jobs));
  }
}
BENCHMARK(BM_CorpusMssim)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
