#include "noisecal/random.hpp"

#include <cmath>
#include <numbers>

namespace noisecal {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Poisson via sequential inversion; used for small means.
std::uint64_t poisson_inversion(CounterStream& stream, double lambda) noexcept {
  const double u = stream.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  std::uint64_t k = 0;
  // The cap only matters for u within rounding of 1.
  while (u > cdf && k < 1000) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

// Hormann's transformed rejection with squeeze (PTRS), valid for lambda >= 10.
std::uint64_t poisson_ptrs(CounterStream& stream, double lambda) noexcept {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = stream.uniform() - 0.5;
    const double v = stream.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <=
        -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

}  // namespace

Seed derive_seed(Seed master, std::string_view item_key) {
  // FNV-1a over the key, keyed by the mixed master seed, then finalized.
  std::uint64_t h = 0xCBF29CE484222325ull ^ splitmix64(master.value);
  for (unsigned char byte : item_key) {
    h ^= byte;
    h *= 0x100000001B3ull;
  }
  h ^= static_cast<std::uint64_t>(item_key.size());
  return Seed{splitmix64(h ^ splitmix64(master.value + 0x632BE59BD9B4E019ull))};
}

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) noexcept {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kPhiloxW0;
    key[1] += kPhiloxW1;
  }
  return ctr;
}

CounterStream::CounterStream(Seed seed, std::uint64_t element) noexcept
    : key_{static_cast<std::uint32_t>(seed.value), static_cast<std::uint32_t>(seed.value >> 32)},
      element_(element) {}

std::uint64_t CounterStream::next_u64() noexcept {
  if (buffered_ == 0) {
    buffer_ = philox4x32({static_cast<std::uint32_t>(element_),
                          static_cast<std::uint32_t>(element_ >> 32),
                          static_cast<std::uint32_t>(block_),
                          static_cast<std::uint32_t>(block_ >> 32)},
                         key_);
    ++block_;
    buffered_ = 2;
  }
  const int i = 2 - buffered_;
  --buffered_;
  return (static_cast<std::uint64_t>(buffer_[2 * i]) << 32) | buffer_[2 * i + 1];
}

double CounterStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterStream::uniform_open() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t CounterStream::uniform_index(std::uint64_t n) noexcept {
  const auto index = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return index < n ? index : n - 1;
}

double CounterStream::standard_normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Box-Muller; keeps the sine branch for the next call.
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t CounterStream::poisson(double lambda) noexcept {
  if (!(lambda > 0.0)) return 0;
  return lambda < 10.0 ? poisson_inversion(*this, lambda) : poisson_ptrs(*this, lambda);
}

}  // namespace noisecal
