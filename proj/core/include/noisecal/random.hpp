#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace noisecal {

struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(Seed, Seed) = default;
};

/// Stable 64-bit hash of (master, key). Independent of call order, so every
/// dataset item can derive its own stream without coordination.
Seed derive_seed(Seed master, std::string_view item_key);

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Pure: output depends only on counter and key.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Deterministic random stream for one element (pixel, pixel-channel or
/// image) under a seed. Draw j of element e is philox(key=seed, ctr=(e, j)),
/// so streams of different elements never overlap and can be consumed in
/// any order or in parallel.
class CounterStream {
 public:
  CounterStream(Seed seed, std::uint64_t element) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on (0, 1); never returns 0.
  double uniform_open() noexcept;
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;
  double standard_normal() noexcept;
  std::uint64_t poisson(double lambda) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t element_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace noisecal
