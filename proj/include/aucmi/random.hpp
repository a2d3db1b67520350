#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace aucmi {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The 64-bit key is the master seed; the upper two counter words hold a
/// stream identifier and the lower two a block index, so any number of
/// independent streams can be addressed without shared state.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;

  Philox4x32(std::uint64_t key, std::uint64_t stream_id) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept;

  /// Raw bijection; exposed for known-answer tests.
  static Block encrypt(Block counter, std::array<std::uint32_t, 2> key) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int position_ = 4;
};

/// Folds a path of identifiers into one 64-bit stream id (SplitMix64 finaliser).
std::uint64_t mix_stream_id(std::initializer_list<std::uint64_t> path,
                            std::uint64_t origin = 0x243F6A8885A308D3ull) noexcept;

/// A random stream with the handful of variates the simulation needs.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
      : RandomStream(seed, mix_stream_id(path), 0) {}

  /// Child stream addressed by (seed, this stream's id, path); independent of
  /// how much of this stream has been consumed.
  RandomStream derive(std::initializer_list<std::uint64_t> path) const {
    return RandomStream(seed_, mix_stream_id(path, id_), 0);
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return normal_(engine_); }
  bool bernoulli(double p) { return uniform() < p; }
  double chi_squared(double df) { return std::chi_squared_distribution<double>(df)(engine_); }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }

  Philox4x32& engine() { return engine_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t id() const { return id_; }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t id, int) : seed_(seed), id_(id), engine_(seed, id) {}

  std::uint64_t seed_;
  std::uint64_t id_;
  Philox4x32 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace aucmi
