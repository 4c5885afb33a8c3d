#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace netdiff {

/// Mixes a master seed with a path of stream ids (e.g. {cell, rep, purpose})
/// into a 64-bit seed. Distinct paths give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept;

// Stream purposes, used as the last component of a derive_seed path.
namespace stream {
inline constexpr std::uint64_t kGraph = 0x01;
inline constexpr std::uint64_t kCovariates = 0x02;
inline constexpr std::uint64_t kY0 = 0x03;
inline constexpr std::uint64_t kY1 = 0x04;
inline constexpr std::uint64_t kTruth = 0x05;
inline constexpr std::uint64_t kDraws = 0x06;
inline constexpr std::uint64_t kFolds = 0x07;
inline constexpr std::uint64_t kReplication = 0x08;
inline constexpr std::uint64_t kProxy = 0x09;
}  // namespace stream

/// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) noexcept {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based uniforms keyed by node identity: draw r of node `key` is a
/// pure function of (stream, key, r). Results therefore follow nodes under
/// relabeling and do not depend on evaluation order or thread count.
class KeyedUniform {
 public:
  KeyedUniform(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept
      : base_(derive_seed(seed, path)) {}

  std::uint64_t node_state(std::uint64_t key) const noexcept {
    return mix64(base_ ^ mix64(key + 0x2545f4914f6cdd1dULL));
  }

  /// Uniform on [0, 1).
  static double at(std::uint64_t node_state, std::uint64_t counter) noexcept {
    return static_cast<double>(mix64(node_state + (counter + 1) * 0x9e3779b97f4a7c15ULL) >> 11) *
           0x1.0p-53;
  }

  double operator()(std::uint64_t key, std::uint64_t counter) const noexcept {
    return at(node_state(key), counter);
  }

 private:
  std::uint64_t base_;
};

/// Node key for position i: ids[i] when ids are given, otherwise i.
inline std::uint64_t node_key(std::span<const std::uint64_t> ids, std::size_t i) noexcept {
  return ids.empty() ? static_cast<std::uint64_t>(i) : ids[i];
}

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> path)
      : engine_(derive_seed(seed, path)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  engine_type& engine() noexcept { return engine_; }

 private:
  engine_type engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace netdiff
