#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace costi {

/// Named random streams. Each stream is a std::mt19937_64 whose seed is
/// splitmix64(splitmix64(seed ^ tag) + index); reals are built from the top
/// 53 bits of one engine output so values do not depend on the standard
/// library's distribution implementations.
enum class Stream : std::uint64_t {
  kSubset = 0x5375627365740001ULL,
  kBias = 0x4269617365730003ULL,
  kFold = 0x466f6c6473000004ULL,
  kRepeat = 0x5265706561740005ULL,
  kSynth = 0x53796e7468000006ULL,
};

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index);

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  /// k distinct values from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[index(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace costi
