#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "costi/change_list.hpp"

namespace costi {

inline constexpr std::size_t kKernelLength = 9;
inline constexpr std::size_t kNumKernels = 84;

/// Nine taps: three weights of -2 and six of +1.
struct Kernel {
  std::array<double, kKernelLength> weights{};
  std::array<std::uint8_t, 3> negative{};

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

/// One (kernel, dilation) combination and the features it produces.
struct Combo {
  std::uint32_t kernel = 0;
  std::uint32_t dilation = 0;
  std::vector<std::uint32_t> channels;  // sorted, non-empty
  bool padding = false;
  std::vector<double> biases;

  friend bool operator==(const Combo&, const Combo&) = default;
};

/// Fitted transform parameters. Dilations, biases and the windows live on the
/// internal time axis described by `time_base`.
struct FeatureModel {
  std::vector<Kernel> kernels;
  std::vector<double> dilations;  // internal units
  double t_max = 0.0;             // time units
  double d_min = 0.0;             // time units
  bool integer_mode = false;
  TimeBase time_base;
  std::size_t num_channels = 0;
  std::uint64_t seed = 0;
  std::vector<Combo> combos;

  double t_max_internal() const { return time_base.to_internal(t_max); }
  std::size_t num_features() const;
  /// Offset of each combo's first feature column; size combos.size() + 1.
  std::vector<std::size_t> feature_offsets() const;

  friend bool operator==(const FeatureModel&, const FeatureModel&) = default;
};

}  // namespace costi
