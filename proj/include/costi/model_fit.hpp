#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "costi/interval_data.hpp"
#include "costi/model.hpp"

namespace costi {

/// Float-mode timestamps are snapped to 2^30 ticks across [0, t_max].
inline constexpr int kTimeGridBits = 30;

/// All C(9,3) placements of the three -2 weights, lexicographic.
std::vector<Kernel> enumerate_kernels();

struct DilationFit {
  /// Geometric grid on the internal axis before rounding.
  std::vector<double> grid;
  /// Grid used by the model: rounded to integers, minimum 1, duplicates kept.
  std::vector<double> dilations;
  bool integer_mode = false;
  TimeBase time_base;
  double d_min = 0.0;  // time units
  double t_max = 0.0;  // time units
};

/// Dilations spaced evenly in log scale over [d_min, t_max / 8], where d_min
/// is the smallest gap between distinct change times within one training
/// sequence. Falls back to the single dilation d_min (with a warning) when
/// d_min >= t_max / 8.
DilationFit fit_dilations(const Dataset& train, std::size_t num_dilations = 32);

/// Distributes num_features biases over num_kernels * num_dilations combos
/// (dilation-major order) and draws each combo's channel subset and padding.
std::vector<Combo> assign_combos(std::size_t num_features, std::size_t num_dilations,
                                 std::size_t num_channels, std::uint64_t seed,
                                 std::size_t num_kernels = kNumKernels);

/// Smallest value whose cumulative duration (values sorted ascending) reaches
/// q * total duration.
double weighted_quantile(std::span<const double> values, std::span<const double> durations,
                         double q);

/// Fills combo biases from duration-weighted random quantiles of the
/// no-padding trace of one random training sequence per combo.
void fit_biases(const Dataset& train, FeatureModel& model);

struct FitConfig {
  std::size_t num_features = 10000;
  std::size_t num_dilations = 32;
  std::uint64_t seed = 0;
};

FeatureModel fit(const Dataset& train, const FitConfig& config);

}  // namespace costi
