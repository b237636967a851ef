#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "costi/change_list.hpp"
#include "costi/model.hpp"

namespace costi {

/// Integration range [start, end) on the internal time axis.
struct Window {
  double start = 0.0;
  double end = 0.0;

  bool empty() const { return !(start < end); }
  double length() const { return empty() ? 0.0 : end - start; }
};

/// Padding keeps the middle tap inside [0, t_max]: (4d, t_max + 4d) for nine
/// taps. Without padding every tap stays inside: (8d, t_max).
Window feature_window(double dilation, bool padding, double t_max,
                      std::size_t taps = kKernelLength);

/// Piecewise-constant level of the kernel response minus bias over a window.
struct Trace {
  std::vector<double> values;
  std::vector<double> durations;
  Window window;
};

/// Channel membership lookup for one combo.
class ChannelMask {
 public:
  ChannelMask() = default;
  explicit ChannelMask(std::span<const std::uint32_t> channels);

  bool contains(std::uint32_t channel) const {
    return channel < bits_.size() && bits_[channel] != 0;
  }

 private:
  std::vector<unsigned char> bits_;
};

/// A level counts as positive when level - bias exceeds this tolerance, so
/// levels that equal the bias up to rounding are treated as exact ties
/// (H(0) = 0). `amplitude` bounds the magnitude of a single channel sum.
double tie_tolerance(double bias, double amplitude);

/// Sweeps the merged list, applying every change at one timestamp before any
/// duration accrues, and returns the level pieces covering the window.
/// weights.size() must be >= list.taps.
Trace sweep_trace(const DilatedList& list, std::span<const double> weights,
                  const ChannelMask& channels, double bias, const Window& window);

/// Proportion of the window where the level is positive; 0 for an empty window.
double feature(const DilatedList& list, std::span<const double> weights,
               const ChannelMask& channels, double bias, const Window& window);

using FeatureMatrix = std::vector<std::vector<double>>;

struct TransformReport {
  /// Rows whose last timestamp exceeds the model's t_max.
  std::vector<std::size_t> overflow_rows;
};

/// Parallel kernel: one merged list per (sequence, dilation), one sweep per
/// combo, all biases of the combo read off the same pieces.
FeatureMatrix transform(const Dataset& ds, const FeatureModel& model,
                        TransformReport* report = nullptr);

/// Serial reference: every feature computed independently through
/// dilate_and_merge + feature. Used by tests and the benchmark.
FeatureMatrix transform_serial(const Dataset& ds, const FeatureModel& model);

}  // namespace costi
