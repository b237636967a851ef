#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "costi/interval_data.hpp"

namespace costi {

/// Maps dataset timestamps onto the internal time axis used by the sweep.
///
/// The identity base keeps timestamps as they are (integer-timestamp data, or
/// direct use of the change-list API). The quantized base snaps timestamps to
/// an integer grid with `tick` time units per step, so every change time,
/// shifted time and duration on the internal axis is an exact integer.
struct TimeBase {
  double tick = 1.0;
  bool quantized = false;

  static TimeBase identity() { return {}; }
  /// Grid of 2^bits ticks across [0, t_max].
  static TimeBase quantized_to(double t_max, int bits);

  double to_internal(double t) const;
  double to_time(double internal) const { return internal * tick; }

  friend bool operator==(const TimeBase&, const TimeBase&) = default;
};

/// A change of one channel's value. `tap` is 0 in an undilated list.
struct ChangePoint {
  double time = 0.0;
  double delta = 0.0;
  std::uint32_t channel = 0;
  std::uint32_t tap = 0;

  friend bool operator==(const ChangePoint&, const ChangePoint&) = default;
};

/// Sorted change points of one sequence.
struct ChangeList {
  std::vector<ChangePoint> entries;
  /// Sum over channels of the largest |value| present on the channel. Scales
  /// the tie tolerance of the positivity test.
  double amplitude = 0.0;
};

/// All taps of one sequence at one dilation, sorted by time. Equal times keep
/// (tap, position in the source list) order.
struct DilatedList {
  std::vector<ChangePoint> entries;
  double dilation = 0.0;
  std::uint32_t taps = 0;
  double amplitude = 0.0;
};

inline constexpr std::uint32_t kDefaultTaps = 9;

/// Emits (start, +v) and (end, -v) per interval, coalesces equal
/// (time, channel) deltas, drops zero deltas, sorts by time then channel.
ChangeList build_change_list(const IntervalSequence& seq,
                             const TimeBase& base = TimeBase::identity());

/// K-way merge of the K copies of `base_list` shifted by dilation * k.
/// Throws costi::Error when dilation <= 0 or taps == 0.
DilatedList dilate_and_merge(const ChangeList& base_list, double dilation,
                             std::uint32_t taps = kDefaultTaps);

/// Value of one channel at time t obtained by prefix-summing its deltas
/// (half-open semantics: a change at t is already in effect at t).
double value_at(const ChangeList& list, std::uint32_t channel, double t);

}  // namespace costi
