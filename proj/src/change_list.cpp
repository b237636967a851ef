#include "costi/change_list.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "costi/error.hpp"

namespace costi {

TimeBase TimeBase::quantized_to(double t_max, int bits) {
  if (!(t_max > 0.0)) throw Error("time grid needs a positive t_max");
  return TimeBase{std::ldexp(t_max, -bits), true};
}

double TimeBase::to_internal(double t) const {
  if (!quantized) return t;
  return std::nearbyint(t / tick);
}

ChangeList build_change_list(const IntervalSequence& seq, const TimeBase& base) {
  ChangeList out;
  std::vector<ChangePoint> raw;
  raw.reserve(2 * seq.num_events());
  for (std::size_t c = 0; c < seq.channels.size(); ++c) {
    double peak = 0.0;
    for (const Interval& iv : seq.channels[c]) {
      const double s = base.to_internal(iv.start);
      const double e = base.to_internal(iv.end);
      if (!(e > s) || iv.value == 0.0) continue;
      peak = std::max(peak, std::abs(iv.value));
      const auto ch = static_cast<std::uint32_t>(c);
      raw.push_back({s, iv.value, ch, 0});
      raw.push_back({e, -iv.value, ch, 0});
    }
    out.amplitude += peak;
  }
  std::stable_sort(raw.begin(), raw.end(), [](const ChangePoint& a, const ChangePoint& b) {
    return a.time < b.time || (a.time == b.time && a.channel < b.channel);
  });

  out.entries.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size();) {
    ChangePoint merged = raw[i];
    std::size_t j = i + 1;
    for (; j < raw.size() && raw[j].time == merged.time && raw[j].channel == merged.channel; ++j) {
      merged.delta += raw[j].delta;
    }
    if (merged.delta != 0.0) out.entries.push_back(merged);
    i = j;
  }
  return out;
}

DilatedList dilate_and_merge(const ChangeList& base_list, double dilation, std::uint32_t taps) {
  if (!(dilation > 0.0)) throw Error("dilation must be positive");
  if (taps == 0) throw Error("kernel needs at least one tap");

  DilatedList out;
  out.dilation = dilation;
  out.taps = taps;
  out.amplitude = base_list.amplitude;
  const auto& src = base_list.entries;
  out.entries.reserve(src.size() * taps);
  if (src.empty()) return out;

  std::vector<double> shift(taps);
  for (std::uint32_t k = 0; k < taps; ++k) shift[k] = dilation * static_cast<double>(k);

  // Heap of per-tap cursors keyed by (time, tap).
  struct Head {
    double time;
    std::uint32_t tap;
    std::size_t pos;
  };
  auto later = [](const Head& a, const Head& b) {
    return a.time > b.time || (a.time == b.time && a.tap > b.tap);
  };
  std::priority_queue<Head, std::vector<Head>, decltype(later)> heap(later);
  for (std::uint32_t k = 0; k < taps; ++k) heap.push({src[0].time + shift[k], k, 0});

  while (!heap.empty()) {
    Head h = heap.top();
    heap.pop();
    const ChangePoint& cp = src[h.pos];
    out.entries.push_back({h.time, cp.delta, cp.channel, h.tap});
    if (++h.pos < src.size()) {
      h.time = src[h.pos].time + shift[h.tap];
      heap.push(h);
    }
  }
  return out;
}

double value_at(const ChangeList& list, std::uint32_t channel, double t) {
  double v = 0.0;
  for (const ChangePoint& cp : list.entries) {
    if (cp.time > t) break;
    if (cp.channel == channel) v += cp.delta;
  }
  return v;
}

}  // namespace costi
