#include "costi/featurizer.hpp"

#include <algorithm>
#include <cmath>

#include "costi/error.hpp"

namespace costi {
namespace {

// Sum of |w| for the -2/+1 kernel family.
constexpr double kKernelAbsWeight = 18.0;
constexpr double kTieRelative = 1e-10;

// Calls emit(level, start, end) for every piece of the window, in time order.
// `level` is the kernel response without the bias.
template <typename Emit>
void sweep_pieces(const DilatedList& list, std::span<const double> weights,
                  const ChannelMask& channels, const Window& window, Emit&& emit) {
  if (window.empty()) return;
  const auto& e = list.entries;
  const std::size_t n = e.size();
  double level = 0.0;
  double cursor = window.start;
  // Changes of channels outside the subset are skipped without splitting a
  // piece; a piece is emitted only when time strictly advances, so every
  // change at one timestamp is applied before any duration accrues.
  for (std::size_t i = 0; i < n; ++i) {
    if (!channels.contains(e[i].channel)) continue;
    const double t = e[i].time;
    if (t > cursor) {
      if (t >= window.end) break;
      emit(level, cursor, t);
      cursor = t;
    }
    level += weights[e[i].tap] * e[i].delta;
  }
  if (cursor < window.end) emit(level, cursor, window.end);
}

// Length of the region where level - bias > tol. Adjacent positive pieces
// are measured as one run by its endpoints, so a window that is positive
// throughout yields exactly its own length.
class PositiveRuns {
 public:
  PositiveRuns(double bias, double tol) : bias_(bias), tol_(tol) {}

  void piece(double level, double start) {
    const bool positive = level - bias_ > tol_;
    if (positive && !open_) {
      run_start_ = start;
      open_ = true;
    } else if (!positive && open_) {
      total_ += start - run_start_;
      open_ = false;
    }
  }

  double finish(double end) {
    if (open_) total_ += end - run_start_;
    open_ = false;
    return total_;
  }

 private:
  double bias_;
  double tol_;
  double total_ = 0.0;
  double run_start_ = 0.0;
  bool open_ = false;
};

double proportion(double positive, const Window& w) { return std::min(1.0, positive / (w.end - w.start)); }

void check_weights(const DilatedList& list, std::span<const double> weights) {
  if (weights.size() < list.taps) throw Error("kernel has fewer weights than the list has taps");
}

}  // namespace

Window feature_window(double dilation, bool padding, double t_max, std::size_t taps) {
  const double span = dilation * static_cast<double>(taps - 1);
  if (padding) return {span / 2.0, t_max + span / 2.0};
  return {span, t_max};
}

ChannelMask::ChannelMask(std::span<const std::uint32_t> channels) {
  std::uint32_t hi = 0;
  for (auto c : channels) hi = std::max(hi, c);
  bits_.assign(channels.empty() ? 0 : hi + 1, 0);
  for (auto c : channels) bits_[c] = 1;
}

double tie_tolerance(double bias, double amplitude) {
  return kTieRelative * (std::abs(bias) + kKernelAbsWeight * amplitude);
}

Trace sweep_trace(const DilatedList& list, std::span<const double> weights,
                  const ChannelMask& channels, double bias, const Window& window) {
  check_weights(list, weights);
  Trace trace;
  trace.window = window;
  sweep_pieces(list, weights, channels, window, [&](double level, double start, double end) {
    trace.values.push_back(level - bias);
    trace.durations.push_back(end - start);
  });
  return trace;
}

double feature(const DilatedList& list, std::span<const double> weights,
               const ChannelMask& channels, double bias, const Window& window) {
  check_weights(list, weights);
  if (window.empty()) return 0.0;
  const double tol = tie_tolerance(bias, list.amplitude);
  PositiveRuns runs(bias, tol);
  sweep_pieces(list, weights, channels, window,
               [&](double level, double start, double) { runs.piece(level, start); });
  return proportion(runs.finish(window.end), window);
}

namespace {

void check_compatible(const Dataset& ds, const FeatureModel& model) {
  if (ds.num_channels > model.num_channels) {
    throw Error("dataset has " + std::to_string(ds.num_channels) + " channels, model was fitted on " +
                std::to_string(model.num_channels));
  }
}

}  // namespace

FeatureMatrix transform(const Dataset& ds, const FeatureModel& model, TransformReport* report) {
  check_compatible(ds, model);
  const std::size_t n = ds.size();
  const std::size_t num_combos = model.combos.size();
  const auto offsets = model.feature_offsets();
  const double t_max = model.t_max_internal();

  std::vector<std::vector<std::size_t>> by_dilation(model.dilations.size());
  std::vector<ChannelMask> masks(num_combos);
  std::vector<Window> windows(num_combos);
  for (std::size_t j = 0; j < num_combos; ++j) {
    const Combo& combo = model.combos[j];
    if (combo.biases.empty()) continue;
    by_dilation.at(combo.dilation).push_back(j);
    masks[j] = ChannelMask(combo.channels);
    windows[j] = feature_window(model.dilations[combo.dilation], combo.padding, t_max);
  }

  FeatureMatrix out(n, std::vector<double>(offsets.back(), 0.0));

#pragma omp parallel
  {
    std::vector<double> levels;
    std::vector<double> starts;
#pragma omp for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) {
      const ChangeList base = build_change_list(ds.sequences[i], model.time_base);
      auto& row = out[i];
      for (std::size_t d = 0; d < by_dilation.size(); ++d) {
        if (by_dilation[d].empty()) continue;
        const DilatedList merged = dilate_and_merge(base, model.dilations[d], kKernelLength);
        for (std::size_t j : by_dilation[d]) {
          const Combo& combo = model.combos[j];
          const Window& w = windows[j];
          if (w.empty()) continue;
          levels.clear();
          starts.clear();
          sweep_pieces(merged, model.kernels[combo.kernel].weights, masks[j], w,
                       [&](double level, double start, double) {
                         levels.push_back(level);
                         starts.push_back(start);
                       });
          for (std::size_t q = 0; q < combo.biases.size(); ++q) {
            const double bias = combo.biases[q];
            PositiveRuns runs(bias, tie_tolerance(bias, merged.amplitude));
            for (std::size_t p = 0; p < levels.size(); ++p) runs.piece(levels[p], starts[p]);
            row[offsets[j] + q] = proportion(runs.finish(w.end), w);
          }
        }
      }
    }
  }

  std::vector<std::size_t> overflow;
  for (std::size_t i = 0; i < n; ++i) {
    if (ds.sequences[i].max_end() > model.t_max) overflow.push_back(i);
  }
  if (!overflow.empty()) {
    warn(std::to_string(overflow.size()) +
         " sequence(s) extend past the training t_max; changes after the window are ignored");
  }
  if (report) report->overflow_rows = std::move(overflow);
  return out;
}

FeatureMatrix transform_serial(const Dataset& ds, const FeatureModel& model) {
  check_compatible(ds, model);
  const auto offsets = model.feature_offsets();
  const double t_max = model.t_max_internal();
  FeatureMatrix out(ds.size(), std::vector<double>(offsets.back(), 0.0));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ChangeList base = build_change_list(ds.sequences[i], model.time_base);
    for (std::size_t j = 0; j < model.combos.size(); ++j) {
      const Combo& combo = model.combos[j];
      const double d = model.dilations[combo.dilation];
      const Window w = feature_window(d, combo.padding, t_max);
      const ChannelMask mask(combo.channels);
      for (std::size_t q = 0; q < combo.biases.size(); ++q) {
        const DilatedList merged = dilate_and_merge(base, d, kKernelLength);
        out[i][offsets[j] + q] =
            feature(merged, model.kernels[combo.kernel].weights, mask, combo.biases[q], w);
      }
    }
  }
  return out;
}

}  // namespace costi
