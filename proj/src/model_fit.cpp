#include "costi/model_fit.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "costi/error.hpp"
#include "costi/featurizer.hpp"
#include "costi/rng.hpp"

namespace costi {

std::size_t FeatureModel::num_features() const {
  std::size_t m = 0;
  for (const auto& c : combos) m += c.biases.size();
  return m;
}

std::vector<std::size_t> FeatureModel::feature_offsets() const {
  std::vector<std::size_t> offsets(combos.size() + 1, 0);
  for (std::size_t j = 0; j < combos.size(); ++j) offsets[j + 1] = offsets[j] + combos[j].biases.size();
  return offsets;
}

std::vector<Kernel> enumerate_kernels() {
  std::vector<Kernel> kernels;
  kernels.reserve(kNumKernels);
  for (std::uint8_t a = 0; a < kKernelLength; ++a) {
    for (std::uint8_t b = a + 1; b < kKernelLength; ++b) {
      for (std::uint8_t c = b + 1; c < kKernelLength; ++c) {
        Kernel k;
        k.weights.fill(1.0);
        k.weights[a] = k.weights[b] = k.weights[c] = -2.0;
        k.negative = {a, b, c};
        kernels.push_back(k);
      }
    }
  }
  return kernels;
}

DilationFit fit_dilations(const Dataset& train, std::size_t num_dilations) {
  if (num_dilations == 0) throw Error("need at least one dilation");
  DilationFit fit;
  fit.t_max = train.max_end();
  if (!(fit.t_max > 0.0)) throw Error("training data has no positive timestamps (t_max <= 0)");
  fit.integer_mode = all_timestamps_integral(train);
  fit.time_base = fit.integer_mode ? TimeBase::identity() : TimeBase::quantized_to(fit.t_max, kTimeGridBits);

  double d_min = std::numeric_limits<double>::infinity();
  for (const auto& seq : train.sequences) {
    const ChangeList list = build_change_list(seq, fit.time_base);
    for (std::size_t i = 1; i < list.entries.size(); ++i) {
      const double gap = list.entries[i].time - list.entries[i - 1].time;
      if (gap > 0.0) d_min = std::min(d_min, gap);
    }
  }
  if (!std::isfinite(d_min)) {
    throw Error("training data needs at least two distinct change times in one sequence");
  }
  fit.d_min = fit.time_base.to_time(d_min);

  const double hi = fit.time_base.to_internal(fit.t_max) / 8.0;
  if (d_min >= hi || num_dilations == 1) {
    if (d_min >= hi) warn("smallest gap is not below t_max / 8; using the single dilation d_min");
    fit.grid = {d_min};
  } else {
    const double log_lo = std::log(d_min);
    const double log_hi = std::log(hi);
    const double last = static_cast<double>(num_dilations - 1);
    fit.grid.resize(num_dilations);
    for (std::size_t i = 0; i < num_dilations; ++i) {
      fit.grid[i] = std::exp(log_lo + (static_cast<double>(i) / last) * (log_hi - log_lo));
    }
    fit.grid.front() = d_min;
    fit.grid.back() = hi;
  }
  fit.dilations.reserve(fit.grid.size());
  for (double d : fit.grid) fit.dilations.push_back(std::max(1.0, std::nearbyint(d)));
  return fit;
}

std::vector<Combo> assign_combos(std::size_t num_features, std::size_t num_dilations,
                                 std::size_t num_channels, std::uint64_t seed,
                                 std::size_t num_kernels) {
  if (num_channels == 0) throw Error("need at least one channel");
  const std::size_t total = num_kernels * num_dilations;
  if (total == 0) throw Error("need at least one kernel and one dilation");
  if (num_features < total) {
    warn("only " + std::to_string(num_features) + " features for " + std::to_string(total) +
         " kernel/dilation combinations; some combinations get no bias");
  }
  const std::size_t per_combo = num_features / total;
  const std::size_t remainder = num_features % total;
  const std::size_t max_channels = std::min<std::size_t>(num_channels, kKernelLength);
  const double max_exponent = std::log2(static_cast<double>(max_channels) + 1.0);

  std::vector<Combo> combos(total);
  for (std::size_t j = 0; j < total; ++j) {
    Combo& c = combos[j];
    c.dilation = static_cast<std::uint32_t>(j / num_kernels);
    c.kernel = static_cast<std::uint32_t>(j % num_kernels);
    // Spread the remainder evenly across the combo order.
    const bool extra = (j + 1) * remainder / total > j * remainder / total;
    c.biases.assign(per_combo + (extra ? 1 : 0), 0.0);
    c.padding = (c.kernel + c.dilation) % 2 == 1;

    Rng rng(seed, Stream::kSubset, j);
    auto count = static_cast<std::size_t>(std::exp2(rng.uniform() * max_exponent));
    count = std::clamp<std::size_t>(count, 1, max_channels);
    for (std::size_t ch : rng.sample_without_replacement(num_channels, count)) {
      c.channels.push_back(static_cast<std::uint32_t>(ch));
    }
    std::sort(c.channels.begin(), c.channels.end());
  }
  return combos;
}

double weighted_quantile(std::span<const double> values, std::span<const double> durations,
                         double q) {
  if (values.empty()) throw Error("weighted quantile of an empty sample");
  if (values.size() != durations.size()) throw Error("values and durations differ in length");
  if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile level must lie in [0, 1]");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total = 0.0;
  for (double d : durations) total += d;
  if (!(total > 0.0)) throw Error("weighted quantile needs a positive total duration");
  const double target = q * total;
  double cumulative = 0.0;
  for (std::size_t i : order) {
    cumulative += durations[i];
    if (cumulative >= target) return values[i];
  }
  return values[order.back()];
}

void fit_biases(const Dataset& train, FeatureModel& model) {
  if (train.size() == 0) throw Error("cannot fit biases without training data");
  std::vector<ChangeList> lists(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    lists[i] = build_change_list(train.sequences[i], model.time_base);
  }
  const double t_max = model.t_max_internal();
  std::atomic<std::size_t> empty_windows{0};
  const auto num_combos = static_cast<std::ptrdiff_t>(model.combos.size());

#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t jj = 0; jj < num_combos; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    Combo& combo = model.combos[j];
    if (combo.biases.empty()) continue;
    Rng rng(model.seed, Stream::kBias, j);
    const std::size_t example = rng.index(train.size());
    const double d = model.dilations[combo.dilation];
    const Window w = feature_window(d, false, t_max);
    if (w.empty()) {
      std::fill(combo.biases.begin(), combo.biases.end(), 0.0);
      ++empty_windows;
      continue;
    }
    const DilatedList merged = dilate_and_merge(lists[example], d, kKernelLength);
    const Trace trace =
        sweep_trace(merged, model.kernels[combo.kernel].weights, ChannelMask(combo.channels), 0.0, w);
    for (double& bias : combo.biases) {
      bias = weighted_quantile(trace.values, trace.durations, rng.uniform_open());
    }
  }
  if (empty_windows > 0) {
    warn(std::to_string(empty_windows.load()) +
         " combination(s) have an empty no-padding window; their biases default to 0");
  }
}

FeatureModel fit(const Dataset& train, const FitConfig& config) {
  if (train.labels.size() != train.sequences.size()) throw Error("labels do not match sequences");
  if (train.classes().size() < 2) throw Error("fitting needs at least 2 distinct classes");
  if (train.num_channels == 0) throw Error("training data has no channels");
  if (config.num_features == 0) throw Error("need at least one feature");

  FeatureModel model;
  model.kernels = enumerate_kernels();
  const DilationFit dil = fit_dilations(train, config.num_dilations);
  model.dilations = dil.dilations;
  model.t_max = dil.t_max;
  model.d_min = dil.d_min;
  model.integer_mode = dil.integer_mode;
  model.time_base = dil.time_base;
  model.num_channels = train.num_channels;
  model.seed = config.seed;
  model.combos = assign_combos(config.num_features, model.dilations.size(), train.num_channels,
                               config.seed, model.kernels.size());
  fit_biases(train, model);
  return model;
}

}  // namespace costi
