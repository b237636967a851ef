#include "costi/raster_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "costi/error.hpp"
#include "costi/featurizer.hpp"

namespace costi {
namespace {

struct PositionRange {
  long long first = 0;
  long long last = -1;  // inclusive

  long long count() const { return last >= first ? last - first + 1 : 0; }
};

// Positions r with r * step inside the feature window, in row units.
PositionRange positions(const RasterMatrix& m, const DiscreteKernel& k) {
  const double taps_span = static_cast<double>((k.weights.size() - 1) * k.dilation);
  const double end_rows = k.t_max / m.step;
  double lo = taps_span;
  double hi = end_rows;
  if (k.padding) {
    lo = taps_span / 2.0;
    hi = end_rows + taps_span / 2.0;
  }
  PositionRange r;
  r.first = static_cast<long long>(std::ceil(lo));
  r.last = static_cast<long long>(std::ceil(hi)) - 1;
  return r;
}

// Tap sums over the position range.
std::vector<double> responses(const RasterMatrix& m, const DiscreteKernel& k, const PositionRange& range) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(range.count()));
  const auto rows = static_cast<long long>(m.rows);
  const auto dil = static_cast<long long>(k.dilation);
  for (long long r = range.first; r <= range.last; ++r) {
    double sum = 0.0;
    for (std::size_t tap = 0; tap < k.weights.size(); ++tap) {
      const long long row = r - dil * static_cast<long long>(tap);
      if (row < 0 || row >= rows) continue;
      double channel_sum = 0.0;
      for (std::uint32_t c : k.channels) {
        if (c < m.channels) channel_sum += m.at(static_cast<std::size_t>(row), c);
      }
      sum += k.weights[tap] * channel_sum;
    }
    out.push_back(sum);
  }
  return out;
}

double proportion_positive(const std::vector<double>& sums, double bias, double amplitude) {
  if (sums.empty()) return 0.0;
  const double tol = tie_tolerance(bias, amplitude);
  std::size_t positive = 0;
  for (double s : sums) {
    if (s - bias > tol) ++positive;
  }
  return static_cast<double>(positive) / static_cast<double>(sums.size());
}

double interval_amplitude(const IntervalSequence& seq) {
  double a = 0.0;
  for (const auto& ch : seq.channels) {
    double peak = 0.0;
    for (const auto& iv : ch) {
      if (iv.end > iv.start) peak = std::max(peak, std::abs(iv.value));
    }
    a += peak;
  }
  return a;
}

}  // namespace

std::size_t raster_rows(double t_max, double step) {
  if (!(step > 0.0)) throw Error("raster step must be positive");
  if (t_max < 0.0) throw Error("raster range must be non-negative");
  return static_cast<std::size_t>(std::floor(t_max / step * (1.0 + 1e-12))) + 1;
}

RasterMatrix rasterize(const IntervalSequence& seq, double step, std::size_t num_rows,
                       std::size_t num_channels) {
  if (!(step > 0.0)) throw Error("raster step must be positive");
  RasterMatrix m;
  m.rows = num_rows;
  m.channels = num_channels;
  m.step = step;
  m.data.assign(num_rows * num_channels, 0.0);
  for (std::size_t c = 0; c < std::min(num_channels, seq.channels.size()); ++c) {
    for (const Interval& iv : seq.channels[c]) {
      auto r = static_cast<std::size_t>(std::max(0.0, std::ceil(iv.start / step) - 1.0));
      while (r < num_rows && static_cast<double>(r) * step < iv.start) ++r;
      for (; r < num_rows && static_cast<double>(r) * step < iv.end; ++r) {
        m.data[r * num_channels + c] = iv.value;
      }
    }
  }
  return m;
}

double discrete_ppv(const RasterMatrix& m, const DiscreteKernel& kernel, double bias) {
  if (kernel.dilation == 0) throw Error("discrete dilation must be at least 1");
  if (kernel.weights.empty()) throw Error("discrete kernel has no weights");
  const PositionRange range = positions(m, kernel);
  return proportion_positive(responses(m, kernel, range), bias, kernel.amplitude);
}

OracleReport oracle_compare(const Dataset& ds, const FeatureModel& model, double step) {
  if (!(step > 0.0)) throw Error("oracle step must be positive");
  const FeatureMatrix continuous = transform(ds, model);
  const auto offsets = model.feature_offsets();

  std::vector<std::size_t> rows_of(model.dilations.size());
  double reach = std::max(ds.max_end(), model.t_max);
  for (std::size_t d = 0; d < model.dilations.size(); ++d) {
    const double dt = model.time_base.to_time(model.dilations[d]);
    rows_of[d] = static_cast<std::size_t>(std::max(1.0, std::nearbyint(dt / step)));
    reach = std::max(reach, model.t_max + 4.0 * static_cast<double>(rows_of[d]) * step);
  }
  const std::size_t rows = raster_rows(reach, step) + 1;

  std::vector<OracleReport> per_row(ds.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const RasterMatrix m = rasterize(ds.sequences[i], step, rows, model.num_channels);
    const double amplitude = interval_amplitude(ds.sequences[i]);
    OracleReport& rep = per_row[i];
    rep.worst_row = i;
    for (std::size_t j = 0; j < model.combos.size(); ++j) {
      const Combo& combo = model.combos[j];
      if (combo.biases.empty()) continue;
      DiscreteKernel k;
      k.weights = model.kernels[combo.kernel].weights;
      k.dilation = rows_of[combo.dilation];
      k.channels = combo.channels;
      k.padding = combo.padding;
      k.t_max = model.t_max;
      k.amplitude = amplitude;
      const auto sums = responses(m, k, positions(m, k));
      for (std::size_t q = 0; q < combo.biases.size(); ++q) {
        const std::size_t col = offsets[j] + q;
        const double diff =
            std::abs(continuous[i][col] - proportion_positive(sums, combo.biases[q], amplitude));
        ++rep.features_compared;
        if (diff > rep.max_discrepancy) {
          rep.max_discrepancy = diff;
          rep.worst_feature = col;
        }
      }
    }
  }

  OracleReport total;
  for (const auto& rep : per_row) {
    total.features_compared += rep.features_compared;
    if (rep.max_discrepancy > total.max_discrepancy) {
      total.max_discrepancy = rep.max_discrepancy;
      total.worst_row = rep.worst_row;
      total.worst_feature = rep.worst_feature;
    }
  }
  return total;
}

}  // namespace costi
