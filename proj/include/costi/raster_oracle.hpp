#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "costi/interval_data.hpp"
#include "costi/model.hpp"

namespace costi {

/// M[r, c] = X_c(r * step), rows past a sequence's end are zero.
struct RasterMatrix {
  std::size_t rows = 0;
  std::size_t channels = 0;
  double step = 1.0;
  std::vector<double> data;  // row-major

  double at(std::size_t r, std::size_t c) const { return data[r * channels + c]; }
};

/// Number of rows covering [0, t_max] at the given step: floor(t_max / step) + 1.
std::size_t raster_rows(double t_max, double step);

RasterMatrix rasterize(const IntervalSequence& seq, double step, std::size_t num_rows,
                       std::size_t num_channels);

/// Parameters of one discrete feature. Taps read M[r - dilation * k]; rows
/// outside the matrix read zero.
struct DiscreteKernel {
  std::span<const double> weights;
  std::size_t dilation = 1;  // in rows
  std::span<const std::uint32_t> channels;
  bool padding = false;
  double t_max = 0.0;  // time units, defines the position window
  double amplitude = 0.0;
};

/// Proportion of positions r (r * step inside the feature window) where the
/// tap sum minus bias is positive.
double discrete_ppv(const RasterMatrix& m, const DiscreteKernel& kernel, double bias);

struct OracleReport {
  double max_discrepancy = 0.0;
  std::size_t worst_row = 0;
  std::size_t worst_feature = 0;
  std::size_t features_compared = 0;
};

/// Computes every feature of `ds` through the continuous transform and the
/// raster path at `step`, and reports the largest absolute difference.
OracleReport oracle_compare(const Dataset& ds, const FeatureModel& model, double step);

}  // namespace costi
