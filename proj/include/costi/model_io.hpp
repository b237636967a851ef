#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "costi/featurizer.hpp"
#include "costi/model.hpp"
#include "costi/ridge.hpp"

namespace costi {

inline constexpr int kModelFormatVersion = 1;

struct SavedModel {
  FeatureModel features;
  std::optional<RidgeModel> classifier;
  /// Intensities were replaced by 1 before fitting; apply the same to new data.
  bool binarize = false;
};

/// JSON document; every real is stored as a C99 hexadecimal float string.
void write_model(std::ostream& out, const SavedModel& model);
SavedModel read_model(std::istream& in);
void save_model(const std::string& path, const SavedModel& model);
SavedModel load_model(const std::string& path);

/// CSV with header 0,1,...,m-1 (feature indices) and one row per sequence.
void write_feature_matrix(std::ostream& out, const FeatureMatrix& x);

}  // namespace costi
