#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "costi/featurizer.hpp"

namespace costi {

/// One-vs-rest ridge regression on standardized features.
struct RidgeModel {
  std::vector<double> mean;
  std::vector<double> scale;
  /// weights[j * num_classes + k]: feature j, class k (standardized space).
  std::vector<double> weights;
  std::vector<double> intercepts;
  std::vector<std::string> classes;
  double alpha = 1.0;

  std::size_t num_features() const { return mean.size(); }
  std::size_t num_classes() const { return classes.size(); }
  friend bool operator==(const RidgeModel&, const RidgeModel&) = default;
};

/// Ten log-spaced values from 1e-3 to 1e3.
std::vector<double> default_alphas();

/// Picks alpha from the grid by closed-form leave-one-out squared error.
/// Classes are ordered by first appearance in y.
RidgeModel ridge_fit(const FeatureMatrix& x, const std::vector<std::string>& y,
                     const std::vector<double>& alphas = default_alphas());

/// Per-class scores (rows of x).
std::vector<std::vector<double>> ridge_scores(const RidgeModel& model, const FeatureMatrix& x);

/// argmax of the scores, lowest class index on ties.
std::vector<std::string> ridge_predict(const RidgeModel& model, const FeatureMatrix& x);

}  // namespace costi
