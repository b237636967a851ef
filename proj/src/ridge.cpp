#include "costi/ridge.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "costi/error.hpp"

namespace costi {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Spectral {
  MatrixXd u;       // n x r left vectors
  VectorXd sq;      // r squared singular values
  MatrixXd v;       // m x r right vectors (primal form only)
  bool dual = false;
};

// Thin decomposition of the standardized design. For n <= m the n x n Gram
// matrix is diagonalized instead of forming the m-dimensional problem.
Spectral decompose(const MatrixXd& z) {
  Spectral s;
  if (z.rows() <= z.cols()) {
    s.dual = true;
    const MatrixXd gram = z * z.transpose();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw Error("ridge: eigendecomposition failed");
    s.u = eig.eigenvectors();
    s.sq = eig.eigenvalues().cwiseMax(0.0);
  } else {
    Eigen::BDCSVD<MatrixXd> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    s.u = svd.matrixU();
    s.v = svd.matrixV();
    s.sq = svd.singularValues().array().square();
  }
  return s;
}

}  // namespace

std::vector<double> default_alphas() {
  std::vector<double> a(10);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::pow(10.0, -3.0 + 6.0 * static_cast<double>(i) / 9.0);
  return a;
}

RidgeModel ridge_fit(const FeatureMatrix& x, const std::vector<std::string>& y,
                     const std::vector<double>& alphas) {
  const std::size_t n = x.size();
  if (n != y.size()) throw Error("ridge: feature rows and labels differ in count");
  if (n < 2) throw Error("ridge: need at least 2 samples");
  if (alphas.empty()) throw Error("ridge: empty alpha grid");
  const std::size_t m = x.front().size();

  RidgeModel model;
  std::unordered_map<std::string, std::size_t> class_of;
  std::vector<std::size_t> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = class_of.emplace(y[i], model.classes.size());
    if (inserted) model.classes.push_back(y[i]);
    target[i] = it->second;
  }
  const std::size_t k = model.classes.size();
  if (k < 2) throw Error("ridge: need at least 2 classes");

  MatrixXd z(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i].size() != m) throw Error("ridge: ragged feature matrix");
    for (std::size_t j = 0; j < m; ++j) {
      if (std::isnan(x[i][j])) throw Error("ridge: NaN feature");
      z(i, j) = x[i][j];
    }
  }
  model.mean.resize(m);
  model.scale.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double mu = z.col(j).mean();
    z.col(j).array() -= mu;
    const double sd = std::sqrt(z.col(j).squaredNorm() / static_cast<double>(n));
    const double scale = sd > 1e-12 ? sd : 1.0;
    z.col(j) /= scale;
    model.mean[j] = mu;
    model.scale[j] = scale;
  }

  MatrixXd targets = MatrixXd::Constant(n, k, -1.0);
  for (std::size_t i = 0; i < n; ++i) targets(i, target[i]) = 1.0;
  const VectorXd offset = targets.colwise().mean().transpose();
  const MatrixXd yc = targets.rowwise() - offset.transpose();

  const Spectral s = decompose(z);
  const MatrixXd uty = s.u.transpose() * yc;
  const MatrixXd u2 = s.u.array().square().matrix();
  const double inv_n = 1.0 / static_cast<double>(n);

  double best_error = std::numeric_limits<double>::infinity();
  double best_alpha = alphas.front();
  for (double alpha : alphas) {
    const VectorXd shrink = s.sq.array() / (s.sq.array() + alpha);
    const MatrixXd fitted = s.u * (shrink.asDiagonal() * uty);
    const VectorXd leverage = (u2 * shrink).array() + inv_n;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double denom = 1.0 - leverage(static_cast<Eigen::Index>(i));
      for (std::size_t c = 0; c < k; ++c) {
        const double r = (yc(i, c) - fitted(i, c)) / denom;
        err += r * r;
      }
    }
    if (err < best_error) {
      best_error = err;
      best_alpha = alpha;
    }
  }
  model.alpha = best_alpha;

  MatrixXd w;
  if (s.dual) {
    const VectorXd inv = (s.sq.array() + best_alpha).inverse();
    w = z.transpose() * (s.u * (inv.asDiagonal() * uty));
  } else {
    const VectorXd gain = s.sq.array().sqrt() / (s.sq.array() + best_alpha);
    w = s.v * (gain.asDiagonal() * uty);
  }
  model.weights.resize(m * k);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t c = 0; c < k; ++c) model.weights[j * k + c] = w(j, c);
  }
  model.intercepts.assign(offset.data(), offset.data() + k);
  return model;
}

std::vector<std::vector<double>> ridge_scores(const RidgeModel& model, const FeatureMatrix& x) {
  const std::size_t m = model.num_features();
  const std::size_t k = model.num_classes();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != m) {
      throw Error("ridge: row " + std::to_string(i) + " has " + std::to_string(x[i].size()) +
                  " features, model expects " + std::to_string(m));
    }
  }
  std::vector<std::vector<double>> scores(x.size());
#pragma omp parallel for
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> s(model.intercepts);
    for (std::size_t j = 0; j < m; ++j) {
      const double zj = (x[i][j] - model.mean[j]) / model.scale[j];
      const double* wj = model.weights.data() + j * k;
      for (std::size_t c = 0; c < k; ++c) s[c] += zj * wj[c];
    }
    scores[i] = std::move(s);
  }
  return scores;
}

std::vector<std::string> ridge_predict(const RidgeModel& model, const FeatureMatrix& x) {
  const auto scores = ridge_scores(model, x);
  std::vector<std::string> out;
  out.reserve(scores.size());
  for (const auto& s : scores) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < s.size(); ++c) {
      if (s[c] > s[best]) best = c;
    }
    out.push_back(model.classes[best]);
  }
  return out;
}

}  // namespace costi
