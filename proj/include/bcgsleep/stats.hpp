#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "bcgsleep/error.hpp"

namespace bcgsleep {

/// Summary statistics of one signal over one window, in feature order.
template <class Scalar>
struct WindowStats {
  Scalar mean{};
  Scalar median{};
  Scalar max{};
  Scalar min{};
  Scalar std{};
  Scalar p75{};
};

inline constexpr int kStatCount = 6;

/// Linear-interpolation percentile at rank p * (n - 1) over sorted values
/// (the "type 7" definition).
template <class Scalar>
Scalar percentile_sorted(const std::vector<Scalar>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyMatrix, "percentile of an empty sample");
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const Scalar frac = static_cast<Scalar>(rank - static_cast<double>(lo));
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Mean, median, max, min, population std and 75th percentile of a vector.
template <class Derived>
WindowStats<typename Derived::Scalar> compute_stats(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const auto n = values.size();
  if (n == 0) throw Error(ErrorKind::EmptyMatrix, "statistics of an empty window");
  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = values.derived().coeff(i);
  std::sort(sorted.begin(), sorted.end());

  WindowStats<Scalar> s;
  Scalar sum = 0;
  for (Scalar v : sorted) sum += v;
  s.mean = sum / static_cast<Scalar>(n);
  const auto half = static_cast<std::size_t>(n / 2);
  s.median = n % 2 == 1 ? sorted[half] : (sorted[half - 1] + sorted[half]) / Scalar(2);
  s.max = sorted.back();
  s.min = sorted.front();
  Scalar ss = 0;
  for (Scalar v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<Scalar>(n));
  s.p75 = percentile_sorted(sorted, 0.75);
  return s;
}

/// Per-column z-scoring parameters learned from a training matrix.
template <class Scalar>
struct Standardizer {
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  RowVector mean;
  RowVector scale;  // population std, or 1 for a zero-variance column

  /// Throws EmptyMatrix for a matrix without rows.
  static Standardizer fit(const Matrix& train) {
    if (train.rows() == 0 || train.cols() == 0) {
      throw Error(ErrorKind::EmptyMatrix, "cannot standardize an empty matrix");
    }
    Standardizer p;
    p.mean = train.colwise().mean();
    const Matrix centered = train.rowwise() - p.mean;
    p.scale = (centered.array().square().colwise().sum() / static_cast<Scalar>(train.rows()))
                  .sqrt()
                  .matrix();
    for (Eigen::Index j = 0; j < p.scale.size(); ++j) {
      if (!(p.scale(j) > Scalar(0))) p.scale(j) = Scalar(1);
    }
    return p;
  }

  Matrix apply(const Matrix& x) const {
    return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
  }

  Matrix invert(const Matrix& z) const {
    return ((z.array().rowwise() * scale.array()).rowwise() + mean.array()).matrix();
  }
};

/// Eigenvalues of the sample covariance divided by their sum, descending.
/// Tiny negative eigenvalues from rounding are clamped to zero.
template <class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> pca_explained_variance(
    const Eigen::MatrixBase<Derived>& data) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (data.rows() < 2) throw Error(ErrorKind::TooFewItems, "PCA needs at least two rows");
  const Matrix centered = data.rowwise() - data.colwise().mean();
  const Matrix cov = (centered.adjoint() * centered) / static_cast<Scalar>(data.rows() - 1);
  if (cov.cwiseAbs().maxCoeff() == Scalar(0)) {
    throw Error(ErrorKind::DegenerateMatrix, "covariance matrix is all zero");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov, Eigen::EigenvaluesOnly);
  Vector values = solver.eigenvalues().reverse().cwiseMax(Scalar(0));
  const Scalar total = values.sum();
  if (!(total > Scalar(0))) throw Error(ErrorKind::DegenerateMatrix, "covariance has no variance");
  return values / total;
}

}  // namespace bcgsleep
