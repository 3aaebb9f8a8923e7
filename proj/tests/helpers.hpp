#pragma once

#include "pas/core.hpp"
#include "pas/error.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <random>

namespace testutil {

using Rng = std::mt19937_64;

inline Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0)
{
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j)
      M(i, j) = scale * n01(rng);
  return M;
}

inline int uniform_int(Rng& rng, int lo, int hi)
{
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Q factor of a Gaussian matrix: a random d x k orthonormal frame.
inline Eigen::MatrixXd random_orthonormal(Rng& rng, Eigen::Index d, Eigen::Index k)
{
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, d, d));
  Eigen::MatrixXd Q = qr.householderQ();
  return Q.leftCols(k);
}

inline std::optional<pas::ErrorKind> error_kind(const std::function<void()>& fn)
{
  try {
    fn();
  } catch (const pas::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

// Random labels with every class present at least `min_per_class` times.
inline pas::SourceLabels random_labels(Rng& rng, int n, int K, int min_per_class = 1)
{
  pas::SourceLabels out;
  out.num_classes = K;
  for (int i = 0; i < n; ++i)
    out.labels.push_back(i < K * min_per_class ? i % K : uniform_int(rng, 0, K - 1));
  std::shuffle(out.labels.begin(), out.labels.end(), rng);
  return out;
}

// Blob data around K random centres, rows labelled by `labels`.
inline Eigen::MatrixXd blobs(Rng& rng, const std::vector<int>& labels, const Eigen::MatrixXd& centres, double noise)
{
  Eigen::MatrixXd X(static_cast<Eigen::Index>(labels.size()), centres.cols());
  std::normal_distribution<double> n01(0.0, 1.0);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      X(i, j) = centres(labels[static_cast<std::size_t>(i)], j) + noise * n01(rng);
  return X;
}

} // namespace testutil
