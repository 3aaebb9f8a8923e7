#pragma once

#include <Eigen/Dense>

#include <optional>

namespace pas {

//! Samples are rows, features are columns.
using FeatureMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

//! Throws NonFinite if any entry is NaN/Inf and EmptyFit if the matrix has
//! no rows or no columns.
void check_features(const FeatureMatrix& X, const char* what = "features");

//! An affine subspace: mean plus orthonormal basis. The spectrum holds the
//! (weighted, 1/N-normalised) covariance eigenvalues of the retained
//! directions, nonincreasing.
struct Subspace
{
  Vector mean;
  Eigen::MatrixXd basis; // d x effective_dim
  Vector spectrum;       // effective_dim

  Eigen::Index feature_dim() const { return mean.size(); }
  Eigen::Index effective_dim() const { return basis.cols(); }
};

//! Eigenvalues below this fraction of the covariance trace are treated as
//! zero when deciding the effective dimension.
inline constexpr double kRankTolerance = 1e-12;

//! Weighted PCA over the rows of X. Chooses the covariance (d x d) route
//! when d <= n and the Gram (n x n) route otherwise. The effective
//! dimension is clamped to min(dim, d, rank). Each basis column is signed so
//! that its largest-magnitude entry is nonnegative.
Subspace fit_pca(const FeatureMatrix& X,
                 const std::optional<Vector>& weights,
                 int dim);

inline Subspace fit_pca(const FeatureMatrix& X, int dim)
{
  return fit_pca(X, std::nullopt, dim);
}

//! basis^T (x - mean)
Vector project(const Subspace& S, const Eigen::Ref<const Vector>& x);

//! || (x - mean) - basis basis^T (x - mean) ||^2, never negative.
double residual_sq(const Subspace& S, const Eigen::Ref<const Vector>& x);

} // namespace pas
