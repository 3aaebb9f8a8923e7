#include "pas/subspace.hpp"
#include "pas/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace pas {

void check_features(const FeatureMatrix& X, const char* what)
{
  if (X.rows() == 0 || X.cols() == 0)
    throw Error(ErrorKind::EmptyFit, std::string(what) + " matrix is empty");
  if (!X.allFinite())
    throw Error(ErrorKind::NonFinite, std::string(what) + " contain NaN or Inf");
}

namespace {

// Modified Gram-Schmidt in place. The Gram route loses orthogonality on the
// small retained eigenvalues, one pass is enough to bring it back to
// machine precision.
void reorthonormalize(Eigen::MatrixXd& B)
{
  for (Eigen::Index l = 0; l < B.cols(); ++l) {
    for (Eigen::Index p = 0; p < l; ++p)
      B.col(l) -= B.col(p).dot(B.col(l)) * B.col(p);
    B.col(l).normalize();
  }
}

void apply_sign_convention(Eigen::MatrixXd& B)
{
  for (Eigen::Index l = 0; l < B.cols(); ++l) {
    Eigen::Index imax = 0;
    B.col(l).cwiseAbs().maxCoeff(&imax);
    if (B(imax, l) < 0.0)
      B.col(l) = -B.col(l);
  }
}

} // namespace

Subspace fit_pca(const FeatureMatrix& X, const std::optional<Vector>& weights, int dim)
{
  if (dim < 1)
    throw Error(ErrorKind::ConfigError, "subspace dimension must be >= 1");
  check_features(X, "fit");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();

  Vector w = Vector::Ones(n);
  if (weights) {
    if (weights->size() != n)
      throw Error(ErrorKind::DimensionMismatch, "weight count differs from row count");
    if (!weights->allFinite() || (weights->array() < 0.0).any())
      throw Error(ErrorKind::NonFinite, "weights must be finite and nonnegative");
    w = *weights;
  }
  const double wsum = w.sum();
  if (!(wsum > 0.0))
    throw Error(ErrorKind::EmptyFit, "all weights are zero");

  std::vector<Eigen::Index> active;
  active.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    if (w[i] > 0.0)
      active.push_back(i);
  const auto n_fit = static_cast<Eigen::Index>(active.size());

  Subspace S;
  S.mean = Vector::Zero(d);
  for (Eigen::Index i : active)
    S.mean += (w[i] / wsum) * X.row(i).transpose();

  // Rows of A are sqrt(w_i / W) (x_i - mean), so A^T A is the weighted
  // covariance and A A^T shares its nonzero spectrum.
  Eigen::MatrixXd A(n_fit, d);
  for (Eigen::Index r = 0; r < n_fit; ++r) {
    const Eigen::Index i = active[static_cast<std::size_t>(r)];
    A.row(r) = std::sqrt(w[i] / wsum) * (X.row(i) - S.mean.transpose());
  }
  const double trace = A.squaredNorm();
  const Eigen::Index max_dim = std::min<Eigen::Index>({ dim, d, n_fit - 1 });

  S.basis.resize(d, 0);
  S.spectrum.resize(0);
  if (max_dim <= 0 || !(trace > 0.0))
    return S;

  const double cutoff = kRankTolerance * trace;
  Vector evals;
  Eigen::MatrixXd evecs;
  const bool gram_route = d > n_fit;
  if (!gram_route) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A * A.transpose());
    evals = es.eigenvalues();
    evecs = es.eigenvectors();
  }

  // Eigen sorts ascending; walk from the top.
  Eigen::Index keep = 0;
  const Eigen::Index total = evals.size();
  while (keep < max_dim && evals[total - 1 - keep] > cutoff)
    ++keep;

  S.basis.resize(d, keep);
  S.spectrum.resize(keep);
  for (Eigen::Index l = 0; l < keep; ++l) {
    const Eigen::Index src = total - 1 - l;
    S.spectrum[l] = evals[src];
    if (!gram_route)
      S.basis.col(l) = evecs.col(src);
    else
      S.basis.col(l) = A.transpose() * evecs.col(src) / std::sqrt(evals[src]);
  }
  if (gram_route)
    reorthonormalize(S.basis);
  apply_sign_convention(S.basis);
  return S;
}

Vector project(const Subspace& S, const Eigen::Ref<const Vector>& x)
{
  if (x.size() != S.feature_dim())
    throw Error(ErrorKind::DimensionMismatch,
                "vector has dimension " + std::to_string(x.size()) + ", subspace expects " +
                  std::to_string(S.feature_dim()));
  return S.basis.transpose() * (x - S.mean);
}

double residual_sq(const Subspace& S, const Eigen::Ref<const Vector>& x)
{
  if (x.size() != S.feature_dim())
    throw Error(ErrorKind::DimensionMismatch,
                "vector has dimension " + std::to_string(x.size()) + ", subspace expects " +
                  std::to_string(S.feature_dim()));
  const Vector centered = x - S.mean;
  const Vector coords = S.basis.transpose() * centered;
  return (centered - S.basis * coords).squaredNorm();
}

} // namespace pas
