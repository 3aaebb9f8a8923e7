#include "helpers.hpp"
#include "pas/subspace.hpp"

#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

using namespace pas;
using testutil::Rng;

namespace {

// Eigenvalues of a symmetric 3x3 matrix from its characteristic polynomial,
// solved with the trigonometric cubic formula and polished by Newton steps.
std::array<double, 3> symmetric3_eigenvalues(const Eigen::Matrix3d& C)
{
  const double tr = C(0, 0) + C(1, 1) + C(2, 2);
  double tr2 = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      tr2 += C(i, j) * C(j, i);
  const double det = C(0, 0) * (C(1, 1) * C(2, 2) - C(1, 2) * C(2, 1)) -
                     C(0, 1) * (C(1, 0) * C(2, 2) - C(1, 2) * C(2, 0)) +
                     C(0, 2) * (C(1, 0) * C(2, 1) - C(1, 1) * C(2, 0));
  const double a = -tr, b = 0.5 * (tr * tr - tr2), c = -det;
  const auto poly = [&](double x) { return ((x + a) * x + b) * x + c; };
  const auto dpoly = [&](double x) { return (3.0 * x + 2.0 * a) * x + b; };

  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  std::array<double, 3> roots{};
  if (p > -1e-300) {
    roots.fill(-a / 3.0);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots[static_cast<std::size_t>(k)] = r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - a / 3.0;
  }
  for (double& x : roots)
    for (int it = 0; it < 5; ++it) {
      const double dp = dpoly(x);
      if (std::abs(dp) > 1e-14)
        x -= poly(x) / dp;
    }
  std::sort(roots.begin(), roots.end());
  return roots;
}

double total_residual(const Subspace& S, const FeatureMatrix& X)
{
  double total = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    total += residual_sq(S, X.row(i).transpose());
  return total;
}

double orthonormality_error(const Subspace& S)
{
  const Eigen::Index k = S.effective_dim();
  if (k == 0)
    return 0.0;
  return (S.basis.transpose() * S.basis - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("two collinear points")
{
  FeatureMatrix X(2, 2);
  X << 0, 0, 2, 0;
  const Subspace S = fit_pca(X, 1);
  CHECK(S.effective_dim() == 1);
  CHECK(S.mean(0) == doctest::Approx(1.0));
  CHECK(S.mean(1) == doctest::Approx(0.0));
  CHECK(S.basis(0, 0) == doctest::Approx(1.0));
  CHECK(S.basis(1, 0) == doctest::Approx(0.0));
  CHECK(total_residual(S, X) == doctest::Approx(0.0));

  CHECK(project(S, S.mean).norm() == doctest::Approx(0.0));
  CHECK(project(S, Eigen::Vector2d(3, 0))(0) == doctest::Approx(2.0));
  CHECK(residual_sq(S, Eigen::Vector2d(1, 5)) == doctest::Approx(25.0));
}

TEST_CASE("full-dimensional basis reconstructs every row")
{
  Rng rng(11);
  const FeatureMatrix X = testutil::gaussian(rng, 10, 3);
  const Subspace S = fit_pca(X, 3);
  CHECK(S.effective_dim() == 3);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    CHECK(residual_sq(S, X.row(i).transpose()) == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("total residual equals n times the smallest covariance eigenvalue")
{
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const FeatureMatrix X = testutil::gaussian(rng, 10, 3);
    const Eigen::RowVector3d mu = X.colwise().mean();
    Eigen::Matrix3d C = Eigen::Matrix3d::Zero();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const Eigen::RowVector3d r = X.row(i) - mu;
      C += r.transpose() * r;
    }
    C /= static_cast<double>(X.rows());
    const auto ev = symmetric3_eigenvalues(C);

    const Subspace S = fit_pca(X, 2);
    CHECK(total_residual(S, X) == doctest::Approx(10.0 * ev[0]).epsilon(1e-9));
    REQUIRE(S.spectrum.size() == 2);
    CHECK(S.spectrum(0) == doctest::Approx(ev[2]).epsilon(1e-9));
    CHECK(S.spectrum(1) == doctest::Approx(ev[1]).epsilon(1e-9));
  }
}

TEST_CASE("project matches a naive loop")
{
  Rng rng(3);
  const FeatureMatrix X = testutil::gaussian(rng, 30, 6);
  const Subspace S = fit_pca(X, 3);
  const Vector x = testutil::gaussian(rng, 6, 1).col(0);
  const Vector coords = project(S, x);
  REQUIRE(coords.size() == 3);
  for (Eigen::Index c = 0; c < 3; ++c) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < 6; ++r)
      acc += S.basis(r, c) * (x(r) - S.mean(r));
    CHECK(coords(c) == doctest::Approx(acc).epsilon(1e-12));
  }
}

TEST_CASE("residual obeys Pythagoras and vanishes in span")
{
  Rng rng(5);
  const FeatureMatrix X = testutil::gaussian(rng, 25, 5);
  const Subspace S = fit_pca(X, 2);
  for (int t = 0; t < 20; ++t) {
    const Vector x = testutil::gaussian(rng, 5, 1, 3.0).col(0);
    const double lhs = residual_sq(S, x);
    const double rhs = (x - S.mean).squaredNorm() - project(S, x).squaredNorm();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    CHECK(lhs >= 0.0);

    const Vector c = testutil::gaussian(rng, 2, 1).col(0);
    CHECK(residual_sq(S, S.mean + S.basis * c) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  }
}

TEST_CASE("orthonormality, spectrum order and rank clamp")
{
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const int n = testutil::uniform_int(rng, 2, 15);
    const int d = testutil::uniform_int(rng, 1, 12);
    const int dim = testutil::uniform_int(rng, 1, 6);
    const FeatureMatrix X = testutil::gaussian(rng, n, d);
    const Subspace S = fit_pca(X, dim);
    CHECK(S.effective_dim() <= std::min({ dim, d, n - 1 }));
    CHECK(orthonormality_error(S) <= 1e-8);
    for (Eigen::Index l = 0; l < S.spectrum.size(); ++l) {
      CHECK(S.spectrum(l) >= -1e-10);
      if (l > 0)
        CHECK(S.spectrum(l) <= S.spectrum(l - 1) + 1e-10);
    }
    for (Eigen::Index c = 0; c < S.basis.cols(); ++c) {
      Eigen::Index at = 0;
      S.basis.col(c).cwiseAbs().maxCoeff(&at);
      CHECK(S.basis(at, c) >= 0.0);
    }
  }

  FeatureMatrix line(5, 3);
  for (int i = 0; i < 5; ++i)
    line.row(i) << i, 2.0 * i, -i;
  CHECK(fit_pca(line, 3).effective_dim() == 1);

  const FeatureMatrix constant = FeatureMatrix::Constant(4, 3, 2.5);
  const Subspace flat = fit_pca(constant, 2);
  CHECK(flat.effective_dim() == 0);
  CHECK(residual_sq(flat, Eigen::Vector3d(2.5, 2.5, 3.5)) == doctest::Approx(1.0));
}

TEST_CASE("gram and covariance routes agree")
{
  Rng rng(21);
  // 6 rows in 9 dims goes through the Gram route; the padded copy has
  // more rows than columns and uses the covariance route.
  const FeatureMatrix X = testutil::gaussian(rng, 6, 9);
  FeatureMatrix padded(12, 9);
  padded << X, X;
  const Subspace a = fit_pca(X, 3);
  const Subspace b = fit_pca(padded, 3);
  CHECK(orthonormality_error(a) <= 1e-8);
  REQUIRE(a.effective_dim() == b.effective_dim());
  CHECK((a.basis - b.basis).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((a.spectrum - b.spectrum).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("fit beats random orthonormal competitors")
{
  Rng rng(1234);
  for (int t = 0; t < 20; ++t) {
    const int n = testutil::uniform_int(rng, 3, 12);
    const int d = testutil::uniform_int(rng, 2, 4);
    const int dim = testutil::uniform_int(rng, 1, 2);
    const FeatureMatrix X = testutil::gaussian(rng, n, d);
    const Subspace S = fit_pca(X, dim);
    const double best = total_residual(S, X);
    for (int c = 0; c < 200; ++c) {
      Subspace other;
      other.mean = X.colwise().mean().transpose();
      other.basis = testutil::random_orthonormal(rng, d, dim);
      other.spectrum = Vector::Zero(dim);
      CHECK(best <= total_residual(other, X) + 1e-9);
    }
  }
}

TEST_CASE("trace identity, rotation and scale")
{
  Rng rng(77);
  for (int t = 0; t < 20; ++t) {
    const int n = testutil::uniform_int(rng, 4, 40);
    const int d = testutil::uniform_int(rng, 2, 8);
    const int dim = testutil::uniform_int(rng, 1, 3);
    const FeatureMatrix X = testutil::gaussian(rng, n, d);
    const Subspace S = fit_pca(X, dim);

    double centred = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      centred += (X.row(i).transpose() - S.mean).squaredNorm();
    const double expected = centred - n * S.spectrum.sum();
    CHECK(total_residual(S, X) == doctest::Approx(expected).epsilon(1e-6).scale(centred));

    const Eigen::MatrixXd Q = testutil::random_orthonormal(rng, d, d);
    const FeatureMatrix R = X * Q.transpose();
    const Subspace SR = fit_pca(R, dim);
    const double s = testutil::uniform_real(rng, 0.1, 10.0);
    const Subspace SS = fit_pca(s * X, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r0 = residual_sq(S, X.row(i).transpose());
      CHECK(residual_sq(SR, R.row(i).transpose()) == doctest::Approx(r0).epsilon(1e-8).scale(1.0));
      CHECK(residual_sq(SS, s * X.row(i).transpose()) == doctest::Approx(s * s * r0).epsilon(1e-8).scale(1.0));
    }
  }
}

TEST_CASE("integer weights act as replicated rows")
{
  Rng rng(9);
  const FeatureMatrix X = testutil::gaussian(rng, 8, 4);
  Vector w(8);
  w << 1, 2, 0, 3, 1, 1, 2, 1;
  FeatureMatrix rep(static_cast<Eigen::Index>(w.sum()), 4);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < 8; ++i)
    for (int c = 0; c < static_cast<int>(w(i)); ++c)
      rep.row(r++) = X.row(i);
  const Subspace a = fit_pca(X, w, 2);
  const Subspace b = fit_pca(rep, 2);
  CHECK((a.mean - b.mean).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((a.basis - b.basis).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK((a.spectrum - b.spectrum).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("subspace errors")
{
  using testutil::error_kind;
  CHECK(error_kind([] { fit_pca(FeatureMatrix(0, 3), 1); }) == ErrorKind::EmptyFit);
  CHECK(error_kind([] { fit_pca(FeatureMatrix::Ones(3, 2), Vector::Zero(3), 1); }) == ErrorKind::EmptyFit);
  FeatureMatrix bad = FeatureMatrix::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK(error_kind([&] { fit_pca(bad, 1); }) == ErrorKind::NonFinite);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK(error_kind([&] { fit_pca(bad, 1); }) == ErrorKind::NonFinite);

  Rng rng(1);
  const Subspace S = fit_pca(testutil::gaussian(rng, 5, 3), 1);
  CHECK(error_kind([&] { project(S, Vector::Zero(2)); }) == ErrorKind::DimensionMismatch);
  CHECK(error_kind([&] { residual_sq(S, Vector::Zero(4)); }) == ErrorKind::DimensionMismatch);
}
