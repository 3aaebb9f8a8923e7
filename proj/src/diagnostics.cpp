#include "pas/diagnostics.hpp"
#include "pas/data.hpp"
#include "pas/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace pas {

namespace {

Eigen::MatrixXd gaussian_kernel(const FeatureMatrix& X, const Eigen::MatrixXd& C, double sigma)
{
  const double scale = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd K(X.rows(), C.rows());
  for (Eigen::Index l = 0; l < C.rows(); ++l)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      K(i, l) = std::exp(-(X.row(i) - C.row(l)).squaredNorm() * scale);
  return K;
}

double median(std::vector<double> v)
{
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1)
    return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

double mean_log(const Eigen::MatrixXd& A, const Vector& alpha)
{
  const Vector w = A * alpha;
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    total += std::log(std::max(w[i], 1e-300));
  return total / static_cast<double>(w.size());
}

// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v)
{
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double running = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    running += u[i];
    const double t = (running - 1.0) / static_cast<double>(i + 1);
    if (u[i] > t)
      theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

} // namespace

Vector DensityRatioModel::evaluate(const FeatureMatrix& X) const
{
  if (X.cols() != centers.cols())
    throw Error(ErrorKind::DimensionMismatch, "features and kernel centres differ in dimension");
  return gaussian_kernel(X, centers, bandwidth) * alphas;
}

double median_heuristic(const Eigen::MatrixXd& C, const FeatureMatrix& X)
{
  std::vector<double> dists;
  if (C.rows() >= 2) {
    for (Eigen::Index a = 0; a < C.rows(); ++a)
      for (Eigen::Index b = a + 1; b < C.rows(); ++b)
        dists.push_back((C.row(a) - C.row(b)).norm());
  } else {
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      dists.push_back((X.row(i) - C.row(0)).norm());
  }
  return dists.empty() ? 0.0 : median(std::move(dists));
}

KliepResult kliep_fit(const FeatureMatrix& X_src, const FeatureMatrix& X_tgt, const KliepOptions& options)
{
  check_features(X_src, "source features");
  check_features(X_tgt, "target features");
  if (X_src.cols() != X_tgt.cols())
    throw Error(ErrorKind::DimensionMismatch, "source and target dimensions differ");
  if (options.num_centers < 1 || options.max_iters < 1 || !(options.tol > 0.0))
    throw Error(ErrorKind::ConfigError, "invalid KLIEP options");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(X_tgt.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{ 0 });
  std::mt19937_64 rng(options.seed);
  std::shuffle(order.begin(), order.end(), rng);
  const Eigen::Index b = std::min<Eigen::Index>(options.num_centers, X_tgt.rows());

  KliepResult result;
  DensityRatioModel& model = result.model;
  model.centers.resize(b, X_tgt.cols());
  for (Eigen::Index l = 0; l < b; ++l)
    model.centers.row(l) = X_tgt.row(order[static_cast<std::size_t>(l)]);

  if (options.bandwidth) {
    if (!(*options.bandwidth > 0.0) || !std::isfinite(*options.bandwidth))
      throw Error(ErrorKind::ConfigError, "bandwidth must be positive");
    model.bandwidth = *options.bandwidth;
  } else {
    model.bandwidth = median_heuristic(model.centers, X_tgt);
    if (!(model.bandwidth > 0.0))
      throw Error(ErrorKind::DegenerateKernel, "median heuristic bandwidth is zero");
  }

  // With beta_l = b_l alpha_l the feasible set is the probability simplex,
  // so the projection step is exact.
  const Eigen::MatrixXd K_src = gaussian_kernel(X_src, model.centers, model.bandwidth);
  const Vector bvec = gaussian_kernel(X_tgt, model.centers, model.bandwidth).colwise().mean().transpose();
  const Eigen::MatrixXd A = K_src * bvec.cwiseInverse().asDiagonal();

  Vector beta = Vector::Constant(b, 1.0 / static_cast<double>(b));
  double f = mean_log(A, beta);
  result.objective_history.push_back(f);

  double step = 1.0;
  for (int it = 0; it < options.max_iters; ++it) {
    const Vector w = (A * beta).cwiseMax(1e-300);
    const Vector grad = A.transpose() * w.cwiseInverse() / static_cast<double>(A.rows());

    bool accepted = false;
    Vector candidate;
    double f_new = f;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      candidate = project_simplex(beta + step * grad);
      f_new = mean_log(A, candidate);
      if (f_new >= f) {
        accepted = true;
        break;
      }
    }
    result.iterations = it + 1;
    if (!accepted)
      break;

    const double change = f_new - f;
    beta = std::move(candidate);
    f = f_new;
    result.objective_history.push_back(f);
    step *= 2.0;
    if (change <= options.tol * std::max(std::abs(f), 1e-12))
      break;
  }

  Vector alpha = beta.cwiseQuotient(bvec);
  model.alphas = std::move(alpha);
  return result;
}

double adr(const DensityRatioModel& model, const FeatureMatrix& X, const std::vector<Eigen::Index>& indices)
{
  if (indices.empty())
    throw Error(ErrorKind::EmptySelection, "ADR of an empty selection");
  FeatureMatrix subset(static_cast<Eigen::Index>(indices.size()), X.cols());
  for (std::size_t a = 0; a < indices.size(); ++a) {
    const Eigen::Index i = indices[a];
    if (i < 0 || i >= X.rows())
      throw Error(ErrorKind::RangeError, "selection index " + std::to_string(i) + " out of range");
    subset.row(static_cast<Eigen::Index>(a)) = X.row(i);
  }
  return model.evaluate(subset).mean();
}

AnchoringReport anchoring_report(const PasModel& model,
                                 const FeatureMatrix& Xt,
                                 const std::vector<int>& true_labels,
                                 const DensityRatioModel& ratio_model,
                                 double fraction)
{
  if (!(fraction > 0.0 && fraction <= 0.5))
    throw Error(ErrorKind::RangeError, "fraction must lie in (0, 0.5]");
  if (static_cast<Eigen::Index>(true_labels.size()) != Xt.rows())
    throw Error(ErrorKind::DimensionMismatch, "true label count differs from target row count");

  const Eigen::MatrixXd D = compute_distances(model, Xt);
  const std::vector<int> predicted = assign_memberships(D);
  const Eigen::Index m = Xt.rows();
  const auto na = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(m) + 1e-9));
  if (na < 1)
    throw Error(ErrorKind::TooFewSamples, "fraction selects no samples");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return D(a, predicted[static_cast<std::size_t>(a)]) < D(b, predicted[static_cast<std::size_t>(b)]);
  });

  const auto stats = [&](std::vector<Eigen::Index> group) {
    GroupStats g;
    g.count = group.size();
    std::size_t hits = 0;
    for (Eigen::Index j : group)
      hits += predicted[static_cast<std::size_t>(j)] == true_labels[static_cast<std::size_t>(j)] ? 1 : 0;
    g.accuracy = static_cast<double>(hits) / static_cast<double>(group.size());
    g.adr = adr(ratio_model, Xt, group);
    return g;
  };

  AnchoringReport report;
  report.fraction = fraction;
  report.top = stats({ order.begin(), order.begin() + na });
  report.bottom = stats({ order.end() - na, order.end() });
  return report;
}

std::string report_to_json(const AnchoringReport& report)
{
  const auto group = [](const GroupStats& g) {
    return nlohmann::json{ { "acc", g.accuracy }, { "adr", g.adr }, { "count", g.count } };
  };
  nlohmann::json doc{ { "fraction", report.fraction },
                      { "top", group(report.top) },
                      { "bottom", group(report.bottom) } };
  return doc.dump(1) + "\n";
}

std::string report_to_csv(const AnchoringReport& report, std::uint64_t seed, bool header)
{
  std::string out = header ? "method,seed,accuracy,adr\n" : "";
  const std::string s = std::to_string(seed);
  out += "anchor_top," + s + "," + format_real(report.top.accuracy) + "," + format_real(report.top.adr) + "\n";
  out += "anchor_bottom," + s + "," + format_real(report.bottom.accuracy) + "," +
         format_real(report.bottom.adr) + "\n";
  return out;
}

} // namespace pas
