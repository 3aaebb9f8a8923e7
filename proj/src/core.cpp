#include "pas/core.hpp"
#include "pas/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pas {

void SourceLabels::validate() const
{
  if (num_classes < 1)
    throw Error(ErrorKind::RangeError, "number of classes must be >= 1");
  std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) {
    if (y < 0 || y >= num_classes)
      throw Error(ErrorKind::RangeError, "label " + std::to_string(y) + " outside [0, " +
                                           std::to_string(num_classes) + ")");
    ++counts[static_cast<std::size_t>(y)];
  }
  for (int k = 0; k < num_classes; ++k)
    if (counts[static_cast<std::size_t>(k)] == 0)
      throw Error(ErrorKind::RangeError,
                  "class " + std::to_string(k) + " has no source samples");
}

void PasConfig::validate() const
{
  if (dim < 1)
    throw Error(ErrorKind::ConfigError, "dim must be >= 1");
  if (!(schedule_step > 0.0 && schedule_step <= 1.0))
    throw Error(ErrorKind::ConfigError, "schedule step must lie in (0, 1]");
  if (!(inner_tol > 0.0))
    throw Error(ErrorKind::ConfigError, "inner tolerance must be positive");
  if (inner_max_iters < 1)
    throw Error(ErrorKind::ConfigError, "inner iteration cap must be >= 1");
}

std::size_t AnchorState::anchored_count() const
{
  return static_cast<std::size_t>(std::count(anchors.begin(), anchors.end(), std::uint8_t{ 1 }));
}

Eigen::MatrixXd AnchorState::membership_matrix(int num_classes) const
{
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(size()), num_classes);
  for (std::size_t j = 0; j < size(); ++j)
    W(static_cast<Eigen::Index>(j), assignments[j]) = 1.0;
  return W;
}

namespace {

void check_model_dim(const PasModel& model, const FeatureMatrix& X)
{
  if (model.subspaces.empty())
    throw Error(ErrorKind::ConfigError, "model has no subspaces");
  if (X.cols() != model.feature_dim())
    throw Error(ErrorKind::DimensionMismatch,
                "features have " + std::to_string(X.cols()) + " columns, model expects " +
                  std::to_string(model.feature_dim()));
}

void check_problem(const FeatureMatrix& Xs, const SourceLabels& labels, const FeatureMatrix& Xt)
{
  check_features(Xs, "source features");
  if (Xt.rows() == 0)
    throw Error(ErrorKind::EmptyTarget, "target set is empty");
  check_features(Xt, "target features");
  if (Xs.cols() != Xt.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "source has " + std::to_string(Xs.cols()) + " columns, target has " +
                  std::to_string(Xt.cols()));
  if (static_cast<Eigen::Index>(labels.labels.size()) != Xs.rows())
    throw Error(ErrorKind::DimensionMismatch, "label count differs from source row count");
  labels.validate();
}

double source_residual_total(const PasModel& model,
                             const FeatureMatrix& Xs,
                             const SourceLabels& labels)
{
  double total = 0.0;
  for (Eigen::Index i = 0; i < Xs.rows(); ++i)
    total += residual_sq(model.subspaces[static_cast<std::size_t>(labels.labels[static_cast<std::size_t>(i)])],
                         Xs.row(i).transpose());
  return total;
}

// Objective given precomputed target distances for the assigned subspaces.
double objective_from_parts(double source_total, const AnchorState& state)
{
  double target_total = 0.0;
  double anchored = 0.0;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (state.anchors[j]) {
      target_total += state.distances[static_cast<Eigen::Index>(j)];
      anchored += 1.0;
    }
  }
  return source_total + target_total - state.threshold * anchored;
}

AnchorState update_targets(const Eigen::MatrixXd& dists, double lambda)
{
  AnchorState s;
  s.threshold = lambda;
  s.assignments = assign_memberships(dists);
  s.distances.resize(dists.rows());
  for (Eigen::Index j = 0; j < dists.rows(); ++j)
    s.distances[j] = dists(j, s.assignments[static_cast<std::size_t>(j)]);
  s.anchors = anchor(s.distances, lambda);
  return s;
}

} // namespace

Eigen::MatrixXd compute_distances(const PasModel& model, const FeatureMatrix& X)
{
  check_model_dim(model, X);
  if (!X.allFinite())
    throw Error(ErrorKind::NonFinite, "features contain NaN or Inf");
  const auto K = static_cast<Eigen::Index>(model.subspaces.size());
  Eigen::MatrixXd D(X.rows(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Subspace& S = model.subspaces[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < X.rows(); ++j)
      D(j, k) = residual_sq(S, X.row(j).transpose());
  }
  return D;
}

std::vector<int> assign_memberships(const Eigen::MatrixXd& dists)
{
  if (!dists.allFinite())
    throw Error(ErrorKind::NonFinite, "distance matrix contains NaN or Inf");
  if (dists.cols() < 1)
    throw Error(ErrorKind::DimensionMismatch, "distance matrix has no columns");
  std::vector<int> out(static_cast<std::size_t>(dists.rows()));
  for (Eigen::Index j = 0; j < dists.rows(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < dists.cols(); ++k)
      if (dists(j, k) < dists(j, best))
        best = k;
    out[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return out;
}

std::vector<std::uint8_t> anchor(const Eigen::Ref<const Vector>& c, double lambda)
{
  std::vector<std::uint8_t> v(static_cast<std::size_t>(c.size()));
  for (Eigen::Index j = 0; j < c.size(); ++j)
    v[static_cast<std::size_t>(j)] = c[j] < lambda ? 1 : 0;
  return v;
}

double lambda_for_fraction(const Eigen::Ref<const Vector>& c, double fraction)
{
  if (c.size() == 0)
    throw Error(ErrorKind::EmptyTarget, "no distances to threshold");
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw Error(ErrorKind::RangeError, "fraction must lie in [0, 1]");
  if (!c.allFinite() || (c.array() < 0.0).any())
    throw Error(ErrorKind::RangeError, "distances must be finite and nonnegative");

  const auto m = static_cast<double>(c.size());
  // The 1e-9 guard keeps e.g. 0.07 * 100 from rounding up to 8.
  const auto needed = static_cast<Eigen::Index>(std::ceil(fraction * m - 1e-9));
  if (needed <= 0)
    return 0.0;

  std::vector<double> sorted(c.data(), c.data() + c.size());
  const auto kth = sorted.begin() + (std::min<Eigen::Index>(needed, c.size()) - 1);
  std::nth_element(sorted.begin(), kth, sorted.end());
  return *kth * (1.0 + 1e-9) + 1e-12;
}

double objective(const PasModel& model,
                 const FeatureMatrix& Xs,
                 const SourceLabels& labels,
                 const FeatureMatrix& Xt,
                 const AnchorState& state)
{
  check_model_dim(model, Xs);
  check_model_dim(model, Xt);
  if (static_cast<Eigen::Index>(labels.labels.size()) != Xs.rows())
    throw Error(ErrorKind::DimensionMismatch, "label count differs from source row count");
  if (static_cast<Eigen::Index>(state.size()) != Xt.rows() ||
      state.anchors.size() != state.size())
    throw Error(ErrorKind::DimensionMismatch, "anchor state size differs from target row count");

  double target_total = 0.0;
  double anchored = 0.0;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (!state.anchors[j])
      continue;
    const auto k = static_cast<std::size_t>(state.assignments[j]);
    target_total += residual_sq(model.subspaces[k], Xt.row(static_cast<Eigen::Index>(j)).transpose());
    anchored += 1.0;
  }
  return source_residual_total(model, Xs, labels) + target_total - state.threshold * anchored;
}

AnchorState empty_state(Eigen::Index num_targets)
{
  AnchorState s;
  s.assignments.assign(static_cast<std::size_t>(num_targets), 0);
  s.anchors.assign(static_cast<std::size_t>(num_targets), 0);
  s.distances = Vector::Zero(num_targets);
  return s;
}

PasModel fit_class_subspaces(const FeatureMatrix& Xs,
                             const SourceLabels& labels,
                             const FeatureMatrix& Xt,
                             const AnchorState& state,
                             const PasConfig& config)
{
  if (static_cast<Eigen::Index>(state.size()) != Xt.rows())
    throw Error(ErrorKind::DimensionMismatch, "anchor state size differs from target row count");
  if (Xs.cols() != Xt.cols())
    throw Error(ErrorKind::DimensionMismatch, "source and target dimensions differ");

  const int K = labels.num_classes;
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(K), 0);
  for (int y : labels.labels)
    ++counts[static_cast<std::size_t>(y)];
  for (std::size_t j = 0; j < state.size(); ++j)
    if (state.anchors[j])
      ++counts[static_cast<std::size_t>(state.assignments[j])];

  PasModel model;
  model.config = config;
  model.subspaces.reserve(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    FeatureMatrix X_k(counts[static_cast<std::size_t>(k)], Xs.cols());
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < Xs.rows(); ++i)
      if (labels.labels[static_cast<std::size_t>(i)] == k)
        X_k.row(r++) = Xs.row(i);
    for (std::size_t j = 0; j < state.size(); ++j)
      if (state.anchors[j] && state.assignments[j] == k)
        X_k.row(r++) = Xt.row(static_cast<Eigen::Index>(j));
    model.subspaces.push_back(fit_pca(X_k, config.dim));
  }
  return model;
}

InnerResult inner_solve(const FeatureMatrix& Xs,
                        const SourceLabels& labels,
                        const FeatureMatrix& Xt,
                        double lambda,
                        const PasConfig& config,
                        const std::optional<AnchorState>& warm_state)
{
  check_problem(Xs, labels, Xt);
  config.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::RangeError, "lambda must be finite and nonnegative");

  InnerResult result;
  result.state = warm_state ? *warm_state : empty_state(Xt.rows());
  if (static_cast<Eigen::Index>(result.state.size()) != Xt.rows())
    throw Error(ErrorKind::DimensionMismatch, "warm state size differs from target row count");

  for (int it = 0; it < config.inner_max_iters; ++it) {
    result.model = fit_class_subspaces(Xs, labels, Xt, result.state, config);
    AnchorState next = update_targets(compute_distances(result.model, Xt), lambda);
    const double value =
      objective_from_parts(source_residual_total(result.model, Xs, labels), next);

    const bool unchanged =
      it > 0 && next.assignments == result.state.assignments && next.anchors == result.state.anchors;
    result.state = std::move(next);
    result.objective_history.push_back(value);

    if (it > 0) {
      const double prev = result.objective_history[result.objective_history.size() - 2];
      if (unchanged || std::abs(value - prev) <= config.inner_tol * std::abs(prev)) {
        result.converged = true;
        break;
      }
    }
  }
  return result;
}

int schedule_length(double step)
{
  if (!(step > 0.0 && step <= 1.0))
    throw Error(ErrorKind::ConfigError, "schedule step must lie in (0, 1]");
  return static_cast<int>(std::ceil(1.0 / step - 1e-9));
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth)
{
  if (predicted.size() != truth.size())
    throw Error(ErrorKind::DimensionMismatch, "label vectors differ in length");
  if (predicted.empty())
    throw Error(ErrorKind::EmptySelection, "accuracy of an empty label vector");
  std::size_t hits = 0;
  for (std::size_t j = 0; j < truth.size(); ++j)
    hits += predicted[j] == truth[j] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

ProgressiveResult fit_progressive(const FeatureMatrix& Xs,
                                  const SourceLabels& labels,
                                  const FeatureMatrix& Xt,
                                  const PasConfig& config,
                                  const std::optional<std::vector<int>>& eval_labels)
{
  check_problem(Xs, labels, Xt);
  config.validate();
  if (eval_labels && static_cast<Eigen::Index>(eval_labels->size()) != Xt.rows())
    throw Error(ErrorKind::DimensionMismatch, "evaluation label count differs from target row count");

  ProgressiveResult out;
  auto record = [&](int stage, double fraction, double lambda, const InnerResult& r) {
    StageRecord rec;
    rec.stage = stage;
    rec.fraction = fraction;
    rec.lambda = lambda;
    rec.anchored = r.state.anchored_count();
    rec.objective = r.objective_history.back();
    rec.inner_iterations = static_cast<int>(r.objective_history.size());
    if (eval_labels)
      rec.pseudo_label_accuracy = accuracy(r.state.assignments, *eval_labels);
    out.trace.stages.push_back(rec);
  };

  InnerResult current = inner_solve(Xs, labels, Xt, 0.0, config);
  record(0, 0.0, 0.0, current);
  out.initial_model = current.model;

  const int stages = schedule_length(config.schedule_step);
  for (int s = 1; s <= stages; ++s) {
    const double fraction = s == stages ? 1.0 : std::min(1.0, s * config.schedule_step);
    // Refitting pulls anchored samples closer, so the raw quantile can drop
    // below the previous threshold; lambda only ever increases.
    const double lambda =
      std::max(current.state.threshold, lambda_for_fraction(current.state.distances, fraction));
    current = inner_solve(Xs, labels, Xt, lambda, config, current.state);
    record(s, fraction, lambda, current);
  }

  out.model = std::move(current.model);
  out.state = std::move(current.state);
  return out;
}

std::vector<int> predict(const PasModel& model, const FeatureMatrix& X)
{
  return assign_memberships(compute_distances(model, X));
}

} // namespace pas
