#pragma once

#include "pas/subspace.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace pas {

//! Class indices of the labelled source samples, 0-based and contiguous.
struct SourceLabels
{
  std::vector<int> labels;
  int num_classes = 0;

  //! Throws RangeError unless every label lies in [0, K) and every class
  //! appears at least once.
  void validate() const;
};

struct PasConfig
{
  int dim = 1;
  double schedule_step = 0.01;
  double inner_tol = 1e-6;
  int inner_max_iters = 50;
  std::uint64_t seed = 0; // reserved: ties are broken deterministically

  void validate() const;
};

struct PasModel
{
  std::vector<Subspace> subspaces;
  PasConfig config;

  int num_classes() const { return static_cast<int>(subspaces.size()); }
  Eigen::Index feature_dim() const
  {
    return subspaces.empty() ? 0 : subspaces.front().feature_dim();
  }
};

//! Target-side variables of the alternating solver. `assignments` is the
//! row-wise argmin encoding of the one-hot membership matrix W.
struct AnchorState
{
  std::vector<int> assignments;
  std::vector<std::uint8_t> anchors;
  double threshold = 0.0;
  Vector distances; // residual to the assigned subspace

  std::size_t size() const { return assignments.size(); }
  std::size_t anchored_count() const;
  //! Dense one-hot m x K view of the assignments.
  Eigen::MatrixXd membership_matrix(int num_classes) const;
};

struct StageRecord
{
  int stage = 0;
  double fraction = 0.0;
  double lambda = 0.0;
  std::size_t anchored = 0;
  double objective = 0.0;
  int inner_iterations = 0;
  std::optional<double> pseudo_label_accuracy;
};

struct FitTrace
{
  std::vector<StageRecord> stages;
};

//! m x K matrix of residual_sq(subspace_k, x_j).
Eigen::MatrixXd compute_distances(const PasModel& model, const FeatureMatrix& X);

//! Row-wise argmin, ties to the smallest class index.
std::vector<int> assign_memberships(const Eigen::MatrixXd& dists);

//! v_j = 1 iff c_j < lambda.
std::vector<std::uint8_t> anchor(const Eigen::Ref<const Vector>& c, double lambda);

//! Smallest practical threshold anchoring at least ceil(fraction * m)
//! samples. fraction == 0 gives 0.
double lambda_for_fraction(const Eigen::Ref<const Vector>& c, double fraction);

//! Unified objective: own-class source residuals, plus assigned residuals of
//! anchored targets, minus lambda times the anchored count. Residuals are
//! recomputed from `model`, the cached state distances are not trusted.
double objective(const PasModel& model,
                 const FeatureMatrix& Xs,
                 const SourceLabels& labels,
                 const FeatureMatrix& Xt,
                 const AnchorState& state);

//! Per class k, PCA over source rows of class k plus anchored target rows
//! assigned to k.
PasModel fit_class_subspaces(const FeatureMatrix& Xs,
                             const SourceLabels& labels,
                             const FeatureMatrix& Xt,
                             const AnchorState& state,
                             const PasConfig& config);

//! State with nothing anchored and no meaningful assignment; used to start
//! from source-only subspaces.
AnchorState empty_state(Eigen::Index num_targets);

struct InnerResult
{
  PasModel model;
  AnchorState state;
  std::vector<double> objective_history;
  bool converged = false;
};

//! Alternating block minimisation at a fixed lambda: refit subspaces,
//! reassign memberships, re-anchor, until the relative objective change drops
//! below config.inner_tol or config.inner_max_iters is reached. One history
//! entry per iteration. Without a warm state the first refit is source-only.
InnerResult inner_solve(const FeatureMatrix& Xs,
                        const SourceLabels& labels,
                        const FeatureMatrix& Xt,
                        double lambda,
                        const PasConfig& config,
                        const std::optional<AnchorState>& warm_state = std::nullopt);

struct ProgressiveResult
{
  PasModel model;         // final stage
  PasModel initial_model; // stage 0, source-only
  AnchorState state;
  FitTrace trace;
};

//! Stage 0 fits on the source alone; every following stage raises the
//! anchored fraction by config.schedule_step (the last stage is exactly 1),
//! sets lambda from the current assigned distances and warm-starts the inner
//! solver from the previous stage.
ProgressiveResult fit_progressive(const FeatureMatrix& Xs,
                                  const SourceLabels& labels,
                                  const FeatureMatrix& Xt,
                                  const PasConfig& config,
                                  const std::optional<std::vector<int>>& eval_labels = std::nullopt);

//! argmin_k residual_sq(subspace_k, x_j)
std::vector<int> predict(const PasModel& model, const FeatureMatrix& X);

//! Fraction of positions where the two label vectors agree.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

//! Number of stages after stage 0 for a given schedule step.
int schedule_length(double step);

} // namespace pas
