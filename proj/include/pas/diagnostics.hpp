#pragma once

#include "pas/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pas {

//! w(x) = sum_l alpha_l exp(-||x - c_l||^2 / (2 sigma^2)), an estimate of
//! p_source(x) / p_target(x).
struct DensityRatioModel
{
  Eigen::MatrixXd centers; // b x d
  Vector alphas;           // b, nonnegative
  double bandwidth = 1.0;

  Vector evaluate(const FeatureMatrix& X) const;
};

struct KliepOptions
{
  int num_centers = 100;
  std::optional<double> bandwidth; // median heuristic when unset
  std::uint64_t seed = 0;
  int max_iters = 500;
  double tol = 1e-7;
};

struct KliepResult
{
  DensityRatioModel model;
  std::vector<double> objective_history; // mean log w over the source, per accepted step
  int iterations = 0;
};

//! KLIEP: maximise sum_{src} log w(x) subject to alpha >= 0 and
//! mean_{tgt} w(x) = 1. Centres are the first min(num_centers, m) target
//! rows under a seeded shuffle. Projected gradient ascent with backtracking,
//! so every accepted step keeps alpha feasible and never lowers the
//! objective.
KliepResult kliep_fit(const FeatureMatrix& X_src, const FeatureMatrix& X_tgt, const KliepOptions& options = {});

//! Median pairwise distance among the rows of C (distance to the remaining
//! rows of X when C has a single row).
double median_heuristic(const Eigen::MatrixXd& C, const FeatureMatrix& X);

//! Average density ratio over the selected rows of X.
double adr(const DensityRatioModel& model, const FeatureMatrix& X, const std::vector<Eigen::Index>& indices);

struct GroupStats
{
  double accuracy = 0.0;
  double adr = 0.0;
  std::size_t count = 0;
};

struct AnchoringReport
{
  double fraction = 0.05;
  GroupStats top;    // smallest assigned-subspace residual
  GroupStats bottom; // largest
};

AnchoringReport anchoring_report(const PasModel& model,
                                 const FeatureMatrix& Xt,
                                 const std::vector<int>& true_labels,
                                 const DensityRatioModel& ratio_model,
                                 double fraction = 0.05);

std::string report_to_json(const AnchoringReport& report);
//! Rows in the bench layout (method,seed,accuracy) extended by an adr column.
std::string report_to_csv(const AnchoringReport& report, std::uint64_t seed, bool header);

} // namespace pas
