#include "pas/baselines.hpp"
#include "pas/error.hpp"

#include <limits>

namespace pas {

std::vector<int> nn1_classify(const LabeledDataset& source, const FeatureMatrix& Xt)
{
  check_features(source.features, "source features");
  if (Xt.cols() != source.features.cols())
    throw Error(ErrorKind::DimensionMismatch, "target and source dimensions differ");
  if (static_cast<Eigen::Index>(source.labels.labels.size()) != source.features.rows())
    throw Error(ErrorKind::DimensionMismatch, "label count differs from source row count");

  std::vector<int> out(static_cast<std::size_t>(Xt.rows()));
  for (Eigen::Index j = 0; j < Xt.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < source.features.rows(); ++i) {
      const double dist = (source.features.row(i) - Xt.row(j)).squaredNorm();
      if (dist < best) {
        best = dist;
        arg = i;
      }
    }
    out[static_cast<std::size_t>(j)] = source.labels.labels[static_cast<std::size_t>(arg)];
  }
  return out;
}

PasModel pas_c(const LabeledDataset& source, int dim)
{
  source.labels.validate();
  PasConfig config;
  config.dim = dim;
  config.validate();
  // An empty target block leaves only the source rows in every class union.
  const FeatureMatrix no_targets(0, source.features.cols());
  return fit_class_subspaces(source.features, source.labels, no_targets, empty_state(0), config);
}

} // namespace pas
