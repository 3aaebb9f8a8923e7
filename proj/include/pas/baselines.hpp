#pragma once

#include "pas/core.hpp"
#include "pas/data.hpp"

#include <vector>

namespace pas {

//! Label of the Euclidean-nearest source row, ties to the lowest source index.
std::vector<int> nn1_classify(const LabeledDataset& source, const FeatureMatrix& Xt);

//! Initial subspaces only: per-class PCA on the source, no target refinement.
PasModel pas_c(const LabeledDataset& source, int dim);

} // namespace pas
