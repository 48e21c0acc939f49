#pragma once

// Data-parallel batch kernels over the samples of a dataset.
//
// The default namespace runs with OpenMP; `serial` holds the plain loops the
// parallel versions are checked against in tests and in bench/.

#include <vector>

#include "alvq/dataset.hpp"
#include "alvq/model.hpp"

namespace alvq::kernels {

struct Evaluation {
  double cost = 0.0;   // sum of mu over all samples
  double error = 0.0;  // fraction misclassified
};

std::vector<int> predict_all(const PrototypeModel& model, const LabeledDataset& ds);
std::vector<MarginTerms> margins_all(const PrototypeModel& model, const LabeledDataset& ds);
/// S x W dissimilarities, row-major.
RowMatrix dissimilarity_matrix(const PrototypeModel& model, const LabeledDataset& ds);
Evaluation evaluate(const PrototypeModel& model, const LabeledDataset& ds);

namespace serial {

std::vector<int> predict_all(const PrototypeModel& model, const LabeledDataset& ds);
std::vector<MarginTerms> margins_all(const PrototypeModel& model, const LabeledDataset& ds);
RowMatrix dissimilarity_matrix(const PrototypeModel& model, const LabeledDataset& ds);
Evaluation evaluate(const PrototypeModel& model, const LabeledDataset& ds);

}  // namespace serial

/// Number of OpenMP threads the parallel kernels will use.
int max_threads();

}  // namespace alvq::kernels
