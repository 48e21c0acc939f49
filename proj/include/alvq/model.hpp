#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "alvq/dataset.hpp"
#include "alvq/geometry.hpp"

namespace alvq {

enum class Variant {
  EuclidGlobal,
  EuclidLocal,
  EuclidTwoMatrix,
  AngleGlobal,
  AngleLocal,
  AngleTwoMatrix,
};

/// Short CLI code: eg, el, e2m, ag, al, a2m.
std::string_view variant_code(Variant v);
/// Long name used in model documents: euclid-global, ..., angle-2matrix.
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view text);

bool is_angle(Variant v);

using Matrices = std::variant<std::monostate, GlobalMatrix, LocalMatrix, TwoMatrix>;

struct TrainingMeta {
  std::uint64_t seed = 0;
  int epochs = 0;
  double lr_prototype = 0.0;
  double lr_matrix = 0.0;
};

struct PrototypeModel {
  Variant variant = Variant::AngleGlobal;
  std::vector<Vector> prototypes;
  std::vector<int> proto_labels;
  Matrices matrices;
  AngleParams angle;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  TrainingMeta meta;

  std::size_t dim() const { return prototypes.empty() ? 0 : static_cast<std::size_t>(prototypes.front().size()); }
  std::size_t num_prototypes() const { return prototypes.size(); }
  /// Rows of the (first) adaptive matrix, i.e. the rank M.
  Eigen::Index rank() const;

  /// Throws FormatError when matrix shapes disagree with the variant.
  void validate() const;
};

bool operator==(const PrototypeModel& a, const PrototypeModel& b);

enum class LrSchedule { Constant, InverseEpoch };

struct TrainingConfig {
  int prototypes_per_class = 1;
  int epochs = 300;
  double lr_prototype = 0.05;
  double lr_matrix = 0.005;
  LrSchedule lr_decay = LrSchedule::InverseEpoch;
  double beta = 1.0;
  /// Rank M of Omega / Psi. 0 selects full rank (M = D).
  int rank = 0;
  std::uint64_t seed = 1;
  int normalize_matrices_every = 1;
  Attachment attachment = Attachment::ClassWise;
  /// Record cost and error after every epoch.
  bool record_trace = true;

  /// Throws ConfigError on an invalid combination.
  void validate() const;
  double decay(int epoch) const;
};

struct MarginTerms {
  double dJ = 0.0;
  double dK = 0.0;
  std::size_t jdx = 0;
  std::size_t kdx = 0;

  double mu() const;
};

struct GammaWeights {
  double gammaJ;
  double gammaK;
};

/// Dissimilarity between x and prototype k under the model's variant.
double dissimilarity(const PrototypeModel& model, SampleView x, std::size_t k);

/// Dissimilarity and its gradients with respect to prototype k and the
/// matrix that prototype k uses.
Gradient dissimilarity_grads(const PrototypeModel& model, SampleView x, std::size_t k);

/// Index of the matrix in a LocalMatrix / TwoMatrix stack used by prototype k.
std::size_t matrix_slot(const PrototypeModel& model, std::size_t k);

PrototypeModel init_model(const LabeledDataset& ds, const TrainingConfig& cfg, Variant variant);

MarginTerms margin_terms(const PrototypeModel& model, SampleView x, int label);
/// Throws ZeroDenominator when dJ + dK <= 1e-12 * scale.
GammaWeights gamma_weights(const MarginTerms& t, double scale = 1.0);

/// Size of d near a perfect match: |g_beta'(1)| for angle variants, where
/// d ~ |g'(1)| (1 - b), and 1 for squared distances.
double dissimilarity_scale(const PrototypeModel& model);

/// Sum of relative distances mu over all samples.
double cost(const PrototypeModel& model, const LabeledDataset& ds);

int predict(const PrototypeModel& model, SampleView x);

/// One stochastic gradient step on sample x. `step` counts updates so far and
/// drives matrix re-normalization. Returns the margin terms before the update.
MarginTerms sgd_step(PrototypeModel& model, SampleView x, int label, const TrainingConfig& cfg,
                     int epoch, std::uint64_t step);

struct EpochRecord {
  int epoch;
  double cost;
  double error;
};

struct TrainResult {
  PrototypeModel model;
  std::vector<EpochRecord> trace;
  std::size_t skipped_steps = 0;
};

TrainResult train(const LabeledDataset& ds, const TrainingConfig& cfg, Variant variant);

/// Rescales every adaptive matrix to unit trace.
void normalize_matrices(PrototypeModel& model);

bool all_finite(const PrototypeModel& model);

}  // namespace alvq
