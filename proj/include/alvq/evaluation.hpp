#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "alvq/dataset.hpp"
#include "alvq/model.hpp"
#include "alvq/resampling.hpp"

namespace alvq {

// ---- folds ----

struct FoldSplit {
  std::vector<int> fold;  // fold id per sample
  int k = 0;
  bool stratified = true;
  std::uint64_t seed = 0;

  std::vector<std::size_t> train_indices(int f) const;
  std::vector<std::size_t> test_indices(int f) const;
};

/// Stratified assignment; per-class fold counts differ by at most one.
/// Throws ClassTooSmall naming the first class with fewer than k samples.
FoldSplit stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed);

// ---- metrics ----

struct Metrics {
  double error = 0.0;
  /// Pooled exact-class recall over the positive (disease) classes.
  std::optional<double> sensitivity;
  /// Recall over the remaining (healthy) classes.
  std::optional<double> specificity;
  /// Per-class recall; nullopt when the class does not occur.
  std::vector<std::optional<double>> classwise_accuracy;
  /// confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
};

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                        std::size_t num_classes, const std::set<int>& positive_classes);

/// Classes 1..C-1 are the positive (disease) classes.
std::set<int> default_positive_classes(std::size_t num_classes);

// ---- interpretability ----

inline constexpr double kEffectiveRankThreshold = 0.01;

struct EigenProfile {
  std::string matrix;               // "omega", "psi[0]", ...
  std::vector<double> eigenvalues;  // descending, nonnegative
  int effective_rank = 0;           // eigenvalues above threshold * trace
};

struct RelevanceProfile {
  std::string matrix;
  std::vector<double> relevances;  // diagonal of Lambda
};

/// Eigenvalues of Lambda = Omega^T Omega (or Psi^T Psi) for every adaptive matrix.
std::vector<EigenProfile> eigen_relevance(const PrototypeModel& model,
                                          double threshold = kEffectiveRankThreshold);
std::vector<RelevanceProfile> feature_relevances(const PrototypeModel& model);

// ---- experiments ----

enum class Oversampling { None, Smote, SmoteGeodesic };

struct ExperimentSpec {
  LabeledDataset data;
  std::optional<LabeledDataset> holdout;
  Variant variant = Variant::AngleGlobal;
  TrainingConfig base;  // beta / prototypes_per_class / rank overridden by the grid
  std::vector<double> betas{1.0};
  std::vector<int> prototypes_per_class{1};
  std::vector<int> ranks{0};
  int folds = 5;
  int runs = 1;
  bool zscore = true;
  Oversampling oversampling = Oversampling::None;
  int smote_k = 3;
  std::set<int> positive_classes;  // empty: classes 1..C-1
  std::uint64_t seed = 1;
  bool keep_models = false;
};

struct GridPoint {
  double beta;
  int prototypes_per_class;
  int rank;
};

struct CellResult {
  std::size_t config = 0;
  int run = 0;
  int fold = 0;
  Metrics train;
  Metrics test;
  std::optional<Metrics> holdout;
  std::vector<EigenProfile> eigen;
  std::vector<RelevanceProfile> relevances;
  std::size_t train_size = 0;  // after oversampling
  std::optional<PrototypeModel> model;
};

struct Summary {
  double mean = 0.0;
  double std_all = 0.0;    // sample std over all fold x run cells
  double std_folds = 0.0;  // sample std over folds, averaged over runs
  std::size_t count = 0;   // cells where the value is defined
};

struct ConfigSummary {
  GridPoint point;
  Summary train_error, test_error, sensitivity, specificity;
  std::vector<Summary> classwise;
  std::optional<Summary> holdout_error, holdout_sensitivity, holdout_specificity;
  double median_effective_rank = 0.0;  // first matrix
};

struct CVReport {
  Variant variant;
  std::vector<GridPoint> grid;
  int folds = 0;
  int runs = 0;
  std::string preprocessing;  // applied order, e.g. "zscore,smote-geodesic"
  std::vector<CellResult> cells;
  std::vector<ConfigSummary> summaries;
  std::size_t selected = 0;  // best mean training error, then lower test std
  std::vector<std::string> class_names;
};

/// Per-fold preprocessing: z-score fitted on the training rows, applied to
/// both splits; oversampling applied to the training split only.
struct FoldData {
  LabeledDataset train;           // preprocessed, oversampled
  LabeledDataset train_original;  // preprocessed, no synthetic rows
  LabeledDataset test;
  std::optional<ZScoreParams> zscore;
};

FoldData prepare_fold(const ExperimentSpec& spec, const FoldSplit& split, int fold,
                      std::uint64_t cell_seed);

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec);

CVReport run_experiment(const ExperimentSpec& spec);

/// Recomputes a summary from stored cells of one config.
ConfigSummary summarize(const CVReport& report, std::size_t config);

std::string report_to_json(const CVReport& report);
/// One row per fold x run x config.
std::string report_to_csv(const CVReport& report);

/// Deterministic 64-bit mix used to derive per-run / per-fold seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

}  // namespace alvq
