#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "alvq/geometry.hpp"

namespace alvq {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Samples (S x D, row-major) with an explicit per-cell observed mask and
/// integer labels in 0..C-1. Unobserved cells hold 0.0.
struct LabeledDataset {
  RowMatrix values;
  MaskMatrix present;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(values.cols()); }
  std::size_t num_classes() const { return class_names.size(); }

  SampleView sample(std::size_t i) const;
  Sample owned_sample(std::size_t i) const;
  std::vector<std::size_t> class_counts() const;
  std::size_t missing_cells() const;
  std::size_t samples_with_missing() const;
  bool has_missing() const { return missing_cells() > 0; }

  /// Throws FormatError if shapes or labels are inconsistent.
  void validate() const;

  /// Rows in the given order (duplicates allowed).
  LabeledDataset subset(const std::vector<std::size_t>& rows) const;

  /// Appends one row; values at unobserved positions are stored as 0.
  void append(SampleView x, int label);

  static LabeledDataset empty_like(const LabeledDataset& ds);
};

bool operator==(const LabeledDataset& a, const LabeledDataset& b);

// ---- z-score ----

struct ZScoreParams {
  Vector mean;
  Vector std;
};

ZScoreParams zscore_fit(const LabeledDataset& train);
LabeledDataset zscore_apply(const LabeledDataset& ds, const ZScoreParams& params);
LabeledDataset zscore_invert(const LabeledDataset& ds, const ZScoreParams& params);

// ---- football ----

/// 2 sinh(5 x1 x2 x3).
double football_function(double x1, double x2, double x3);
int football_label(double x1, double x2, double x3);

/// n points uniform on [-1, 1]^3 labelled by thresholding football_function at 0.5.
LabeledDataset generate_football(std::size_t n, std::uint64_t seed);

// ---- Cleveland heart disease ----

LabeledDataset parse_cleveland(std::string_view text);
LabeledDataset load_cleveland(const std::filesystem::path& path);

enum class ClassMode { Binary, FiveClass };
enum class MissingPolicy { KeepMinusNine, ToMissing };

LabeledDataset relabel(const LabeledDataset& ds, ClassMode mode, MissingPolicy policy);

// ---- generic CSV ----

struct CsvSchema {
  std::string label_column = "label";
  /// When non-empty, labels must be one of these (matched as text).
  std::vector<std::string> class_names;
};

LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema = {});
LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

std::string to_csv(const LabeledDataset& ds);
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace alvq
