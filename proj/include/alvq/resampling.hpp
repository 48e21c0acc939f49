#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>

#include "alvq/dataset.hpp"

namespace alvq {

enum class OversampleVariant { Euclidean, Geodesic };

struct OversampleConfig {
  int k = 3;
  /// Per-class target size; defaults to the majority-class count.
  std::optional<std::size_t> target;
  std::uint64_t seed = 1;
  OversampleVariant variant = OversampleVariant::Euclidean;
  /// Receives a message when k is clamped for a small class.
  std::function<void(std::string_view)> on_warning;
};

/// Classic SMOTE: x + u (x_nn - x).
LabeledDataset smote(const LabeledDataset& ds, const OversampleConfig& cfg);
/// Geodesic SMOTE: slerp of the directions, linear blend of the magnitudes.
LabeledDataset smote_geodesic(const LabeledDataset& ds, const OversampleConfig& cfg);
/// Dispatches on cfg.variant.
LabeledDataset oversample(const LabeledDataset& ds, const OversampleConfig& cfg);

/// Synthetic point between a and b at parameter u. Cells unobserved in either
/// parent come out unobserved.
Sample interpolate_linear(SampleView a, SampleView b, double u);
Sample interpolate_geodesic(SampleView a, SampleView b, double u);

/// Indices (into `candidates`) of the k nearest neighbours of candidates[self],
/// excluding itself; ties go to the lower index.
std::vector<std::size_t> nearest_neighbours(const LabeledDataset& ds,
                                            const std::vector<std::size_t>& candidates,
                                            std::size_t self, std::size_t k,
                                            OversampleVariant metric);

}  // namespace alvq
