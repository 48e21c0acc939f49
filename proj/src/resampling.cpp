#include "alvq/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "alvq/error.hpp"

namespace alvq {

namespace {

constexpr double kSlerpMinAngle = 1e-8;

double euclid_masked(SampleView a, SampleView b) {
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (a.present[j] && b.present[j]) {
      const double d = a.values[j] - b.values[j];
      ss += d * d;
      ++n;
    }
  }
  if (n == 0) return std::numeric_limits<double>::infinity();
  return std::sqrt(ss * static_cast<double>(a.dim()) / static_cast<double>(n));
}

double angle_masked(SampleView a, SampleView b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (a.present[j] && b.present[j]) {
      dot += a.values[j] * b.values[j];
      na += a.values[j] * a.values[j];
      nb += b.values[j] * b.values[j];
    }
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kDegenerateNorm || nb < kDegenerateNorm) return std::numeric_limits<double>::infinity();
  return std::acos(std::clamp(dot / (na * nb), -1.0, 1.0));
}

LabeledDataset oversample_impl(const LabeledDataset& ds, const OversampleConfig& cfg,
                               OversampleVariant variant) {
  ds.validate();
  if (cfg.k < 1) throw Error(ErrorCode::ConfigError, "oversampling needs k >= 1");
  const auto counts = ds.class_counts();
  const std::size_t target =
      cfg.target.value_or(*std::max_element(counts.begin(), counts.end()));

  LabeledDataset out = ds;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] >= target) continue;
    if (counts[c] < 2) {
      throw Error(ErrorCode::TooFewSamples,
                  "class '" + ds.class_names[c] + "' has fewer than 2 samples to oversample from");
    }
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == static_cast<int>(c)) members.push_back(i);
    }
    std::size_t k = static_cast<std::size_t>(cfg.k);
    if (k >= members.size()) {
      k = members.size() - 1;
      if (cfg.on_warning) {
        cfg.on_warning("k clamped to " + std::to_string(k) + " for class '" + ds.class_names[c] + "'");
      }
    }
    std::vector<std::vector<std::size_t>> neighbours(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      neighbours[m] = nearest_neighbours(ds, members, m, k, variant);
    }
    const std::size_t needed = target - counts[c];
    for (std::size_t s = 0; s < needed; ++s) {
      const std::size_t base = s % members.size();
      const auto& nn = neighbours[base];
      std::uniform_int_distribution<std::size_t> pick(0, nn.size() - 1);
      const std::size_t other = members[nn[pick(rng)]];
      const double u = unit(rng);
      const SampleView a = ds.sample(members[base]);
      const SampleView b = ds.sample(other);
      const Sample synth = variant == OversampleVariant::Geodesic ? interpolate_geodesic(a, b, u)
                                                                  : interpolate_linear(a, b, u);
      out.append(synth.view(), static_cast<int>(c));
    }
  }
  return out;
}

}  // namespace

std::vector<std::size_t> nearest_neighbours(const LabeledDataset& ds,
                                            const std::vector<std::size_t>& candidates,
                                            std::size_t self, std::size_t k,
                                            OversampleVariant metric) {
  std::vector<std::pair<double, std::size_t>> dist;
  const SampleView x = ds.sample(candidates[self]);
  for (std::size_t m = 0; m < candidates.size(); ++m) {
    if (m == self) continue;
    const SampleView y = ds.sample(candidates[m]);
    const double d = metric == OversampleVariant::Geodesic ? angle_masked(x, y) : euclid_masked(x, y);
    dist.emplace_back(d, m);
  }
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
  return out;
}

Sample interpolate_linear(SampleView a, SampleView b, double u) {
  Sample s;
  s.values.assign(a.dim(), 0.0);
  s.present.assign(a.dim(), 0);
  for (std::size_t j = 0; j < a.dim(); ++j) {
    if (a.present[j] && b.present[j]) {
      s.values[j] = a.values[j] + u * (b.values[j] - a.values[j]);
      s.present[j] = 1;
    }
  }
  return s;
}

Sample interpolate_geodesic(SampleView a, SampleView b, double u) {
  const std::size_t d = a.dim();
  Vector va = Vector::Zero(static_cast<Eigen::Index>(d));
  Vector vb = Vector::Zero(static_cast<Eigen::Index>(d));
  Sample s;
  s.values.assign(d, 0.0);
  s.present.assign(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    if (a.present[j] && b.present[j]) {
      va[static_cast<Eigen::Index>(j)] = a.values[j];
      vb[static_cast<Eigen::Index>(j)] = b.values[j];
      s.present[j] = 1;
    }
  }
  const double na = va.norm();
  const double nb = vb.norm();
  if (na < kDegenerateNorm || nb < kDegenerateNorm) {
    throw Error(ErrorCode::DegenerateVector, "geodesic oversampling needs nonzero-norm samples");
  }
  const Vector ua = va / na;
  const Vector ub = vb / nb;
  const double theta = std::acos(std::clamp(ua.dot(ub), -1.0, 1.0));
  const double sin_theta = std::sin(theta);
  Vector out;
  if (theta < kSlerpMinAngle || sin_theta < kSlerpMinAngle) {
    out = va + u * (vb - va);
  } else {
    const Vector dir =
        (std::sin((1.0 - u) * theta) / sin_theta) * ua + (std::sin(u * theta) / sin_theta) * ub;
    out = ((1.0 - u) * na + u * nb) * dir;
  }
  for (std::size_t j = 0; j < d; ++j) {
    if (s.present[j]) s.values[j] = out[static_cast<Eigen::Index>(j)];
  }
  return s;
}

LabeledDataset smote(const LabeledDataset& ds, const OversampleConfig& cfg) {
  return oversample_impl(ds, cfg, OversampleVariant::Euclidean);
}

LabeledDataset smote_geodesic(const LabeledDataset& ds, const OversampleConfig& cfg) {
  return oversample_impl(ds, cfg, OversampleVariant::Geodesic);
}

LabeledDataset oversample(const LabeledDataset& ds, const OversampleConfig& cfg) {
  return oversample_impl(ds, cfg, cfg.variant);
}

}  // namespace alvq
