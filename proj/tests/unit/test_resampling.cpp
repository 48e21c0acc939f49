#include <doctest.h>

#include <cmath>

#include "alvq/error.hpp"
#include "alvq/resampling.hpp"
#include "support/gen.hpp"

using namespace alvq;

namespace {

double angle(const Vector& a, const Vector& b) {
  return std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0));
}

Vector dense(const Sample& s) { return Eigen::Map<const Vector>(s.values.data(), static_cast<Eigen::Index>(s.values.size())); }
Vector dense(SampleView s) { return Eigen::Map<const Vector>(s.values.data(), static_cast<Eigen::Index>(s.values.size())); }

LabeledDataset imbalanced(gen::Rng& r, std::vector<std::size_t> sizes, std::size_t d, double p_missing) {
  LabeledDataset ds;
  ds.values.resize(0, static_cast<Eigen::Index>(d));
  ds.present.resize(0, static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < sizes[c]; ++i) {
      Sample s = r.masked_sample(d, p_missing);
      ds.append(s.view(), static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("geodesic interpolation stays on the great circle") {
  gen::Rng r(51);
  for (int t = 0; t < 500; ++t) {
    const auto d = static_cast<std::size_t>(r.integer(2, 8));
    std::vector<double> av(d), bv(d);
    for (std::size_t j = 0; j < d; ++j) {
      av[j] = r.normal();
      bv[j] = r.normal();
    }
    const Sample a = Sample::observed(av);
    const Sample b = Sample::observed(bv);
    const double u = r.uniform(0.0, 1.0);
    const Sample s = interpolate_geodesic(a.view(), b.view(), u);
    const Vector va = dense(a), vb = dense(b), vs = dense(s);
    CHECK(std::abs(angle(va, vs) + angle(vs, vb) - angle(va, vb)) < 1e-6);
    CHECK(std::abs(angle(va, vs) - u * angle(va, vb)) < 1e-6);
    CHECK(vs.norm() == doctest::Approx((1 - u) * va.norm() + u * vb.norm()).epsilon(1e-9));
  }
}

TEST_CASE("interpolation endpoints and masks") {
  const Sample a{{1.0, 0.0, 5.0}, {1, 1, 0}};
  const Sample b{{0.0, 2.0, 1.0}, {1, 1, 1}};
  const Sample s0 = interpolate_geodesic(a.view(), b.view(), 0.0);
  const Sample s1 = interpolate_geodesic(a.view(), b.view(), 1.0);
  CHECK(s0.values[0] == doctest::Approx(1.0));
  CHECK(s0.values[1] == doctest::Approx(0.0));
  CHECK(s1.values[0] == doctest::Approx(0.0));
  CHECK(s1.values[1] == doctest::Approx(2.0));
  CHECK(s0.present[2] == 0);
  const Sample lin = interpolate_linear(a.view(), b.view(), 0.25);
  CHECK(lin.values[0] == doctest::Approx(0.75));
  CHECK(lin.values[1] == doctest::Approx(0.5));
  CHECK(lin.present[2] == 0);

  // Parallel parents: falls back to linear.
  const Sample p = Sample::observed({1.0, 1.0});
  const Sample q = Sample::observed({3.0, 3.0});
  const Sample mid = interpolate_geodesic(p.view(), q.view(), 0.5);
  CHECK(mid.values[0] == doctest::Approx(2.0));

  const Sample zero = Sample::observed({0.0, 0.0});
  CHECK_THROWS_AS(interpolate_geodesic(zero.view(), q.view(), 0.5), Error);
}

TEST_CASE("oversampling balances every class and keeps the originals first") {
  gen::Rng r(52);
  for (auto variant : {OversampleVariant::Euclidean, OversampleVariant::Geodesic}) {
    const LabeledDataset ds = imbalanced(r, {40, 12, 7, 5, 3}, 6, 0.1);
    OversampleConfig cfg;
    cfg.variant = variant;
    cfg.seed = 3;
    const LabeledDataset out = oversample(ds, cfg);
    for (auto n : out.class_counts()) CHECK(n == 40);
    CHECK(out.subset([&] {
      std::vector<std::size_t> idx(ds.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      return idx;
    }()) == ds);
    CHECK(oversample(ds, cfg) == out);
  }
}

TEST_CASE("geodesic synthetic points lie between two same-class parents") {
  gen::Rng r(53);
  const LabeledDataset ds = imbalanced(r, {30, 8, 6}, 4, 0.0);
  OversampleConfig cfg;
  cfg.variant = OversampleVariant::Geodesic;
  const LabeledDataset out = smote_geodesic(ds, cfg);
  for (std::size_t i = ds.size(); i < out.size(); ++i) {
    const Vector s = dense(out.sample(i));
    double best = 1e9;
    for (std::size_t a = 0; a < ds.size(); ++a) {
      if (ds.labels[a] != out.labels[i]) continue;
      for (std::size_t b = 0; b < ds.size(); ++b) {
        if (b == a || ds.labels[b] != out.labels[i]) continue;
        const Vector va = dense(ds.sample(a)), vb = dense(ds.sample(b));
        best = std::min(best, std::abs(angle(va, s) + angle(s, vb) - angle(va, vb)));
      }
    }
    CHECK(best < 1e-6);
  }
}

TEST_CASE("k is clamped for tiny classes and singletons are rejected") {
  gen::Rng r(54);
  const LabeledDataset ds = imbalanced(r, {10, 3}, 3, 0.0);
  OversampleConfig cfg;
  cfg.k = 5;
  int warnings = 0;
  cfg.on_warning = [&](std::string_view) { ++warnings; };
  const LabeledDataset out = smote(ds, cfg);
  CHECK(warnings == 1);
  CHECK(out.class_counts()[1] == 10);

  const LabeledDataset single = imbalanced(r, {10, 1}, 3, 0.0);
  try {
    smote(single, cfg);
    FAIL("expected TooFewSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewSamples);
  }
}

TEST_CASE("nearest neighbours") {
  LabeledDataset ds = parse_csv("a,b,label\n0,0,0\n1,0,0\n5,0,0\n2,0,0\n");
  const std::vector<std::size_t> all{0, 1, 2, 3};
  CHECK(nearest_neighbours(ds, all, 0, 2, OversampleVariant::Euclidean) == std::vector<std::size_t>{1, 3});
  LabeledDataset dirs = parse_csv("a,b,label\n1,0,0\n10,1,0\n0,1,0\n1,1,0\n");
  CHECK(nearest_neighbours(dirs, all, 0, 2, OversampleVariant::Geodesic) == std::vector<std::size_t>{1, 3});
}
