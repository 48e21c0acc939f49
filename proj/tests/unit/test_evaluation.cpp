#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "alvq/error.hpp"
#include "alvq/evaluation.hpp"
#include "support/gen.hpp"

using namespace alvq;

namespace {

LabeledDataset with_counts(std::vector<std::size_t> counts) {
  LabeledDataset ds;
  ds.values.resize(0, 2);
  ds.present.resize(0, 2);
  ds.feature_names = {"a", "b"};
  for (std::size_t c = 0; c < counts.size(); ++c) {
    ds.class_names.push_back("k" + std::to_string(c));
    for (std::size_t i = 0; i < counts[c]; ++i) {
      const Sample s = Sample::observed({1.0 + static_cast<double>(i), static_cast<double>(c) + 1.0});
      ds.append(s.view(), static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("k-fold sizes differ by at most one") {
  const LabeledDataset ds = with_counts({13});
  const FoldSplit split = stratified_kfold(ds, 5, 1);
  std::vector<std::size_t> sizes;
  for (int f = 0; f < 5; ++f) sizes.push_back(split.test_indices(f).size());
  std::sort(sizes.rbegin(), sizes.rend());
  CHECK(sizes == std::vector<std::size_t>{3, 3, 3, 2, 2});
}

TEST_CASE("stratified folds partition the data and balance every class") {
  gen::Rng r(61);
  for (int t = 0; t < 30; ++t) {
    const std::size_t classes = static_cast<std::size_t>(r.integer(2, 5));
    std::vector<std::size_t> counts;
    const int k = r.integer(2, 6);
    for (std::size_t c = 0; c < classes; ++c) counts.push_back(static_cast<std::size_t>(r.integer(k, 40)));
    const LabeledDataset ds = with_counts(counts);
    const FoldSplit split = stratified_kfold(ds, k, static_cast<std::uint64_t>(t));
    std::vector<std::size_t> seen;
    for (int f = 0; f < k; ++f) {
      const auto test = split.test_indices(f);
      const auto train = split.train_indices(f);
      CHECK(test.size() + train.size() == ds.size());
      seen.insert(seen.end(), test.begin(), test.end());
      for (std::size_t c = 0; c < classes; ++c) {
        const auto n = std::count_if(test.begin(), test.end(),
                                     [&](std::size_t i) { return ds.labels[i] == static_cast<int>(c); });
        const double ideal = static_cast<double>(counts[c]) / k;
        CHECK(std::abs(static_cast<double>(n) - ideal) < 1.0);
      }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<std::size_t> all(ds.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    CHECK(seen == all);
  }
}

TEST_CASE("too many folds for a class names it") {
  const LabeledDataset ds = with_counts({164, 55, 36, 35, 13});
  try {
    stratified_kfold(ds, 25, 1);
    FAIL("expected ClassTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClassTooSmall);
    CHECK(std::string(e.what()).find("class 4") != std::string::npos);
  }
}

TEST_CASE("metrics") {
  // true:  0 0 0 1 1 2
  // pred:  0 1 0 1 2 2
  const Metrics m = compute_metrics({0, 1, 0, 1, 2, 2}, {0, 0, 0, 1, 1, 2}, 3, {1, 2});
  CHECK(m.error == doctest::Approx(2.0 / 6.0));
  CHECK(*m.specificity == doctest::Approx(2.0 / 3.0));
  CHECK(*m.sensitivity == doctest::Approx(2.0 / 3.0));
  CHECK(*m.classwise_accuracy[1] == doctest::Approx(0.5));
  CHECK(m.confusion[1][2] == 1);

  const Metrics missing = compute_metrics({0, 0}, {0, 0}, 2, {1});
  CHECK(!missing.sensitivity.has_value());
  CHECK(!missing.classwise_accuracy[1].has_value());
  CHECK(missing.error == 0.0);
}

TEST_CASE("eigen profile and relevances") {
  PrototypeModel m;
  m.variant = Variant::AngleGlobal;
  m.class_names = {"a", "b"};
  m.prototypes = {Vector::Ones(3), -Vector::Ones(3)};
  m.proto_labels = {0, 1};
  Matrix omega = Matrix::Zero(3, 3);
  omega(0, 0) = std::sqrt(0.7);
  omega(1, 1) = std::sqrt(0.295);
  omega(2, 2) = std::sqrt(0.005);
  m.matrices = GlobalMatrix{omega};
  const auto eig = eigen_relevance(m);
  REQUIRE(eig.size() == 1);
  CHECK(eig[0].eigenvalues[0] == doctest::Approx(0.7));
  CHECK(eig[0].effective_rank == 2);
  const auto rel = feature_relevances(m);
  CHECK(rel[0].relevances[2] == doctest::Approx(0.005));
  CHECK(std::accumulate(rel[0].relevances.begin(), rel[0].relevances.end(), 0.0) == doctest::Approx(1.0));

  gen::Rng r(62);
  const PrototypeModel low = gen::model(r, Variant::AngleGlobal, 6, 3, 2, 1, 1.0);
  for (const auto& e : eigen_relevance(low)) {
    CHECK(e.effective_rank <= 3);
    for (std::size_t i = 3; i < e.eigenvalues.size(); ++i) CHECK(e.eigenvalues[i] < 1e-9);
  }
  const PrototypeModel local = gen::model(r, Variant::AngleLocal, 4, 4, 5, 1, 1.0);
  CHECK(feature_relevances(local).size() == 5);
}

TEST_CASE("fold preprocessing fits on the training split only") {
  gen::Rng r(63);
  ExperimentSpec spec;
  spec.data = gen::dataset(r, 90, 3, 3, 0.1);
  spec.oversampling = Oversampling::SmoteGeodesic;
  const FoldSplit split = stratified_kfold(spec.data, 3, 1);
  const FoldData fd = prepare_fold(spec, split, 0, 7);
  REQUIRE(fd.zscore.has_value());
  const ZScoreParams refit = zscore_fit(spec.data.subset(split.train_indices(0)));
  CHECK(fd.zscore->mean.isApprox(refit.mean));
  CHECK(fd.train_original.size() == split.train_indices(0).size());
  const auto counts = fd.train.class_counts();
  CHECK(std::set<std::size_t>(counts.begin(), counts.end()).size() == 1);
  CHECK(fd.test.size() == split.test_indices(0).size());
}

TEST_CASE("run_experiment is deterministic and summarises every config") {
  gen::Rng r(64);
  ExperimentSpec spec;
  spec.data = gen::dataset(r, 80, 4, 2, 0.1);
  spec.base.epochs = 5;
  spec.betas = {1.0, 5.0};
  spec.ranks = {2};
  spec.folds = 4;
  spec.runs = 2;
  const CVReport a = run_experiment(spec);
  const CVReport b = run_experiment(spec);
  CHECK(report_to_json(a) == report_to_json(b));
  CHECK(report_to_csv(a) == report_to_csv(b));
  CHECK(a.cells.size() == 2 * 4 * 2);
  CHECK(a.summaries.size() == 2);
  CHECK(a.preprocessing == "zscore");

  const auto& s = a.summaries[a.selected];
  for (const auto& other : a.summaries) CHECK(s.train_error.mean <= other.train_error.mean);

  // Summary by hand for config 0.
  std::vector<double> errs;
  for (const auto& c : a.cells) if (c.config == 0) errs.push_back(c.test.error);
  const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
  double ss = 0.0;
  for (double e : errs) ss += (e - mean) * (e - mean);
  CHECK(a.summaries[0].test_error.mean == doctest::Approx(mean));
  CHECK(a.summaries[0].test_error.std_all == doctest::Approx(std::sqrt(ss / (errs.size() - 1))));

  const auto doc = nlohmann::json::parse(report_to_json(a));
  CHECK(doc["cells"].size() == 16);
  CHECK(doc["summaries"][0].contains("test_error"));

  ExperimentSpec euclid = spec;
  euclid.variant = Variant::EuclidGlobal;
  CHECK_THROWS_AS(run_experiment(euclid), Error);
}

TEST_CASE("derived seeds differ across cells") {
  std::set<std::uint64_t> seeds;
  for (std::uint64_t a = 0; a < 10; ++a)
    for (std::uint64_t b = 0; b < 10; ++b) seeds.insert(derive_seed(1, a, b));
  CHECK(seeds.size() == 100);
}
