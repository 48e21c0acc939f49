#include <doctest.h>

#include "alvq/kernels.hpp"
#include "support/gen.hpp"

using namespace alvq;

TEST_CASE("parallel kernels match the serial reference") {
  gen::Rng r(31);
  for (Variant v : {Variant::AngleGlobal, Variant::AngleLocal, Variant::AngleTwoMatrix,
                    Variant::EuclidGlobal, Variant::EuclidLocal, Variant::EuclidTwoMatrix}) {
    const bool angle = is_angle(v);
    const LabeledDataset ds = gen::dataset(r, 300, 5, 3, angle ? 0.2 : 0.0);
    const PrototypeModel m = gen::model(r, v, 5, 3, 3, 2, 10.0);

    CHECK(kernels::predict_all(m, ds) == kernels::serial::predict_all(m, ds));
    const auto pm = kernels::margins_all(m, ds);
    const auto sm = kernels::serial::margins_all(m, ds);
    REQUIRE(pm.size() == sm.size());
    for (std::size_t i = 0; i < pm.size(); ++i) {
      CHECK(pm[i].dJ == sm[i].dJ);
      CHECK(pm[i].dK == sm[i].dK);
      CHECK(pm[i].jdx == sm[i].jdx);
      CHECK(pm[i].kdx == sm[i].kdx);
    }
    CHECK(kernels::dissimilarity_matrix(m, ds) == kernels::serial::dissimilarity_matrix(m, ds));
    const auto pe = kernels::evaluate(m, ds);
    const auto se = kernels::serial::evaluate(m, ds);
    CHECK(pe.cost == doctest::Approx(se.cost).epsilon(1e-12));
    CHECK(pe.error == se.error);
  }
}

TEST_CASE("batch kernels agree with per-sample functions") {
  gen::Rng r(32);
  const LabeledDataset ds = gen::dataset(r, 100, 4, 2, 0.2);
  const PrototypeModel m = gen::model(r, Variant::AngleGlobal, 4, 2, 2, 3, 5.0);
  const auto preds = kernels::serial::predict_all(m, ds);
  const RowMatrix d = kernels::serial::dissimilarity_matrix(m, ds);
  std::size_t wrong = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(preds[i] == predict(m, ds.sample(i)));
    for (std::size_t k = 0; k < m.num_prototypes(); ++k) {
      CHECK(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) == dissimilarity(m, ds.sample(i), k));
    }
    if (preds[i] != ds.labels[i]) ++wrong;
    total += margin_terms(m, ds.sample(i), ds.labels[i]).mu();
  }
  const auto e = kernels::serial::evaluate(m, ds);
  CHECK(e.error == doctest::Approx(static_cast<double>(wrong) / 100.0));
  CHECK(e.cost == doctest::Approx(total));
  CHECK(e.cost == doctest::Approx(cost(m, ds)));
}
