#pragma once

// Random instances and brute-force reference computations shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "alvq/dataset.hpp"
#include "alvq/geometry.hpp"
#include "alvq/model.hpp"

namespace gen {

using alvq::Matrix;
using alvq::Vector;

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(eng);
  }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  Vector vec(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Matrix mat(Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  }
  /// At least `min_observed` observed entries.
  alvq::Sample masked_sample(std::size_t d, double p_missing, std::size_t min_observed = 1) {
    alvq::Sample s;
    s.values.resize(d);
    s.present.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      s.values[j] = normal();
      s.present[j] = coin(p_missing) ? 0 : 1;
    }
    while (std::count(s.present.begin(), s.present.end(), 1) < static_cast<long>(std::min(min_observed, d))) {
      s.present[static_cast<std::size_t>(integer(0, static_cast<int>(d) - 1))] = 1;
    }
    return s;
  }
};

/// Small labelled dataset, every class populated.
inline alvq::LabeledDataset dataset(Rng& r, std::size_t n, std::size_t d, std::size_t classes,
                                    double p_missing = 0.0) {
  alvq::LabeledDataset ds;
  ds.values.resize(0, static_cast<Eigen::Index>(d));
  ds.present.resize(0, static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t c = 0; c < classes; ++c) ds.class_names.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i < classes ? static_cast<int>(i) : r.integer(0, static_cast<int>(classes) - 1);
    alvq::Sample s = r.masked_sample(d, p_missing);
    // Shift by class so classes are not pure noise.
    for (std::size_t j = 0; j < d; ++j) s.values[j] += (label % 2 ? 1.5 : -1.5) * (j % 2 ? 1 : -1);
    for (std::size_t j = 0; j < d; ++j) if (!s.present[j]) s.values[j] = 0.0;
    ds.append(s.view(), label);
  }
  return ds;
}

/// Random model of the given variant with valid shapes.
inline alvq::PrototypeModel model(Rng& r, alvq::Variant v, Eigen::Index d, Eigen::Index m,
                                  int classes, int ppc, double beta) {
  alvq::PrototypeModel pm;
  pm.variant = v;
  pm.angle.beta = beta;
  for (int c = 0; c < classes; ++c) {
    pm.class_names.push_back("c" + std::to_string(c));
    for (int p = 0; p < ppc; ++p) {
      pm.prototypes.push_back(r.vec(d));
      pm.proto_labels.push_back(c);
    }
  }
  using alvq::Variant;
  switch (v) {
    case Variant::EuclidGlobal:
    case Variant::AngleGlobal:
      pm.matrices = alvq::GlobalMatrix{r.mat(m, d)};
      break;
    case Variant::EuclidLocal:
    case Variant::AngleLocal: {
      alvq::LocalMatrix lm;
      for (int c = 0; c < classes; ++c) lm.psi.push_back(r.mat(m, d));
      pm.matrices = lm;
      break;
    }
    case Variant::EuclidTwoMatrix:
    case Variant::AngleTwoMatrix: {
      alvq::TwoMatrix tm{r.mat(m, d), {}};
      for (int c = 0; c < classes; ++c) tm.psi.push_back(r.mat(m, m));
      pm.matrices = tm;
      break;
    }
  }
  return pm;
}

// ---- oracles ----

/// Cosine via explicit sub-vectors: keep only the observed coordinates, apply
/// the matching columns of T.
inline double restricted_cosine(const alvq::Sample& x, const Vector& w, const Matrix& t) {
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < x.values.size(); ++j)
    if (x.present[j]) keep.push_back(static_cast<Eigen::Index>(j));
  const auto k = static_cast<Eigen::Index>(keep.size());
  Matrix tk(t.rows(), k);
  Vector xk(k), wk(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    tk.col(i) = t.col(keep[static_cast<std::size_t>(i)]);
    xk[i] = x.values[static_cast<std::size_t>(keep[static_cast<std::size_t>(i)])];
    wk[i] = w[keep[static_cast<std::size_t>(i)]];
  }
  const Vector u = tk * xk;
  const Vector v = tk * wk;
  return std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
}

/// Two-stage version: psi applied to the restricted projection omega x~.
inline double restricted_cosine(const alvq::Sample& x, const Vector& w, const Matrix& omega, const Matrix& psi) {
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < x.values.size(); ++j)
    if (x.present[j]) keep.push_back(static_cast<Eigen::Index>(j));
  const auto k = static_cast<Eigen::Index>(keep.size());
  Matrix ok(omega.rows(), k);
  Vector xk(k), wk(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Index j = keep[static_cast<std::size_t>(i)];
    ok.col(i) = omega.col(j);
    xk[i] = x.values[static_cast<std::size_t>(j)];
    wk[i] = w[j];
  }
  const Vector u = psi * (ok * xk);
  const Vector v = psi * (ok * wk);
  return std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
}

inline double g_ref(double b, double beta) {
  return (std::exp(-beta * (b - 1.0)) - 1.0) / (std::exp(2.0 * beta) - 1.0);
}

/// Scan all prototypes: nearest correct and nearest wrong, first index wins ties.
struct BruteMargins {
  double dJ, dK;
  std::size_t jdx, kdx;
};

inline BruteMargins brute_margins(const alvq::PrototypeModel& m, alvq::SampleView x, int label) {
  BruteMargins b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0, 0};
  for (std::size_t k = 0; k < m.num_prototypes(); ++k) {
    const double d = alvq::dissimilarity(m, x, k);
    if (m.proto_labels[k] == label) {
      if (d < b.dJ) { b.dJ = d; b.jdx = k; }
    } else {
      if (d < b.dK) { b.dK = d; b.kdx = k; }
    }
  }
  return b;
}

inline int brute_predict(const alvq::PrototypeModel& m, alvq::SampleView x) {
  double best = std::numeric_limits<double>::infinity();
  int label = -1;
  for (std::size_t k = 0; k < m.num_prototypes(); ++k) {
    const double d = alvq::dissimilarity(m, x, k);
    if (d < best) { best = d; label = m.proto_labels[k]; }
  }
  return label;
}

}  // namespace gen

namespace gen {

/// Central finite differences of f with respect to every entry of `param`
/// (modified in place and restored).
template <class F, class P>
P central_difference(F&& f, P& param, double h) {
  P grad = P::Zero(param.rows(), param.cols());
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    const double keep = param.data()[i];
    param.data()[i] = keep + h;
    const double up = f();
    param.data()[i] = keep - h;
    const double down = f();
    param.data()[i] = keep;
    grad.data()[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// max |a - b| relative to the largest entry, never dividing by less than `floor`.
template <class A, class B>
double rel_error(const A& a, const B& b, double floor) {
  const double scale = std::max({floor, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace gen
