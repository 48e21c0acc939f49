#include "alvq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alvq/error.hpp"

namespace alvq {

namespace {

double clamp_cos(double b) { return std::clamp(b, -1.0, 1.0); }

void check_dims(SampleView x, const Vector& w) {
  if (x.values.size() != x.present.size() || static_cast<Eigen::Index>(x.dim()) != w.size()) {
    throw Error(ErrorCode::FormatError, "sample/prototype dimension mismatch");
  }
}

// x and w restricted to the observed dims of x; unobserved slots become 0.
struct Restricted {
  Vector x;
  Vector w;
  Vector mask;
};

Restricted restrict_pair(SampleView x, const Vector& w) {
  check_dims(x, w);
  const auto d = static_cast<Eigen::Index>(x.dim());
  Restricted r{Vector::Zero(d), Vector::Zero(d), Vector::Zero(d)};
  bool any = false;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (x.present[j]) {
      r.x[j] = x.values[j];
      r.w[j] = w[j];
      r.mask[j] = 1.0;
      any = true;
    }
  }
  if (!any) throw Error(ErrorCode::EmptyMask, "sample has no observed dimension");
  return r;
}

Vector dense_observed(SampleView x) {
  if (!x.fully_observed()) {
    throw Error(ErrorCode::MissingNotSupported,
                "Euclidean dissimilarities do not accept unobserved dimensions");
  }
  return Eigen::Map<const Vector>(x.values.data(), static_cast<Eigen::Index>(x.dim()));
}

// Cosine of u and v plus the partial derivatives db/du and db/dv.
struct CosineParts {
  double b;
  Vector db_du;
  Vector db_dv;
};

CosineParts cosine_with_parts(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kDegenerateNorm || nv < kDegenerateNorm) {
    throw Error(ErrorCode::DegenerateVector, "vector norm below 1e-12 in angle computation");
  }
  const double raw = u.dot(v) / (nu * nv);
  CosineParts parts;
  parts.b = clamp_cos(raw);
  // Use the unclamped value inside the derivative so it stays exact.
  parts.db_du = v / (nu * nv) - raw * u / (nu * nu);
  parts.db_dv = u / (nu * nv) - raw * v / (nv * nv);
  return parts;
}

double cosine_of(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kDegenerateNorm || nv < kDegenerateNorm) {
    throw Error(ErrorCode::DegenerateVector, "vector norm below 1e-12 in angle computation");
  }
  return clamp_cos(u.dot(v) / (nu * nv));
}

const Matrix& local_psi(const LocalMatrix& m, std::size_t c) {
  if (c >= m.psi.size()) throw Error(ErrorCode::ConfigError, "local matrix index out of range");
  return m.psi[c];
}

const Matrix& twomatrix_psi(const TwoMatrix& m, std::size_t c) {
  if (c >= m.psi.size()) throw Error(ErrorCode::ConfigError, "class index out of range");
  return m.psi[c];
}

// d = g(b), b = cos(T x~, T w~). Returns grad wrt w and wrt T.
Gradient angle_grads_for(SampleView x, const Vector& w, const Matrix& t, AngleParams p) {
  const Restricted r = restrict_pair(x, w);
  const Vector u = t * r.x;
  const Vector v = t * r.w;
  const CosineParts parts = cosine_with_parts(u, v);
  const double dg = g_beta_derivative(parts.b, p);

  Gradient g;
  g.value = g_beta(parts.b, p);
  g.grad_w = (dg * (t.transpose() * parts.db_dv)).cwiseProduct(r.mask);
  g.grad_first = dg * (parts.db_du * r.x.transpose() + parts.db_dv * r.w.transpose());
  return g;
}

}  // namespace

bool SampleView::fully_observed() const {
  return std::all_of(present.begin(), present.end(), [](std::uint8_t b) { return b != 0; });
}

std::size_t SampleView::observed_count() const {
  return static_cast<std::size_t>(
      std::count_if(present.begin(), present.end(), [](std::uint8_t b) { return b != 0; }));
}

Sample Sample::observed(std::vector<double> v) {
  Sample s;
  s.present.assign(v.size(), 1);
  s.values = std::move(v);
  return s;
}

double g_beta(double b, AngleParams p) {
  return std::expm1(-p.beta * (b - 1.0)) / std::expm1(2.0 * p.beta);
}

double g_beta_derivative(double b, AngleParams p) {
  return -p.beta * std::exp(-p.beta * b + p.beta) / std::expm1(2.0 * p.beta);
}

double cosine_available(SampleView x, const Vector& w) {
  const Restricted r = restrict_pair(x, w);
  return cosine_of(r.x, r.w);
}

double angle_transformed(SampleView x, const Vector& w, const Matrix& transform) {
  const Restricted r = restrict_pair(x, w);
  return cosine_of(transform * r.x, transform * r.w);
}

double angle_global(SampleView x, const Vector& w, const GlobalMatrix& m) {
  return angle_transformed(x, w, m.omega);
}

double angle_local(SampleView x, const Vector& w, const LocalMatrix& m, std::size_t c) {
  return angle_transformed(x, w, local_psi(m, c));
}

double angle_twomatrix(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c) {
  const Restricted r = restrict_pair(x, w);
  const Matrix& psi = twomatrix_psi(m, c);
  return cosine_of(psi * (m.omega * r.x), psi * (m.omega * r.w));
}

Gradient angle_global_grads(SampleView x, const Vector& w, const GlobalMatrix& m,
                            AngleParams p) {
  return angle_grads_for(x, w, m.omega, p);
}

Gradient angle_local_grads(SampleView x, const Vector& w, const LocalMatrix& m, std::size_t c,
                           AngleParams p) {
  return angle_grads_for(x, w, local_psi(m, c), p);
}

Gradient angle_twomatrix_grads(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c,
                               AngleParams p) {
  const Restricted r = restrict_pair(x, w);
  const Matrix& psi = twomatrix_psi(m, c);
  const Vector px = m.omega * r.x;
  const Vector pw = m.omega * r.w;
  const CosineParts parts = cosine_with_parts(psi * px, psi * pw);
  const double dg = g_beta_derivative(parts.b, p);

  // G = dd/d(Psi Omega); chain into both factors.
  const Matrix g_composed =
      dg * (parts.db_du * r.x.transpose() + parts.db_dv * r.w.transpose());
  Gradient g;
  g.value = g_beta(parts.b, p);
  g.grad_w = (dg * (m.omega.transpose() * (psi.transpose() * parts.db_dv))).cwiseProduct(r.mask);
  g.grad_first = psi.transpose() * g_composed;
  g.grad_second = dg * (parts.db_du * px.transpose() + parts.db_dv * pw.transpose());
  return g;
}

double euclid_quadform(SampleView x, const Vector& w, const Matrix& transform) {
  check_dims(x, w);
  const Vector diff = dense_observed(x) - w;
  return (transform * diff).squaredNorm();
}

double euclid_twomatrix(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c) {
  check_dims(x, w);
  const Vector diff = dense_observed(x) - w;
  return (twomatrix_psi(m, c) * (m.omega * diff)).squaredNorm();
}

Gradient euclid_quadform_grads(SampleView x, const Vector& w, const Matrix& transform) {
  check_dims(x, w);
  const Vector diff = dense_observed(x) - w;
  const Vector td = transform * diff;
  Gradient g;
  g.value = td.squaredNorm();
  g.grad_w = -2.0 * (transform.transpose() * td);
  g.grad_first = 2.0 * td * diff.transpose();
  return g;
}

Gradient euclid_twomatrix_grads(SampleView x, const Vector& w, const TwoMatrix& m,
                                std::size_t c) {
  check_dims(x, w);
  const Matrix& psi = twomatrix_psi(m, c);
  const Vector diff = dense_observed(x) - w;
  const Vector pd = m.omega * diff;
  const Vector td = psi * pd;
  Gradient g;
  g.value = td.squaredNorm();
  g.grad_w = -2.0 * (m.omega.transpose() * (psi.transpose() * td));
  g.grad_first = 2.0 * (psi.transpose() * td) * diff.transpose();
  g.grad_second = 2.0 * td * pd.transpose();
  return g;
}

void normalize_trace(Matrix& m) {
  const double fro = m.norm();
  if (fro > 0.0) m /= fro;
}

Matrix truncated_identity(Eigen::Index rows, Eigen::Index cols) {
  Matrix m = Matrix::Identity(rows, cols);
  normalize_trace(m);
  return m;
}

}  // namespace alvq
