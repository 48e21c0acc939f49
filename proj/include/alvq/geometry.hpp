#pragma once

// Dissimilarity measures of the LVQ family and their analytic gradients.
//
// Angle variants compute a (possibly transformed) cosine b between a sample x
// and a prototype w and map it through g_beta into [0, 1]. Dimensions that are
// not observed in x are dropped from both x and w for that evaluation, which is
// the same as deleting the corresponding columns of the transform.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alvq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Non-owning view of one sample: D values plus a D-long observed mask
/// (nonzero = observed). Values at unobserved positions are never read.
struct SampleView {
  std::span<const double> values;
  std::span<const std::uint8_t> present;

  std::size_t dim() const { return values.size(); }
  bool fully_observed() const;
  std::size_t observed_count() const;
};

/// Owning sample, convenient for tests and synthetic points.
struct Sample {
  std::vector<double> values;
  std::vector<std::uint8_t> present;

  static Sample observed(std::vector<double> v);
  SampleView view() const { return {values, present}; }
};

struct AngleParams {
  double beta = 1.0;
};

/// Global transform Omega (M x D). Lambda = Omega^T Omega.
struct GlobalMatrix {
  Matrix omega;
};

enum class Attachment { ClassWise, PrototypeWise };

/// One M x D metric tensor per class (or per prototype).
struct LocalMatrix {
  std::vector<Matrix> psi;
  Attachment attachment = Attachment::ClassWise;
};

/// Shared projection Omega (M x D) followed by a per-class M x M tensor.
struct TwoMatrix {
  Matrix omega;
  std::vector<Matrix> psi;
};

inline constexpr double kDegenerateNorm = 1e-12;

// ---- angle transfer function ----

double g_beta(double b, AngleParams p);
double g_beta_derivative(double b, AngleParams p);

// ---- angles ----

/// Cosine between x and w over the dimensions observed in x.
double cosine_available(SampleView x, const Vector& w);

double angle_global(SampleView x, const Vector& w, const GlobalMatrix& m);
double angle_local(SampleView x, const Vector& w, const LocalMatrix& m, std::size_t c);
double angle_twomatrix(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c);

/// Cosine of T x~ and T w~ where ~ restricts to the observed dims of x.
double angle_transformed(SampleView x, const Vector& w, const Matrix& transform);

// ---- gradients of d = g_beta(b) (angle) or d = |T(x-w)|^2 (Euclidean) ----

struct Gradient {
  double value = 0.0;  // the dissimilarity d itself
  Vector grad_w;
  Matrix grad_first;   // Omega (global / 2-matrix) or Psi (local)
  Matrix grad_second;  // Psi for 2-matrix variants, empty otherwise
};

Gradient angle_global_grads(SampleView x, const Vector& w, const GlobalMatrix& m, AngleParams p);
Gradient angle_local_grads(SampleView x, const Vector& w, const LocalMatrix& m, std::size_t c,
                           AngleParams p);
Gradient angle_twomatrix_grads(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c,
                               AngleParams p);

/// |T(x - w)|^2. Rejects samples with unobserved dims.
double euclid_quadform(SampleView x, const Vector& w, const Matrix& transform);
double euclid_twomatrix(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c);

Gradient euclid_quadform_grads(SampleView x, const Vector& w, const Matrix& transform);
Gradient euclid_twomatrix_grads(SampleView x, const Vector& w, const TwoMatrix& m, std::size_t c);

// ---- matrix helpers ----

/// Scales m in place so that trace(m^T m) == 1. Leaves an all-zero matrix alone.
void normalize_trace(Matrix& m);

/// First `rows` rows of the D x D identity, scaled to unit trace.
Matrix truncated_identity(Eigen::Index rows, Eigen::Index cols);

}  // namespace alvq
