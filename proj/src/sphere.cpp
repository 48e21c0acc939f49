#include "alvq/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "alvq/error.hpp"

namespace alvq {

namespace {

const Matrix& shared_projection(const PrototypeModel& model) {
  if (const auto* g = std::get_if<GlobalMatrix>(&model.matrices)) {
    if (model.variant == Variant::AngleGlobal) return g->omega;
  }
  if (const auto* t = std::get_if<TwoMatrix>(&model.matrices)) {
    if (model.variant == Variant::AngleTwoMatrix) return t->omega;
  }
  throw Error(ErrorCode::RankUnsupported,
              std::string("sphere export needs an angle-global or angle-2matrix model, got ") +
                  std::string(variant_name(model.variant)));
}

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < kDegenerateNorm || nb < kDegenerateNorm) {
    throw Error(ErrorCode::DegenerateVector, "zero vector in the reduced space");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

Vector unit(const Vector& v) {
  const double n = v.norm();
  if (n < kDegenerateNorm) throw Error(ErrorCode::DegenerateVector, "zero vector in the reduced space");
  return v / n;
}

}  // namespace

std::vector<Vector> direction_grid(int rank, int resolution) {
  if (rank != 2 && rank != 3) {
    throw Error(ErrorCode::RankUnsupported, "sphere export needs rank 2 or 3, got " + std::to_string(rank));
  }
  if (resolution < 1) throw Error(ErrorCode::ConfigError, "resolution must be >= 1");
  const int n = resolution * resolution;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(n));
  if (rank == 2) {
    for (int i = 0; i < n; ++i) {
      const double t = 2.0 * std::numbers::pi * i / n;
      Vector u(2);
      u << std::cos(t), std::sin(t);
      out.push_back(u);
    }
    return out;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    Vector u(3);
    u << r * std::cos(phi), r * std::sin(phi), z;
    out.push_back(u / u.norm());
  }
  return out;
}

int classify_direction(const PrototypeModel& model, const Vector& u) {
  const Matrix& omega = shared_projection(model);
  const auto* two = std::get_if<TwoMatrix>(&model.matrices);
  double best = std::numeric_limits<double>::infinity();
  int label = -1;
  for (std::size_t k = 0; k < model.num_prototypes(); ++k) {
    const Vector p = omega * model.prototypes[k];
    double b;
    if (two) {
      const Matrix& psi = two->psi[matrix_slot(model, k)];
      b = cosine(psi * u, psi * p);
    } else {
      b = cosine(u, p);
    }
    const double d = g_beta(b, model.angle);
    if (d < best) {
      best = d;
      label = model.proto_labels[k];
    }
  }
  return label;
}

Vector project_sample(const PrototypeModel& model, SampleView x) {
  const Matrix& omega = shared_projection(model);
  Vector v = Vector::Zero(omega.rows());
  for (std::size_t j = 0; j < x.dim(); ++j) {
    if (x.present[j]) v += omega.col(static_cast<Eigen::Index>(j)) * x.values[j];
  }
  return unit(v);
}

SphereExport export_sphere(const PrototypeModel& model, int resolution, const LabeledDataset* data) {
  const Matrix& omega = shared_projection(model);
  SphereExport e;
  e.rank = static_cast<int>(omega.rows());
  e.class_names = model.class_names;
  e.grid = direction_grid(e.rank, resolution);
  e.grid_class.reserve(e.grid.size());
  for (const auto& u : e.grid) e.grid_class.push_back(classify_direction(model, u));
  for (std::size_t k = 0; k < model.num_prototypes(); ++k) {
    e.prototypes.push_back(unit(omega * model.prototypes[k]));
    e.proto_labels.push_back(model.proto_labels[k]);
  }
  if (data) {
    if (data->dim() != model.dim()) throw Error(ErrorCode::FormatError, "data dimension does not match the model");
    for (std::size_t i = 0; i < data->size(); ++i) {
      const SampleView x = data->sample(i);
      Vector u;
      try {
        u = project_sample(model, x);
      } catch (const Error& err) {
        if (err.code() != ErrorCode::DegenerateVector) throw;
        ++e.skipped_data;  // observed part lies in the null space of Omega
        continue;
      }
      e.data.push_back(std::move(u));
      e.data_labels.push_back(data->labels[i]);
      e.data_correct.push_back(predict(model, x) == data->labels[i] ? 1 : 0);
    }
  }
  return e;
}

std::string sphere_to_csv(const SphereExport& e) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,class,correct";
  for (int m = 1; m <= e.rank; ++m) out << ",u" << m;
  out << '\n';
  auto row = [&](const char* kind, int label, const char* correct, const Vector& u) {
    out << kind << ',' << e.class_names.at(static_cast<std::size_t>(label)) << ',' << correct;
    for (Eigen::Index m = 0; m < u.size(); ++m) out << ',' << u[m];
    out << '\n';
  };
  for (std::size_t i = 0; i < e.grid.size(); ++i) row("grid", e.grid_class[i], "", e.grid[i]);
  for (std::size_t k = 0; k < e.prototypes.size(); ++k) row("prototype", e.proto_labels[k], "", e.prototypes[k]);
  for (std::size_t i = 0; i < e.data.size(); ++i) {
    row("data", e.data_labels[i], e.data_correct[i] ? "1" : "0", e.data[i]);
  }
  return out.str();
}

int great_circle_changes(const PrototypeModel& model, const Vector& a, const Vector& b, int steps) {
  int changes = 0;
  int first = -1;
  int prev = -1;
  for (int s = 0; s < steps; ++s) {
    const double t = 2.0 * std::numbers::pi * s / steps;
    const int c = classify_direction(model, std::cos(t) * a + std::sin(t) * b);
    if (s == 0) {
      first = c;
    } else if (c != prev) {
      ++changes;
    }
    prev = c;
  }
  if (steps > 1 && prev != first) ++changes;
  return changes;
}

}  // namespace alvq
