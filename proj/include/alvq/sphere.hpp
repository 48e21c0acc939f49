#pragma once

// Plot-ready samples of the spherical classification space of rank-2/3
// angle models.

#include <optional>
#include <string>
#include <vector>

#include "alvq/dataset.hpp"
#include "alvq/model.hpp"

namespace alvq {

struct SphereExport {
  int rank = 0;
  std::vector<Vector> grid;  // unit directions in the reduced space
  std::vector<int> grid_class;
  std::vector<Vector> prototypes;  // normalized Omega w
  std::vector<int> proto_labels;
  std::vector<Vector> data;  // normalized Omega x~, if data was given
  std::vector<int> data_labels;
  std::vector<std::uint8_t> data_correct;
  std::size_t skipped_data = 0;  // samples with no direction in the reduced space
  std::vector<std::string> class_names;
};

/// n^2 quasi-uniform unit directions: a Fibonacci sphere for M = 3, evenly
/// spaced angles on the circle for M = 2.
std::vector<Vector> direction_grid(int rank, int resolution);

/// Class of a reduced-space direction u, scored against the reduced images of
/// the prototypes with g_beta of the (Psi-transformed) cosine.
int classify_direction(const PrototypeModel& model, const Vector& u);

/// Unit-norm image of x under the model's shared projection.
Vector project_sample(const PrototypeModel& model, SampleView x);

/// Supports angle-global and angle-2matrix models. Throws RankUnsupported
/// unless M is 2 or 3.
SphereExport export_sphere(const PrototypeModel& model, int resolution,
                           const LabeledDataset* data = nullptr);

/// Columns: kind,class,correct,u1..uM with kind in {grid, prototype, data}.
std::string sphere_to_csv(const SphereExport& e);

/// Number of class changes met when walking `steps` points around the great
/// circle spanned by orthonormal a and b (cyclic).
int great_circle_changes(const PrototypeModel& model, const Vector& a, const Vector& b, int steps);

}  // namespace alvq
