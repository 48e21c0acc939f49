#include "alvq/kernels.hpp"

#include <exception>

#include <omp.h>

namespace alvq::kernels {

namespace {

// Exceptions must not cross an OpenMP region boundary; keep the first one.
class FirstError {
 public:
  template <typename F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
#pragma omp critical(alvq_first_error)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

long long as_ll(std::size_t n) { return static_cast<long long>(n); }

}  // namespace

int max_threads() { return omp_get_max_threads(); }

std::vector<int> predict_all(const PrototypeModel& model, const LabeledDataset& ds) {
  std::vector<int> out(ds.size(), 0);
  FirstError err;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < as_ll(ds.size()); ++i) {
    err.run([&] { out[static_cast<std::size_t>(i)] = predict(model, ds.sample(static_cast<std::size_t>(i))); });
  }
  err.rethrow();
  return out;
}

std::vector<MarginTerms> margins_all(const PrototypeModel& model, const LabeledDataset& ds) {
  std::vector<MarginTerms> out(ds.size());
  FirstError err;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < as_ll(ds.size()); ++i) {
    const auto s = static_cast<std::size_t>(i);
    err.run([&] { out[s] = margin_terms(model, ds.sample(s), ds.labels[s]); });
  }
  err.rethrow();
  return out;
}

RowMatrix dissimilarity_matrix(const PrototypeModel& model, const LabeledDataset& ds) {
  const auto w = model.num_prototypes();
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(w));
  FirstError err;
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < as_ll(ds.size()); ++i) {
    const auto s = static_cast<std::size_t>(i);
    err.run([&] {
      for (std::size_t k = 0; k < w; ++k) out(i, static_cast<Eigen::Index>(k)) = dissimilarity(model, ds.sample(s), k);
    });
  }
  err.rethrow();
  return out;
}

Evaluation evaluate(const PrototypeModel& model, const LabeledDataset& ds) {
  // Per-sample terms first, then a fixed-order reduction, so the result does
  // not depend on the thread count.
  const auto margins = margins_all(model, ds);
  Evaluation e;
  std::size_t wrong = 0;
  for (const auto& t : margins) {
    e.cost += t.mu();
    // Misclassified iff a wrong prototype is strictly closer, or equally close
    // with a lower index (lowest-index tie-break in predict).
    if (t.dK < t.dJ || (t.dK == t.dJ && t.kdx < t.jdx)) ++wrong;
  }
  e.error = ds.size() ? static_cast<double>(wrong) / static_cast<double>(ds.size()) : 0.0;
  return e;
}

namespace serial {

std::vector<int> predict_all(const PrototypeModel& model, const LabeledDataset& ds) {
  std::vector<int> out(ds.size(), 0);
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = predict(model, ds.sample(i));
  return out;
}

std::vector<MarginTerms> margins_all(const PrototypeModel& model, const LabeledDataset& ds) {
  std::vector<MarginTerms> out(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = margin_terms(model, ds.sample(i), ds.labels[i]);
  return out;
}

RowMatrix dissimilarity_matrix(const PrototypeModel& model, const LabeledDataset& ds) {
  const auto w = model.num_prototypes();
  RowMatrix out(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(w));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t k = 0; k < w; ++k) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = dissimilarity(model, ds.sample(i), k);
    }
  }
  return out;
}

Evaluation evaluate(const PrototypeModel& model, const LabeledDataset& ds) {
  Evaluation e;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    e.cost += margin_terms(model, ds.sample(i), ds.labels[i]).mu();
    if (predict(model, ds.sample(i)) != ds.labels[i]) ++wrong;
  }
  e.error = ds.size() ? static_cast<double>(wrong) / static_cast<double>(ds.size()) : 0.0;
  return e;
}

}  // namespace serial

}  // namespace alvq::kernels
