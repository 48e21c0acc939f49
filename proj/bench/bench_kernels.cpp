// Serial vs OpenMP batch kernels on a trained-size football model.

#include <benchmark/benchmark.h>

#include "alvq/dataset.hpp"
#include "alvq/kernels.hpp"
#include "alvq/model.hpp"

namespace {

struct Fixture {
  alvq::LabeledDataset data;
  alvq::PrototypeModel model;

  explicit Fixture(std::size_t n) : data(alvq::generate_football(n, 7)) {
    alvq::TrainingConfig cfg;
    cfg.prototypes_per_class = 6;
    cfg.beta = 30.0;
    model = alvq::init_model(data, cfg, alvq::Variant::AngleLocal);
  }
};

const Fixture& fixture(std::size_t n) {
  static Fixture small(1000), large(25000);
  return n <= 1000 ? small : large;
}

void BM_PredictSerial(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(alvq::kernels::serial::predict_all(f.model, f.data));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_PredictParallel(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(alvq::kernels::predict_all(f.model, f.data));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.data.size()));
  st.counters["threads"] = alvq::kernels::max_threads();
}

void BM_EvaluateSerial(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(alvq::kernels::serial::evaluate(f.model, f.data));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.data.size()));
}

void BM_EvaluateParallel(benchmark::State& st) {
  const auto& f = fixture(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(alvq::kernels::evaluate(f.model, f.data));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(f.data.size()));
  st.counters["threads"] = alvq::kernels::max_threads();
}

}  // namespace

BENCHMARK(BM_PredictSerial)->Arg(1000)->Arg(25000);
BENCHMARK(BM_PredictParallel)->Arg(1000)->Arg(25000);
BENCHMARK(BM_EvaluateSerial)->Arg(1000)->Arg(25000);
BENCHMARK(BM_EvaluateParallel)->Arg(1000)->Arg(25000);

BENCHMARK_MAIN();
