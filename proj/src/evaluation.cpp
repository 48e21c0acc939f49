#include "alvq/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "alvq/error.hpp"
#include "alvq/kernels.hpp"

namespace alvq {

using nlohmann::json;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a simple combination.
  auto mix = [](std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0xD6E8FEB86659FD93ULL));
}

// ---- folds ----

std::vector<std::size_t> FoldSplit::train_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] != f) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldSplit::test_indices(int f) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold.size(); ++i) {
    if (fold[i] == f) out.push_back(i);
  }
  return out;
}

FoldSplit stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::ConfigError, "cross-validation needs at least 2 folds");
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] < static_cast<std::size_t>(k)) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + std::to_string(c) + " ('" + ds.class_names[c] + "') has " +
                      std::to_string(counts[c]) + " samples, fewer than " + std::to_string(k) +
                      " folds");
    }
  }
  FoldSplit split;
  split.k = k;
  split.seed = seed;
  split.fold.assign(ds.size(), 0);
  std::mt19937_64 rng(seed);
  std::size_t offset = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] == static_cast<int>(c)) members.push_back(i);
    }
    std::shuffle(members.begin(), members.end(), rng);
    // Continue the round-robin where the previous class stopped so total
    // fold sizes also stay balanced.
    for (std::size_t m = 0; m < members.size(); ++m) {
      split.fold[members[m]] = static_cast<int>((offset + m) % static_cast<std::size_t>(k));
    }
    offset = (offset + members.size()) % static_cast<std::size_t>(k);
  }
  return split;
}

// ---- metrics ----

std::set<int> default_positive_classes(std::size_t num_classes) {
  std::set<int> out;
  for (std::size_t c = 1; c < num_classes; ++c) out.insert(static_cast<int>(c));
  return out;
}

Metrics compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                        std::size_t num_classes, const std::set<int>& positive_classes) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::ConfigError, "prediction and label vectors differ in length");
  }
  Metrics m;
  m.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto t = static_cast<std::size_t>(labels[i]);
    const auto p = static_cast<std::size_t>(predictions[i]);
    if (t >= num_classes || p >= num_classes) throw Error(ErrorCode::ConfigError, "class id out of range");
    ++m.confusion[t][p];
    if (t == p) ++correct;
  }
  m.error = labels.empty() ? 0.0 : 1.0 - static_cast<double>(correct) / static_cast<double>(labels.size());

  std::size_t pos_hit = 0, pos_n = 0, neg_hit = 0, neg_n = 0;
  m.classwise_accuracy.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    const std::size_t n = std::accumulate(m.confusion[c].begin(), m.confusion[c].end(), std::size_t{0});
    const std::size_t hit = m.confusion[c][c];
    if (n > 0) m.classwise_accuracy[c] = static_cast<double>(hit) / static_cast<double>(n);
    if (positive_classes.count(static_cast<int>(c))) {
      pos_hit += hit;
      pos_n += n;
    } else {
      neg_hit += hit;
      neg_n += n;
    }
  }
  if (pos_n > 0) m.sensitivity = static_cast<double>(pos_hit) / static_cast<double>(pos_n);
  if (neg_n > 0) m.specificity = static_cast<double>(neg_hit) / static_cast<double>(neg_n);
  return m;
}

// ---- interpretability ----

namespace {

struct NamedLambda {
  std::string name;
  Matrix lambda;
};

std::vector<NamedLambda> lambdas_of(const PrototypeModel& model) {
  std::vector<NamedLambda> out;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        auto push_stack = [&](const std::vector<Matrix>& stack) {
          for (std::size_t c = 0; c < stack.size(); ++c) {
            out.push_back({"psi[" + std::to_string(c) + "]", stack[c].transpose() * stack[c]});
          }
        };
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          out.push_back({"omega", m.omega.transpose() * m.omega});
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          push_stack(m.psi);
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          out.push_back({"omega", m.omega.transpose() * m.omega});
          push_stack(m.psi);
        }
      },
      model.matrices);
  return out;
}

}  // namespace

std::vector<EigenProfile> eigen_relevance(const PrototypeModel& model, double threshold) {
  std::vector<EigenProfile> out;
  for (const auto& [name, lambda] : lambdas_of(model)) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(lambda, Eigen::EigenvaluesOnly);
    EigenProfile p;
    p.matrix = name;
    const Vector ev = solver.eigenvalues();
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i) p.eigenvalues.push_back(std::max(0.0, ev[i]));
    const double trace = std::accumulate(p.eigenvalues.begin(), p.eigenvalues.end(), 0.0);
    p.effective_rank = static_cast<int>(std::count_if(
        p.eigenvalues.begin(), p.eigenvalues.end(), [&](double v) { return v > threshold * trace; }));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<RelevanceProfile> feature_relevances(const PrototypeModel& model) {
  std::vector<RelevanceProfile> out;
  for (const auto& [name, lambda] : lambdas_of(model)) {
    const Vector diag = lambda.diagonal();
    out.push_back({name, std::vector<double>(diag.data(), diag.data() + diag.size())});
  }
  return out;
}

// ---- experiments ----

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  for (int ppc : spec.prototypes_per_class) {
    for (int rank : spec.ranks) {
      for (double beta : spec.betas) grid.push_back({beta, ppc, rank});
    }
  }
  if (grid.empty()) throw Error(ErrorCode::ConfigError, "empty hyperparameter grid");
  return grid;
}

FoldData prepare_fold(const ExperimentSpec& spec, const FoldSplit& split, int fold,
                      std::uint64_t cell_seed) {
  FoldData fd;
  LabeledDataset train = spec.data.subset(split.train_indices(fold));
  LabeledDataset test = spec.data.subset(split.test_indices(fold));
  if (spec.zscore) {
    fd.zscore = zscore_fit(train);
    train = zscore_apply(train, *fd.zscore);
    test = zscore_apply(test, *fd.zscore);
  }
  fd.train_original = train;
  if (spec.oversampling != Oversampling::None) {
    OversampleConfig oc;
    oc.k = spec.smote_k;
    oc.seed = derive_seed(cell_seed, 0x5307E);
    oc.variant = spec.oversampling == Oversampling::SmoteGeodesic ? OversampleVariant::Geodesic
                                                                   : OversampleVariant::Euclidean;
    train = oversample(train, oc);
  }
  fd.train = std::move(train);
  fd.test = std::move(test);
  return fd;
}

namespace {

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Values indexed by cell; nullopt where undefined.
Summary summarize_values(const std::vector<const CellResult*>& cells,
                         const std::vector<std::optional<double>>& values, int runs) {
  Summary s;
  std::vector<double> all;
  for (const auto& v : values) {
    if (v) all.push_back(*v);
  }
  s.count = all.size();
  s.mean = mean_of(all);
  s.std_all = sample_std(all);
  std::vector<double> per_run_std;
  for (int r = 0; r < runs; ++r) {
    std::vector<double> run_vals;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (cells[i]->run == r && values[i]) run_vals.push_back(*values[i]);
    }
    if (run_vals.size() >= 2) per_run_std.push_back(sample_std(run_vals));
  }
  s.std_folds = mean_of(per_run_std);
  return s;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

ConfigSummary summarize(const CVReport& report, std::size_t config) {
  std::vector<const CellResult*> cells;
  for (const auto& c : report.cells) {
    if (c.config == config) cells.push_back(&c);
  }
  auto collect = [&](auto getter) {
    std::vector<std::optional<double>> out;
    for (const auto* c : cells) out.push_back(getter(*c));
    return out;
  };
  ConfigSummary s;
  s.point = report.grid.at(config);
  s.train_error = summarize_values(cells, collect([](const CellResult& c) -> std::optional<double> { return c.train.error; }), report.runs);
  s.test_error = summarize_values(cells, collect([](const CellResult& c) -> std::optional<double> { return c.test.error; }), report.runs);
  s.sensitivity = summarize_values(cells, collect([](const CellResult& c) { return c.test.sensitivity; }), report.runs);
  s.specificity = summarize_values(cells, collect([](const CellResult& c) { return c.test.specificity; }), report.runs);
  const std::size_t classes = report.class_names.size();
  for (std::size_t k = 0; k < classes; ++k) {
    s.classwise.push_back(summarize_values(
        cells, collect([k](const CellResult& c) { return c.test.classwise_accuracy.at(k); }), report.runs));
  }
  if (!cells.empty() && cells.front()->holdout) {
    s.holdout_error = summarize_values(cells, collect([](const CellResult& c) -> std::optional<double> { return c.holdout->error; }), report.runs);
    s.holdout_sensitivity = summarize_values(cells, collect([](const CellResult& c) { return c.holdout->sensitivity; }), report.runs);
    s.holdout_specificity = summarize_values(cells, collect([](const CellResult& c) { return c.holdout->specificity; }), report.runs);
  }
  std::vector<double> ranks;
  for (const auto* c : cells) {
    if (!c->eigen.empty()) ranks.push_back(c->eigen.front().effective_rank);
  }
  s.median_effective_rank = median_of(ranks);
  return s;
}

CVReport run_experiment(const ExperimentSpec& spec) {
  spec.data.validate();
  spec.base.validate();
  if (spec.runs < 1) throw Error(ErrorCode::ConfigError, "runs must be >= 1");
  if (!is_angle(spec.variant) && spec.data.has_missing()) {
    throw Error(ErrorCode::MissingNotSupported,
                std::string(variant_name(spec.variant)) + " does not accept missing values");
  }

  CVReport report;
  report.variant = spec.variant;
  report.grid = expand_grid(spec);
  report.folds = spec.folds;
  report.runs = spec.runs;
  report.class_names = spec.data.class_names;
  report.preprocessing = spec.zscore ? "zscore" : "none";
  if (spec.oversampling == Oversampling::Smote) report.preprocessing += ",smote";
  if (spec.oversampling == Oversampling::SmoteGeodesic) report.preprocessing += ",smote-geodesic";

  const auto positives = spec.positive_classes.empty()
                             ? default_positive_classes(spec.data.num_classes())
                             : spec.positive_classes;

  // Splits first: ClassTooSmall surfaces before any training.
  std::vector<FoldSplit> splits;
  for (int r = 0; r < spec.runs; ++r) {
    splits.push_back(stratified_kfold(spec.data, spec.folds, derive_seed(spec.seed, 0xF01D, r)));
  }

  const std::size_t n_configs = report.grid.size();
  const std::size_t n_cells = n_configs * static_cast<std::size_t>(spec.runs * spec.folds);
  report.cells.resize(n_cells);

  std::exception_ptr first_error;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long idx = 0; idx < static_cast<long long>(n_cells); ++idx) {
    try {
      const auto cell_idx = static_cast<std::size_t>(idx);
      const std::size_t config = cell_idx / static_cast<std::size_t>(spec.runs * spec.folds);
      const int rem = static_cast<int>(cell_idx % static_cast<std::size_t>(spec.runs * spec.folds));
      const int run = rem / spec.folds;
      const int fold = rem % spec.folds;
      // Same seed for every config in a cell so configs see identical data and init noise.
      const std::uint64_t cell_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(run) + 1,
                                                  static_cast<std::uint64_t>(fold) + 1);
      const FoldData fd = prepare_fold(spec, splits[static_cast<std::size_t>(run)], fold, cell_seed);

      TrainingConfig cfg = spec.base;
      cfg.beta = report.grid[config].beta;
      cfg.prototypes_per_class = report.grid[config].prototypes_per_class;
      cfg.rank = report.grid[config].rank;
      cfg.seed = cell_seed;
      cfg.record_trace = false;
      const TrainResult tr = train(fd.train, cfg, spec.variant);

      CellResult cell;
      cell.config = config;
      cell.run = run;
      cell.fold = fold;
      cell.train_size = fd.train.size();
      const auto classes = spec.data.num_classes();
      cell.train = compute_metrics(kernels::serial::predict_all(tr.model, fd.train_original),
                                   fd.train_original.labels, classes, positives);
      cell.test = compute_metrics(kernels::serial::predict_all(tr.model, fd.test), fd.test.labels,
                                  classes, positives);
      if (spec.holdout) {
        const LabeledDataset hold =
            fd.zscore ? zscore_apply(*spec.holdout, *fd.zscore) : *spec.holdout;
        cell.holdout = compute_metrics(kernels::serial::predict_all(tr.model, hold), hold.labels,
                                       classes, positives);
      }
      cell.eigen = eigen_relevance(tr.model);
      cell.relevances = feature_relevances(tr.model);
      if (spec.keep_models) cell.model = tr.model;
      report.cells[cell_idx] = std::move(cell);
    } catch (...) {
#pragma omp critical(alvq_experiment_error)
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  for (std::size_t c = 0; c < n_configs; ++c) report.summaries.push_back(summarize(report, c));

  // Model selection: lowest mean training error, then lowest test-error std.
  report.selected = 0;
  for (std::size_t c = 1; c < n_configs; ++c) {
    const auto& a = report.summaries[c];
    const auto& b = report.summaries[report.selected];
    if (a.train_error.mean < b.train_error.mean ||
        (a.train_error.mean == b.train_error.mean && a.test_error.std_all < b.test_error.std_all)) {
      report.selected = c;
    }
  }
  return report;
}

// ---- report output ----

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const Metrics& m) {
  json cw = json::array();
  for (const auto& v : m.classwise_accuracy) cw.push_back(opt(v));
  return {{"error", m.error},
          {"sensitivity", opt(m.sensitivity)},
          {"specificity", opt(m.specificity)},
          {"classwise_accuracy", cw},
          {"confusion", m.confusion}};
}

json summary_json(const Summary& s) {
  return {{"mean", s.mean}, {"std_all", s.std_all}, {"std_folds", s.std_folds}, {"count", s.count}};
}

std::string csv_opt(const std::optional<double>& v) {
  if (!v) return "NA";
  std::ostringstream ss;
  ss.precision(17);
  ss << *v;
  return ss.str();
}

}  // namespace

std::string report_to_json(const CVReport& report) {
  json doc;
  doc["format_version"] = 1;
  doc["variant"] = std::string(variant_name(report.variant));
  doc["folds"] = report.folds;
  doc["runs"] = report.runs;
  doc["preprocessing"] = report.preprocessing;
  doc["class_names"] = report.class_names;
  json grid = json::array();
  for (const auto& g : report.grid) {
    grid.push_back({{"beta", g.beta}, {"prototypes_per_class", g.prototypes_per_class}, {"rank", g.rank}});
  }
  doc["grid"] = grid;
  json summaries = json::array();
  for (std::size_t c = 0; c < report.summaries.size(); ++c) {
    const auto& s = report.summaries[c];
    json cw = json::array();
    for (const auto& x : s.classwise) cw.push_back(summary_json(x));
    json js = {{"config", c},
               {"train_error", summary_json(s.train_error)},
               {"test_error", summary_json(s.test_error)},
               {"sensitivity", summary_json(s.sensitivity)},
               {"specificity", summary_json(s.specificity)},
               {"classwise_accuracy", cw},
               {"median_effective_rank", s.median_effective_rank}};
    if (s.holdout_error) {
      js["holdout_error"] = summary_json(*s.holdout_error);
      js["holdout_sensitivity"] = summary_json(*s.holdout_sensitivity);
      js["holdout_specificity"] = summary_json(*s.holdout_specificity);
    }
    summaries.push_back(js);
  }
  doc["summaries"] = summaries;
  doc["selected"] = report.selected;
  json cells = json::array();
  for (const auto& c : report.cells) {
    json eig = json::array();
    for (const auto& e : c.eigen) {
      eig.push_back({{"matrix", e.matrix}, {"eigenvalues", e.eigenvalues}, {"effective_rank", e.effective_rank}});
    }
    json rel = json::array();
    for (const auto& r : c.relevances) rel.push_back({{"matrix", r.matrix}, {"relevances", r.relevances}});
    json jc = {{"config", c.config}, {"run", c.run},          {"fold", c.fold},
               {"train", metrics_json(c.train)}, {"test", metrics_json(c.test)},
               {"train_size", c.train_size},     {"eigen", eig}, {"relevances", rel}};
    if (c.holdout) jc["holdout"] = metrics_json(*c.holdout);
    cells.push_back(jc);
  }
  doc["cells"] = cells;
  return doc.dump(1) + "\n";
}

std::string report_to_csv(const CVReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "config,beta,prototypes_per_class,rank,run,fold,train_error,test_error,sensitivity,specificity";
  for (std::size_t c = 0; c < report.class_names.size(); ++c) out << ",acc_" << report.class_names[c];
  out << ",holdout_error,effective_rank\n";
  for (const auto& c : report.cells) {
    const auto& g = report.grid[c.config];
    out << c.config << ',' << g.beta << ',' << g.prototypes_per_class << ',' << g.rank << ',' << c.run
        << ',' << c.fold << ',' << c.train.error << ',' << c.test.error << ','
        << csv_opt(c.test.sensitivity) << ',' << csv_opt(c.test.specificity);
    for (const auto& v : c.test.classwise_accuracy) out << ',' << csv_opt(v);
    out << ',' << (c.holdout ? csv_opt(c.holdout->error) : std::string("NA")) << ','
        << (c.eigen.empty() ? std::string("NA") : std::to_string(c.eigen.front().effective_rank)) << '\n';
  }
  return out.str();
}

}  // namespace alvq
