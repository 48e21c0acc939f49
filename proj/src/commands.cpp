#include "alvq/commands.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "alvq/dataset.hpp"
#include "alvq/error.hpp"
#include "alvq/evaluation.hpp"
#include "alvq/model.hpp"
#include "alvq/serialize.hpp"
#include "alvq/sphere.hpp"

namespace alvq {

namespace {

namespace fs = std::filesystem;

struct TrainFlags {
  std::string variant = "ag";
  int epochs = 300;
  double lr = 0.05;
  double lr_matrix = 0.005;
  std::string schedule = "inverse";
  std::string attachment = "class";
  std::uint64_t seed = 1;
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--variant", f.variant, "eg, el, e2m, ag, al or a2m")->capture_default_str();
  cmd->add_option("--epochs", f.epochs)->capture_default_str();
  cmd->add_option("--lr", f.lr, "prototype learning rate")->capture_default_str();
  cmd->add_option("--lr-matrix", f.lr_matrix, "matrix learning rate")->capture_default_str();
  cmd->add_option("--lr-schedule", f.schedule)
      ->check(CLI::IsMember({"inverse", "constant"}))
      ->capture_default_str();
  cmd->add_option("--attachment", f.attachment, "local matrices per class or per prototype")
      ->check(CLI::IsMember({"class", "prototype"}))
      ->capture_default_str();
  cmd->add_option("--seed", f.seed)->capture_default_str();
}

TrainingConfig to_config(const TrainFlags& f) {
  TrainingConfig cfg;
  cfg.epochs = f.epochs;
  cfg.lr_prototype = f.lr;
  cfg.lr_matrix = f.lr_matrix;
  cfg.lr_decay = f.schedule == "constant" ? LrSchedule::Constant : LrSchedule::InverseEpoch;
  cfg.attachment = f.attachment == "class" ? Attachment::ClassWise : Attachment::PrototypeWise;
  cfg.seed = f.seed;
  return cfg;
}

Variant to_variant(const std::string& text) {
  try {
    return parse_variant(text);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

std::string balance_line(const LabeledDataset& ds) {
  std::ostringstream out;
  out << "samples " << ds.size();
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out << ", class " << ds.class_names[c] << ": " << counts[c] << " ("
        << std::fixed << std::setprecision(3)
        << (ds.size() ? static_cast<double>(counts[c]) / static_cast<double>(ds.size()) : 0.0) << ")";
    out.unsetf(std::ios::fixed);
  }
  return out.str();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---- generate ----

struct GenerateArgs {
  std::string dataset = "football";
  std::size_t n = 5000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const LabeledDataset ds = generate_football(a.n, a.seed);
  write_csv(ds, a.out);
  out << balance_line(ds) << '\n';
  return 0;
}

// ---- train ----

struct TrainArgs {
  std::string data;
  TrainFlags flags;
  double beta = 1.0;
  int ppc = 1;
  int rank = 0;
  std::string out;
  std::string trace;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  TrainingConfig cfg = to_config(a.flags);
  cfg.beta = a.beta;
  cfg.prototypes_per_class = a.ppc;
  cfg.rank = a.rank;
  cfg.validate();
  const Variant variant = to_variant(a.flags.variant);
  const LabeledDataset ds = load_csv(a.data);
  const TrainResult result = train(ds, cfg, variant);
  save_model(result.model, a.out);

  std::ostringstream trace;
  trace << "epoch,cost,error\n";
  for (const auto& r : result.trace) trace << r.epoch << ',' << num(r.cost) << ',' << num(r.error) << '\n';
  const std::string trace_path = a.trace.empty() ? a.out + ".trace.csv" : a.trace;
  write_file(trace_path, trace.str());

  out << "trained " << variant_name(variant) << " on " << balance_line(ds) << '\n';
  if (!result.trace.empty()) {
    out << "final cost " << num(result.trace.back().cost) << ", training error "
        << num(result.trace.back().error) << '\n';
  }
  if (result.skipped_steps > 0) out << "skipped steps: " << result.skipped_steps << '\n';
  return 0;
}

// ---- crossval ----

struct CrossvalArgs {
  std::string data;
  std::string cleveland;
  std::string holdout;
  TrainFlags flags;
  std::vector<double> betas{1.0};
  std::vector<int> ppc{1};
  std::vector<int> ranks{0};
  int folds = 5;
  int runs = 1;
  std::string oversample = "none";
  int smote_k = 3;
  bool five_class = false;
  bool keep_minus_nine = false;
  bool no_zscore = false;
  std::string out;
};

int cmd_crossval(const CrossvalArgs& a, std::ostream& out) {
  ExperimentSpec spec;
  spec.base = to_config(a.flags);
  spec.base.validate();
  spec.variant = to_variant(a.flags.variant);
  spec.betas = a.betas;
  spec.prototypes_per_class = a.ppc;
  spec.ranks = a.ranks;
  spec.folds = a.folds;
  spec.runs = a.runs;
  spec.smote_k = a.smote_k;
  spec.seed = a.flags.seed;
  spec.zscore = !a.no_zscore;
  spec.oversampling = a.oversample == "smote"    ? Oversampling::Smote
                      : a.oversample == "smoteg" ? Oversampling::SmoteGeodesic
                                                 : Oversampling::None;

  if (!a.cleveland.empty()) {
    const auto mode = a.five_class ? ClassMode::FiveClass : ClassMode::Binary;
    const auto policy = a.keep_minus_nine ? MissingPolicy::KeepMinusNine : MissingPolicy::ToMissing;
    spec.data = relabel(load_cleveland(a.cleveland), mode, policy);
    if (!a.holdout.empty()) spec.holdout = relabel(load_cleveland(a.holdout), mode, policy);
  } else {
    spec.data = load_csv(a.data);
    if (!a.holdout.empty()) {
      CsvSchema schema;
      schema.class_names = spec.data.class_names;
      spec.holdout = load_csv(a.holdout, schema);
    }
  }

  const CVReport report = run_experiment(spec);
  write_file(a.out + ".json", report_to_json(report));
  write_file(a.out + ".csv", report_to_csv(report));

  const auto& s = report.summaries[report.selected];
  out << variant_name(report.variant) << ", " << report.folds << " folds x " << report.runs
      << " runs, " << report.grid.size() << " configs\n";
  out << "selected beta " << num(s.point.beta) << ", prototypes/class " << s.point.prototypes_per_class
      << ", rank " << s.point.rank << '\n';
  out << "train error " << num(s.train_error.mean) << " (" << num(s.train_error.std_all) << "), test error "
      << num(s.test_error.mean) << " (" << num(s.test_error.std_all) << ")\n";
  return 0;
}

// ---- inspect ----

struct InspectArgs {
  std::string model;
  std::string prefix;
};

int cmd_inspect(const InspectArgs& a, std::ostream& out) {
  const PrototypeModel model = load_model(a.model);
  const auto names = [&] {
    if (!model.feature_names.empty()) return model.feature_names;
    std::vector<std::string> n;
    for (std::size_t j = 0; j < model.dim(); ++j) n.push_back("f" + std::to_string(j + 1));
    return n;
  }();

  const auto rel = feature_relevances(model);
  std::ostringstream r;
  r << "feature";
  for (const auto& p : rel) r << ',' << p.matrix;
  r << '\n';
  for (std::size_t j = 0; j < model.dim(); ++j) {
    r << names[j];
    for (const auto& p : rel) r << ',' << num(p.relevances[j]);
    r << '\n';
  }
  write_file(a.prefix + "relevances.csv", r.str());

  std::ostringstream p;
  p << "prototype,class";
  for (const auto& n : names) p << ',' << n;
  p << '\n';
  for (std::size_t k = 0; k < model.num_prototypes(); ++k) {
    p << k << ',' << model.class_names.at(static_cast<std::size_t>(model.proto_labels[k]));
    for (Eigen::Index j = 0; j < model.prototypes[k].size(); ++j) p << ',' << num(model.prototypes[k][j]);
    p << '\n';
  }
  write_file(a.prefix + "prototypes.csv", p.str());

  std::ostringstream e;
  e << "matrix,index,eigenvalue,effective_rank\n";
  for (const auto& prof : eigen_relevance(model)) {
    for (std::size_t i = 0; i < prof.eigenvalues.size(); ++i) {
      e << prof.matrix << ',' << i + 1 << ',' << num(prof.eigenvalues[i]) << ',' << prof.effective_rank << '\n';
    }
  }
  write_file(a.prefix + "eigen.csv", e.str());
  out << "wrote " << a.prefix << "{relevances,prototypes,eigen}.csv\n";
  return 0;
}

// ---- export-sphere ----

struct SphereArgs {
  std::string model;
  int resolution = 40;
  std::string data;
  std::string out;
};

int cmd_export_sphere(const SphereArgs& a, std::ostream& out) {
  const PrototypeModel model = load_model(a.model);
  std::optional<LabeledDataset> data;
  if (!a.data.empty()) {
    CsvSchema schema;
    schema.class_names = model.class_names;
    data = load_csv(a.data, schema);
  }
  const SphereExport e = export_sphere(model, a.resolution, data ? &*data : nullptr);
  write_file(a.out, sphere_to_csv(e));
  out << "wrote " << e.grid.size() << " grid directions on the " << (e.rank == 3 ? "sphere" : "circle")
      << '\n';
  return 0;
}

int fail(std::ostream& err, std::string_view code, const std::string& msg, int status) {
  std::string line = msg;
  for (auto& ch : line) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  err << "error[" << code << "]: " << line << '\n';
  return status;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Angle-based LVQ toolkit", "alvq"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset");
  g->add_option("--dataset", gen.dataset)->check(CLI::IsMember({"football"}))->capture_default_str();
  g->add_option("--n", gen.n)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out)->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a CSV file");
  t->add_option("--data", tr.data)->required();
  add_train_flags(t, tr.flags);
  t->add_option("--beta", tr.beta)->capture_default_str();
  t->add_option("--protos-per-class", tr.ppc)->capture_default_str();
  t->add_option("--rank", tr.rank, "rank M, 0 for full")->capture_default_str();
  t->add_option("--out", tr.out, "model JSON")->required();
  t->add_option("--trace", tr.trace, "cost trace CSV (default <out>.trace.csv)");

  CrossvalArgs cv;
  auto* c = app.add_subcommand("crossval", "Stratified k-fold cross-validation over a grid");
  auto* data_opt = c->add_option("--data", cv.data, "CSV file");
  auto* clev_opt = c->add_option("--cleveland", cv.cleveland, "UCI processed Cleveland file");
  data_opt->excludes(clev_opt);
  c->add_option("--holdout", cv.holdout, "additional test file, same format as the input");
  add_train_flags(c, cv.flags);
  c->add_option("--beta", cv.betas, "one or more")->capture_default_str();
  c->add_option("--protos-per-class", cv.ppc, "one or more")->capture_default_str();
  c->add_option("--rank", cv.ranks, "one or more; 0 for full")->capture_default_str();
  c->add_option("--folds", cv.folds)->capture_default_str();
  c->add_option("--runs", cv.runs)->capture_default_str();
  c->add_option("--oversample", cv.oversample)
      ->check(CLI::IsMember({"none", "smote", "smoteg"}))
      ->capture_default_str();
  c->add_option("--smote-k", cv.smote_k)->capture_default_str();
  auto* bin = c->add_flag("--binary", "Cleveland: healthy vs disease (default)");
  auto* five = c->add_flag("--five-class", cv.five_class, "Cleveland: healthy and disease grades 1-4");
  bin->excludes(five);
  c->add_flag("--keep-minus-nine", cv.keep_minus_nine, "Cleveland: encode missing cells as -9");
  c->add_flag("--no-zscore", cv.no_zscore, "skip per-fold z-scoring");
  c->add_option("--out", cv.out, "output prefix for <out>.json and <out>.csv")->required();

  InspectArgs in;
  auto* i = app.add_subcommand("inspect", "Export relevances, prototypes and eigenvalues");
  i->add_option("--model", in.model)->required();
  i->add_option("--out-prefix", in.prefix)->required();

  SphereArgs sp;
  auto* s = app.add_subcommand("export-sphere", "Sample the classification sphere of a rank-2/3 model");
  s->add_option("--model", sp.model)->required();
  s->add_option("--resolution", sp.resolution, "n; n^2 directions are sampled")->capture_default_str();
  s->add_option("--data", sp.data, "optional CSV to project");
  s->add_option("--out", sp.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail(err, "Usage", e.what(), 2);
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*t) return cmd_train(tr, out);
    if (*c) {
      if (cv.data.empty() && cv.cleveland.empty()) {
        throw Error(ErrorCode::ConfigError, "crossval needs --data or --cleveland");
      }
      return cmd_crossval(cv, out);
    }
    if (*i) return cmd_inspect(in, out);
    if (*s) return cmd_export_sphere(sp, out);
  } catch (const Error& e) {
    return fail(err, to_string(e.code()), e.what(), exit_status(e.code()));
  } catch (const fs::filesystem_error& e) {
    return fail(err, "IoError", e.what(), 3);
  } catch (const std::exception& e) {
    return fail(err, "Internal", e.what(), 3);
  }
  return 2;
}

}  // namespace alvq
