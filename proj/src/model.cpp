#include "alvq/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "alvq/error.hpp"
#include "alvq/kernels.hpp"

namespace alvq {

namespace {

constexpr double kZeroDenominator = 1e-12;

struct VariantInfo {
  Variant variant;
  std::string_view code;
  std::string_view name;
};

constexpr VariantInfo kVariants[] = {
    {Variant::EuclidGlobal, "eg", "euclid-global"},
    {Variant::EuclidLocal, "el", "euclid-local"},
    {Variant::EuclidTwoMatrix, "e2m", "euclid-2matrix"},
    {Variant::AngleGlobal, "ag", "angle-global"},
    {Variant::AngleLocal, "al", "angle-local"},
    {Variant::AngleTwoMatrix, "a2m", "angle-2matrix"},
};

const VariantInfo& info(Variant v) {
  for (const auto& i : kVariants) {
    if (i.variant == v) return i;
  }
  throw Error(ErrorCode::ConfigError, "unknown variant");
}

bool is_global(Variant v) { return v == Variant::EuclidGlobal || v == Variant::AngleGlobal; }
bool is_local(Variant v) { return v == Variant::EuclidLocal || v == Variant::AngleLocal; }

Matrix identity_for(const PrototypeModel& model) {
  const auto d = static_cast<Eigen::Index>(model.dim());
  return Matrix::Identity(d, d);
}

}  // namespace

std::string_view variant_code(Variant v) { return info(v).code; }
std::string_view variant_name(Variant v) { return info(v).name; }

Variant parse_variant(std::string_view text) {
  for (const auto& i : kVariants) {
    if (i.code == text || i.name == text) return i.variant;
  }
  throw Error(ErrorCode::ConfigError, "unknown variant '" + std::string(text) + "'");
}

bool is_angle(Variant v) {
  return v == Variant::AngleGlobal || v == Variant::AngleLocal || v == Variant::AngleTwoMatrix;
}

// ---- PrototypeModel ----

Eigen::Index PrototypeModel::rank() const {
  return std::visit(
      [&](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          return m.omega.rows();
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          return m.psi.empty() ? 0 : m.psi.front().rows();
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          return m.omega.rows();
        } else {
          return static_cast<Eigen::Index>(dim());
        }
      },
      matrices);
}

void PrototypeModel::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::FormatError, what); };
  if (prototypes.empty()) fail("model has no prototypes");
  if (proto_labels.size() != prototypes.size()) fail("prototype label count mismatch");
  const auto d = static_cast<Eigen::Index>(dim());
  if (d == 0) fail("prototypes have zero dimension");
  for (const auto& w : prototypes) {
    if (w.size() != d) fail("prototype dimension mismatch");
  }
  const auto classes = class_names.size();
  for (int l : proto_labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) fail("prototype label out of range");
  }
  if (!feature_names.empty() && feature_names.size() != static_cast<std::size_t>(d)) {
    fail("feature name count mismatch");
  }
  if (is_angle(variant) && !(angle.beta > 0.0)) fail("beta must be positive");

  if (is_global(variant)) {
    const auto* g = std::get_if<GlobalMatrix>(&matrices);
    if (!g) fail("global variant requires an omega matrix");
    if (g->omega.cols() != d || g->omega.rows() < 1 || g->omega.rows() > d) fail("omega shape mismatch");
  } else if (is_local(variant)) {
    const auto* l = std::get_if<LocalMatrix>(&matrices);
    if (!l) fail("local variant requires psi matrices");
    const std::size_t want =
        l->attachment == Attachment::ClassWise ? classes : prototypes.size();
    if (l->psi.size() != want) fail("psi stack size mismatch");
    for (const auto& p : l->psi) {
      if (p.cols() != d || p.rows() != l->psi.front().rows() || p.rows() < 1 || p.rows() > d) {
        fail("psi shape mismatch");
      }
    }
  } else {
    const auto* t = std::get_if<TwoMatrix>(&matrices);
    if (!t) fail("2-matrix variant requires omega and psi");
    if (t->omega.cols() != d || t->omega.rows() < 1 || t->omega.rows() > d) fail("omega shape mismatch");
    if (t->psi.size() != classes) fail("psi stack size mismatch");
    for (const auto& p : t->psi) {
      if (p.rows() != t->omega.rows() || p.cols() != t->omega.rows()) fail("psi must be M x M");
    }
  }
}

namespace {

bool same_matrices(const Matrices& a, const Matrices& b) {
  if (a.index() != b.index()) return false;
  if (const auto* g = std::get_if<GlobalMatrix>(&a)) {
    const auto& h = std::get<GlobalMatrix>(b);
    return g->omega.rows() == h.omega.rows() && g->omega.cols() == h.omega.cols() &&
           g->omega == h.omega;
  }
  auto same_stack = [](const std::vector<Matrix>& x, const std::vector<Matrix>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].rows() != y[i].rows() || x[i].cols() != y[i].cols() || x[i] != y[i]) return false;
    }
    return true;
  };
  if (const auto* l = std::get_if<LocalMatrix>(&a)) {
    const auto& m = std::get<LocalMatrix>(b);
    return l->attachment == m.attachment && same_stack(l->psi, m.psi);
  }
  if (const auto* t = std::get_if<TwoMatrix>(&a)) {
    const auto& u = std::get<TwoMatrix>(b);
    return t->omega.rows() == u.omega.rows() && t->omega.cols() == u.omega.cols() &&
           t->omega == u.omega && same_stack(t->psi, u.psi);
  }
  return true;
}

}  // namespace

bool operator==(const PrototypeModel& a, const PrototypeModel& b) {
  if (a.variant != b.variant || a.proto_labels != b.proto_labels ||
      a.prototypes.size() != b.prototypes.size() || a.angle.beta != b.angle.beta ||
      a.feature_names != b.feature_names || a.class_names != b.class_names ||
      a.meta.seed != b.meta.seed || a.meta.epochs != b.meta.epochs ||
      a.meta.lr_prototype != b.meta.lr_prototype || a.meta.lr_matrix != b.meta.lr_matrix) {
    return false;
  }
  for (std::size_t i = 0; i < a.prototypes.size(); ++i) {
    if (a.prototypes[i].size() != b.prototypes[i].size() || a.prototypes[i] != b.prototypes[i]) {
      return false;
    }
  }
  return same_matrices(a.matrices, b.matrices);
}

// ---- TrainingConfig ----

void TrainingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (prototypes_per_class < 1) fail("prototypes per class must be >= 1");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(lr_prototype >= 0.0) || !(lr_matrix >= 0.0)) fail("learning rates must be non-negative");
  if (lr_matrix > lr_prototype) fail("lr_matrix must not exceed lr_prototype");
  if (!(beta > 0.0)) fail("beta must be positive");
  if (rank < 0) fail("rank must be >= 0 (0 = full rank)");
  if (normalize_matrices_every < 1) fail("normalize_matrices_every must be >= 1");
}

double TrainingConfig::decay(int epoch) const {
  if (lr_decay == LrSchedule::Constant) return 1.0;
  return 1.0 / (1.0 + static_cast<double>(epoch) / static_cast<double>(epochs));
}

// ---- margins ----

double MarginTerms::mu() const {
  const double s = dJ + dK;
  return s > 0.0 ? (dJ - dK) / s : 0.0;
}

std::size_t matrix_slot(const PrototypeModel& model, std::size_t k) {
  if (const auto* l = std::get_if<LocalMatrix>(&model.matrices)) {
    return l->attachment == Attachment::PrototypeWise ? k
                                                      : static_cast<std::size_t>(model.proto_labels[k]);
  }
  return static_cast<std::size_t>(model.proto_labels[k]);
}

double dissimilarity(const PrototypeModel& model, SampleView x, std::size_t k) {
  const Vector& w = model.prototypes[k];
  const bool angle = is_angle(model.variant);
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          return angle ? g_beta(angle_global(x, w, m), model.angle) : euclid_quadform(x, w, m.omega);
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          const auto slot = matrix_slot(model, k);
          return angle ? g_beta(angle_local(x, w, m, slot), model.angle)
                       : euclid_quadform(x, w, m.psi.at(slot));
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          const auto slot = matrix_slot(model, k);
          return angle ? g_beta(angle_twomatrix(x, w, m, slot), model.angle)
                       : euclid_twomatrix(x, w, m, slot);
        } else {
          return angle ? g_beta(cosine_available(x, w), model.angle)
                       : euclid_quadform(x, w, identity_for(model));
        }
      },
      model.matrices);
}

Gradient dissimilarity_grads(const PrototypeModel& model, SampleView x, std::size_t k) {
  const Vector& w = model.prototypes[k];
  const bool angle = is_angle(model.variant);
  return std::visit(
      [&](const auto& m) -> Gradient {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          return angle ? angle_global_grads(x, w, m, model.angle)
                       : euclid_quadform_grads(x, w, m.omega);
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          const auto slot = matrix_slot(model, k);
          return angle ? angle_local_grads(x, w, m, slot, model.angle)
                       : euclid_quadform_grads(x, w, m.psi.at(slot));
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          const auto slot = matrix_slot(model, k);
          return angle ? angle_twomatrix_grads(x, w, m, slot, model.angle)
                       : euclid_twomatrix_grads(x, w, m, slot);
        } else {
          const Matrix id = identity_for(model);
          return angle ? angle_global_grads(x, w, GlobalMatrix{id}, model.angle)
                       : euclid_quadform_grads(x, w, id);
        }
      },
      model.matrices);
}

MarginTerms margin_terms(const PrototypeModel& model, SampleView x, int label) {
  MarginTerms t;
  bool have_j = false;
  bool have_k = false;
  for (std::size_t k = 0; k < model.num_prototypes(); ++k) {
    const double d = dissimilarity(model, x, k);
    if (model.proto_labels[k] == label) {
      if (!have_j || d < t.dJ) {
        t.dJ = d;
        t.jdx = k;
        have_j = true;
      }
    } else if (!have_k || d < t.dK) {
      t.dK = d;
      t.kdx = k;
      have_k = true;
    }
  }
  if (!have_j || !have_k) {
    throw Error(ErrorCode::EmptyClass,
                "model needs prototypes of the sample's class and of another class");
  }
  return t;
}

double dissimilarity_scale(const PrototypeModel& model) {
  return is_angle(model.variant) ? std::abs(g_beta_derivative(1.0, model.angle)) : 1.0;
}

GammaWeights gamma_weights(const MarginTerms& t, double scale) {
  const double s = t.dJ + t.dK;
  if (!(s > kZeroDenominator * scale)) {
    throw Error(ErrorCode::ZeroDenominator, "dJ + dK vanishes; both prototypes coincide with the sample");
  }
  return {2.0 * t.dK / (s * s), -2.0 * t.dJ / (s * s)};
}

double cost(const PrototypeModel& model, const LabeledDataset& ds) {
  double e = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) e += margin_terms(model, ds.sample(i), ds.labels[i]).mu();
  return e;
}

int predict(const PrototypeModel& model, SampleView x) {
  std::size_t best = 0;
  double best_d = 0.0;
  for (std::size_t k = 0; k < model.num_prototypes(); ++k) {
    const double d = dissimilarity(model, x, k);
    if (k == 0 || d < best_d) {
      best = k;
      best_d = d;
    }
  }
  return model.proto_labels.at(best);
}

// ---- initialization ----

PrototypeModel init_model(const LabeledDataset& ds, const TrainingConfig& cfg, Variant variant) {
  cfg.validate();
  ds.validate();
  const auto counts = ds.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::EmptyClass, "class '" + ds.class_names[c] + "' has no samples");
    }
  }
  const auto d = static_cast<Eigen::Index>(ds.dim());
  const Eigen::Index rank = cfg.rank == 0 ? d : cfg.rank;
  if (rank > d) throw Error(ErrorCode::ConfigError, "rank exceeds the data dimension");

  // Feature spread over all observed cells.
  const ZScoreParams spread = zscore_fit(ds);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(-0.01, 0.01);

  PrototypeModel model;
  model.variant = variant;
  model.angle.beta = cfg.beta;
  model.feature_names = ds.feature_names;
  model.class_names = ds.class_names;
  model.meta = {cfg.seed, cfg.epochs, cfg.lr_prototype, cfg.lr_matrix};

  for (std::size_t c = 0; c < ds.num_classes(); ++c) {
    Vector sum = Vector::Zero(d);
    Vector n = Vector::Zero(d);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] != static_cast<int>(c)) continue;
      const auto row = static_cast<Eigen::Index>(i);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (ds.present(row, j)) {
          sum[j] += ds.values(row, j);
          n[j] += 1.0;
        }
      }
    }
    Vector mean = Vector::Zero(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      if (n[j] > 0) mean[j] = sum[j] / n[j];
    }
    for (int p = 0; p < cfg.prototypes_per_class; ++p) {
      Vector w = mean;
      for (Eigen::Index j = 0; j < d; ++j) w[j] += jitter(rng) * spread.std[j];
      model.prototypes.push_back(std::move(w));
      model.proto_labels.push_back(static_cast<int>(c));
    }
  }

  const auto classes = ds.num_classes();
  if (is_global(variant)) {
    model.matrices = GlobalMatrix{truncated_identity(rank, d)};
  } else if (is_local(variant)) {
    LocalMatrix local;
    local.attachment = cfg.attachment;
    const std::size_t n =
        cfg.attachment == Attachment::ClassWise ? classes : model.prototypes.size();
    local.psi.assign(n, truncated_identity(rank, d));
    model.matrices = std::move(local);
  } else {
    TwoMatrix two;
    two.omega = truncated_identity(rank, d);
    two.psi.assign(classes, truncated_identity(rank, rank));
    model.matrices = std::move(two);
  }
  return model;
}

// ---- training ----

void normalize_matrices(PrototypeModel& model) {
  std::visit(
      [](auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          normalize_trace(m.omega);
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          for (auto& p : m.psi) normalize_trace(p);
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          normalize_trace(m.omega);
          for (auto& p : m.psi) normalize_trace(p);
        }
      },
      model.matrices);
}

bool all_finite(const PrototypeModel& model) {
  for (const auto& w : model.prototypes) {
    if (!w.allFinite()) return false;
  }
  return std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          return m.omega.allFinite();
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          return std::all_of(m.psi.begin(), m.psi.end(), [](const Matrix& p) { return p.allFinite(); });
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          return m.omega.allFinite() &&
                 std::all_of(m.psi.begin(), m.psi.end(), [](const Matrix& p) { return p.allFinite(); });
        } else {
          return true;
        }
      },
      model.matrices);
}

MarginTerms sgd_step(PrototypeModel& model, SampleView x, int label, const TrainingConfig& cfg,
                     int epoch, std::uint64_t step) {
  const MarginTerms t = margin_terms(model, x, label);
  const GammaWeights gw = gamma_weights(t, dissimilarity_scale(model));
  const Gradient gJ = dissimilarity_grads(model, x, t.jdx);
  const Gradient gK = dissimilarity_grads(model, x, t.kdx);

  const double decay = cfg.decay(epoch);
  const double lr_p = cfg.lr_prototype * decay;
  const double lr_m = cfg.lr_matrix * decay;

  model.prototypes[t.jdx] -= (lr_p * gw.gammaJ) * gJ.grad_w;
  model.prototypes[t.kdx] -= (lr_p * gw.gammaK) * gK.grad_w;

  if (lr_m > 0.0) {
    const std::size_t slot_j = matrix_slot(model, t.jdx);
    const std::size_t slot_k = matrix_slot(model, t.kdx);
    std::visit(
        [&](auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, GlobalMatrix>) {
            m.omega -= lr_m * (gw.gammaJ * gJ.grad_first + gw.gammaK * gK.grad_first);
          } else if constexpr (std::is_same_v<T, LocalMatrix>) {
            m.psi[slot_j] -= (lr_m * gw.gammaJ) * gJ.grad_first;
            m.psi[slot_k] -= (lr_m * gw.gammaK) * gK.grad_first;
          } else if constexpr (std::is_same_v<T, TwoMatrix>) {
            m.omega -= lr_m * (gw.gammaJ * gJ.grad_first + gw.gammaK * gK.grad_first);
            m.psi[slot_j] -= (lr_m * gw.gammaJ) * gJ.grad_second;
            m.psi[slot_k] -= (lr_m * gw.gammaK) * gK.grad_second;
          }
        },
        model.matrices);
    if ((step + 1) % static_cast<std::uint64_t>(cfg.normalize_matrices_every) == 0) {
      normalize_matrices(model);
    }
  }
  return t;
}

TrainResult train(const LabeledDataset& ds, const TrainingConfig& cfg, Variant variant) {
  if (!is_angle(variant) && ds.has_missing()) {
    throw Error(ErrorCode::MissingNotSupported,
                std::string(variant_name(variant)) +
                    " does not accept missing values; use an angle variant");
  }
  TrainResult result{init_model(ds, cfg, variant), {}, 0};
  PrototypeModel& model = result.model;

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

  std::uint64_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t i : order) {
      try {
        sgd_step(model, ds.sample(i), ds.labels[i], cfg, epoch, step);
        ++step;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroDenominator) throw;
        ++result.skipped_steps;
      }
    }
    if (!all_finite(model)) {
      throw Error(ErrorCode::NonFinite, "parameters became non-finite in epoch " +
                                            std::to_string(epoch) + "; lower the learning rate");
    }
    if (cfg.record_trace) {
      const auto eval = kernels::evaluate(model, ds);
      result.trace.push_back({epoch, eval.cost, eval.error});
    }
  }
  return result;
}

}  // namespace alvq
