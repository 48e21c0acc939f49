#include "alvq/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "alvq/error.hpp"

namespace alvq {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return out;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find('\n', start);
    if (pos == std::string_view::npos) pos = text.size();
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool is_missing_token(std::string_view s) {
  return s.empty() || s == "?" || s == "NaN" || s == "nan" || s == "NA";
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

LabeledDataset with_shape(std::size_t rows, std::size_t cols) {
  LabeledDataset ds;
  ds.values = RowMatrix::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  ds.present = MaskMatrix::Ones(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  ds.labels.assign(rows, 0);
  return ds;
}

}  // namespace

SampleView LabeledDataset::sample(std::size_t i) const {
  const auto d = dim();
  const auto row = static_cast<Eigen::Index>(i);
  return {std::span<const double>(values.data() + row * values.cols(), d),
          std::span<const std::uint8_t>(present.data() + row * present.cols(), d)};
}

Sample LabeledDataset::owned_sample(std::size_t i) const {
  const SampleView v = sample(i);
  return {std::vector<double>(v.values.begin(), v.values.end()),
          std::vector<std::uint8_t>(v.present.begin(), v.present.end())};
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes(), 0);
  for (int l : labels) ++counts.at(static_cast<std::size_t>(l));
  return counts;
}

std::size_t LabeledDataset::missing_cells() const {
  return static_cast<std::size_t>((present.array() == 0).count());
}

std::size_t LabeledDataset::samples_with_missing() const {
  std::size_t n = 0;
  for (Eigen::Index i = 0; i < present.rows(); ++i) {
    if ((present.row(i).array() == 0).any()) ++n;
  }
  return n;
}

void LabeledDataset::validate() const {
  if (labels.empty() || values.cols() == 0) {
    throw Error(ErrorCode::FormatError, "dataset must have at least one sample and one feature");
  }
  if (static_cast<std::size_t>(values.rows()) != labels.size() || present.rows() != values.rows() ||
      present.cols() != values.cols()) {
    throw Error(ErrorCode::FormatError, "dataset shape mismatch");
  }
  if (feature_names.size() != dim()) {
    throw Error(ErrorCode::FormatError, "feature name count does not match dimension");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes()) {
      throw Error(ErrorCode::FormatError, "label out of range: " + std::to_string(l));
    }
  }
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& rows) const {
  LabeledDataset out = with_shape(rows.size(), dim());
  out.feature_names = feature_names;
  out.class_names = class_names;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    const auto dst = static_cast<Eigen::Index>(r);
    out.values.row(dst) = values.row(src);
    out.present.row(dst) = present.row(src);
    out.labels[r] = labels[rows[r]];
  }
  return out;
}

void LabeledDataset::append(SampleView x, int label) {
  const auto row = values.rows();
  values.conservativeResize(row + 1, Eigen::NoChange);
  present.conservativeResize(row + 1, Eigen::NoChange);
  for (std::size_t j = 0; j < x.dim(); ++j) {
    const auto col = static_cast<Eigen::Index>(j);
    present(row, col) = x.present[j] ? 1 : 0;
    values(row, col) = x.present[j] ? x.values[j] : 0.0;
  }
  labels.push_back(label);
}

LabeledDataset LabeledDataset::empty_like(const LabeledDataset& ds) {
  LabeledDataset out = with_shape(0, ds.dim());
  out.feature_names = ds.feature_names;
  out.class_names = ds.class_names;
  return out;
}

bool operator==(const LabeledDataset& a, const LabeledDataset& b) {
  return a.values.rows() == b.values.rows() && a.values.cols() == b.values.cols() &&
         a.values == b.values && a.present == b.present && a.labels == b.labels &&
         a.feature_names == b.feature_names && a.class_names == b.class_names;
}

// ---- z-score ----

ZScoreParams zscore_fit(const LabeledDataset& train) {
  const auto d = static_cast<Eigen::Index>(train.dim());
  ZScoreParams p{Vector::Zero(d), Vector::Ones(d)};
  for (Eigen::Index j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < train.values.rows(); ++i) {
      if (train.present(i, j)) {
        sum += train.values(i, j);
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < train.values.rows(); ++i) {
      if (train.present(i, j)) ss += (train.values(i, j) - mean) * (train.values(i, j) - mean);
    }
    // Population std over observed cells.
    const double sd = std::sqrt(ss / static_cast<double>(n));
    p.mean[j] = mean;
    p.std[j] = sd < kDegenerateNorm ? 1.0 : sd;
  }
  return p;
}

LabeledDataset zscore_apply(const LabeledDataset& ds, const ZScoreParams& params) {
  LabeledDataset out = ds;
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      if (out.present(i, j)) out.values(i, j) = (out.values(i, j) - params.mean[j]) / params.std[j];
    }
  }
  return out;
}

LabeledDataset zscore_invert(const LabeledDataset& ds, const ZScoreParams& params) {
  LabeledDataset out = ds;
  for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
      if (out.present(i, j)) out.values(i, j) = out.values(i, j) * params.std[j] + params.mean[j];
    }
  }
  return out;
}

// ---- football ----

double football_function(double x1, double x2, double x3) {
  return 2.0 * std::sinh(5.0 * x1 * x2 * x3);
}

int football_label(double x1, double x2, double x3) {
  return football_function(x1, x2, x3) <= 0.5 ? 0 : 1;
}

LabeledDataset generate_football(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::ConfigError, "football generator needs n >= 1");
  LabeledDataset ds = with_shape(n, 3);
  ds.feature_names = {"x1", "x2", "x3"};
  ds.class_names = {"0", "1"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < 3; ++j) ds.values(row, j) = unit(rng);
    ds.labels[i] = football_label(ds.values(row, 0), ds.values(row, 1), ds.values(row, 2));
  }
  return ds;
}

// ---- Cleveland ----

namespace {

const std::vector<std::string> kClevelandFeatures = {
    "age", "sex", "cp", "trestbps", "chol", "fbs", "restecg",
    "thalach", "exang", "oldpeak", "slope", "ca", "thal"};

}  // namespace

LabeledDataset parse_cleveland(std::string_view text) {
  std::vector<std::vector<std::string_view>> rows;
  std::vector<std::size_t> line_numbers;
  const auto lines = lines_of(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    rows.push_back(split(lines[i], ','));
    line_numbers.push_back(i + 1);
  }
  if (rows.empty()) throw Error(ErrorCode::FormatError, "Cleveland input is empty");

  constexpr std::size_t kFields = 14;
  LabeledDataset ds = with_shape(rows.size(), kFields - 1);
  ds.feature_names = kClevelandFeatures;
  ds.class_names = {"healthy", "disease-1", "disease-2", "disease-3", "disease-4"};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& f = rows[r];
    const std::string where = "row " + std::to_string(line_numbers[r]);
    if (f.size() != kFields) {
      throw Error(ErrorCode::FormatError, where + ": expected 14 fields, found " +
                                              std::to_string(f.size()));
    }
    const auto row = static_cast<Eigen::Index>(r);
    for (std::size_t j = 0; j + 1 < kFields; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      if (f[j] == "?") {
        ds.present(row, col) = 0;
        continue;
      }
      double v = 0.0;
      if (!parse_double(f[j], v)) {
        throw Error(ErrorCode::FormatError,
                    where + ", field " + std::to_string(j + 1) + ": not a number");
      }
      ds.values(row, col) = v;
    }
    double target = -1.0;
    if (!parse_double(f[kFields - 1], target) || target != std::floor(target) || target < 0 ||
        target > 4) {
      throw Error(ErrorCode::FormatError, where + ": target must be an integer in 0..4");
    }
    ds.labels[r] = static_cast<int>(target);
  }
  return ds;
}

LabeledDataset load_cleveland(const std::filesystem::path& path) {
  return parse_cleveland(read_file(path));
}

LabeledDataset relabel(const LabeledDataset& ds, ClassMode mode, MissingPolicy policy) {
  LabeledDataset out = ds;
  if (mode == ClassMode::Binary) {
    for (int& l : out.labels) l = l > 0 ? 1 : 0;
    out.class_names = {"healthy", "disease"};
  }
  if (policy == MissingPolicy::KeepMinusNine) {
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.values.cols(); ++j) {
        if (!out.present(i, j)) {
          out.values(i, j) = -9.0;
          out.present(i, j) = 1;
        }
      }
    }
  }
  return out;
}

// ---- CSV ----

LabeledDataset parse_csv(std::string_view text, const CsvSchema& schema) {
  const auto lines = lines_of(text);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw Error(ErrorCode::FormatError, "CSV input is empty");

  const auto header = split(lines[first], ',');
  const auto label_it = std::find(header.begin(), header.end(), schema.label_column);
  if (label_it == header.end()) {
    throw Error(ErrorCode::FormatError, "header has no label column '" + schema.label_column + "'");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());

  struct RawRow {
    std::vector<std::string_view> fields;
    std::size_t line;
  };
  std::vector<RawRow> raw;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    raw.push_back({split(lines[i], ','), i + 1});
    if (raw.back().fields.size() != header.size()) {
      throw Error(ErrorCode::FormatError,
                  "row " + std::to_string(i + 1) + ": expected " + std::to_string(header.size()) +
                      " columns, found " + std::to_string(raw.back().fields.size()));
    }
  }
  if (raw.empty()) throw Error(ErrorCode::FormatError, "CSV has a header but no rows");

  LabeledDataset ds = with_shape(raw.size(), header.size() - 1);
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j != label_col) ds.feature_names.emplace_back(header[j]);
  }

  // Class table.
  std::vector<std::string> names = schema.class_names;
  if (names.empty()) {
    std::vector<std::string> seen;
    for (const auto& r : raw) {
      std::string l(r.fields[label_col]);
      if (std::find(seen.begin(), seen.end(), l) == seen.end()) seen.push_back(l);
    }
    const bool all_int = std::all_of(seen.begin(), seen.end(), [](const std::string& s) {
      int v = 0;
      return parse_int(s, v);
    });
    if (all_int) {
      std::sort(seen.begin(), seen.end(), [](const std::string& a, const std::string& b) {
        int va = 0, vb = 0;
        parse_int(a, va);
        parse_int(b, vb);
        return va < vb;
      });
    } else {
      std::sort(seen.begin(), seen.end());
    }
    names = std::move(seen);
  }
  ds.class_names = names;

  for (std::size_t r = 0; r < raw.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    Eigen::Index col = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      const auto cell = raw[r].fields[j];
      if (j == label_col) {
        const auto it = std::find(names.begin(), names.end(), cell);
        if (it == names.end()) {
          throw Error(ErrorCode::FormatError, "row " + std::to_string(raw[r].line) +
                                                  ": label '" + std::string(cell) +
                                                  "' is not a declared class");
        }
        ds.labels[r] = static_cast<int>(it - names.begin());
        continue;
      }
      if (is_missing_token(cell)) {
        ds.present(row, col) = 0;
      } else {
        double v = 0.0;
        if (!parse_double(cell, v)) {
          throw Error(ErrorCode::FormatError, "row " + std::to_string(raw[r].line) + ", column " +
                                                  std::to_string(j + 1) + ": not a number");
        }
        ds.values(row, col) = v;
      }
      ++col;
    }
  }
  return ds;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  return parse_csv(read_file(path), schema);
}

std::string to_csv(const LabeledDataset& ds) {
  std::string out;
  for (const auto& name : ds.feature_names) out += name + ",";
  out += "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < ds.values.cols(); ++j) {
      out += ds.present(row, j) ? format_double(ds.values(row, j)) : std::string("?");
      out += ',';
    }
    out += ds.class_names.at(static_cast<std::size_t>(ds.labels[i]));
    out += '\n';
  }
  return out;
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  write_file(path, to_csv(ds));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace alvq
