#include "alvq/serialize.hpp"

#include <json.hpp>

#include "alvq/error.hpp"

namespace alvq {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::FormatError, "matrix must be a non-empty array");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::FormatError, "ragged matrix row");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json stack_to_json(const std::vector<Matrix>& stack) {
  json out = json::array();
  for (const auto& m : stack) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> stack_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::FormatError, "psi must be an array of matrices");
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

}  // namespace

std::string serialize(const PrototypeModel& model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["variant"] = std::string(variant_name(model.variant));
  doc["beta"] = model.angle.beta;
  json protos = json::array();
  for (const auto& w : model.prototypes) {
    protos.push_back(std::vector<double>(w.data(), w.data() + w.size()));
  }
  doc["prototypes"] = std::move(protos);
  doc["proto_labels"] = model.proto_labels;
  doc["class_names"] = model.class_names;
  if (!model.feature_names.empty()) doc["feature_names"] = model.feature_names;

  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GlobalMatrix>) {
          doc["omega"] = matrix_to_json(m.omega);
        } else if constexpr (std::is_same_v<T, LocalMatrix>) {
          doc["psi"] = stack_to_json(m.psi);
          doc["attachment"] = m.attachment == Attachment::ClassWise ? "class" : "prototype";
        } else if constexpr (std::is_same_v<T, TwoMatrix>) {
          doc["omega"] = matrix_to_json(m.omega);
          doc["psi"] = stack_to_json(m.psi);
        }
      },
      model.matrices);

  doc["training_meta"] = {{"seed", model.meta.seed},
                          {"epochs", model.meta.epochs},
                          {"lrs", {{"prototype", model.meta.lr_prototype},
                                   {"matrix", model.meta.lr_matrix}}}};
  return doc.dump(1) + "\n";
}

PrototypeModel deserialize(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("model document is not valid JSON: ") + e.what());
  }
  PrototypeModel model;
  try {
    if (!doc.is_object()) throw Error(ErrorCode::FormatError, "model document must be a JSON object");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw Error(ErrorCode::FormatError, "unsupported model format_version " + std::to_string(version));
    }
    model.variant = parse_variant(doc.at("variant").get<std::string>());
    model.angle.beta = doc.at("beta").get<double>();
    for (const auto& p : doc.at("prototypes")) {
      const auto v = p.get<std::vector<double>>();
      model.prototypes.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    model.proto_labels = doc.at("proto_labels").get<std::vector<int>>();
    model.class_names = doc.at("class_names").get<std::vector<std::string>>();
    if (doc.contains("feature_names")) {
      model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    }
    const bool has_omega = doc.contains("omega");
    const bool has_psi = doc.contains("psi");
    if (has_omega && has_psi) {
      model.matrices = TwoMatrix{matrix_from_json(doc.at("omega")), stack_from_json(doc.at("psi"))};
    } else if (has_omega) {
      model.matrices = GlobalMatrix{matrix_from_json(doc.at("omega"))};
    } else if (has_psi) {
      LocalMatrix local;
      local.psi = stack_from_json(doc.at("psi"));
      const auto att = doc.value("attachment", std::string("class"));
      if (att != "class" && att != "prototype") {
        throw Error(ErrorCode::FormatError, "attachment must be 'class' or 'prototype'");
      }
      local.attachment = att == "class" ? Attachment::ClassWise : Attachment::PrototypeWise;
      model.matrices = std::move(local);
    }
    const auto& meta = doc.at("training_meta");
    model.meta.seed = meta.at("seed").get<std::uint64_t>();
    model.meta.epochs = meta.at("epochs").get<int>();
    model.meta.lr_prototype = meta.at("lrs").at("prototype").get<double>();
    model.meta.lr_matrix = meta.at("lrs").at("matrix").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed model document: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const PrototypeModel& model, const std::filesystem::path& path) {
  write_file(path, serialize(model));
}

PrototypeModel load_model(const std::filesystem::path& path) { return deserialize(read_file(path)); }

}  // namespace alvq
