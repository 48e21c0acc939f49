#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "alvq/model.hpp"

namespace alvq {

inline constexpr int kModelFormatVersion = 1;

/// Versioned JSON model document. Doubles are written with round-trip precision.
std::string serialize(const PrototypeModel& model);
/// Throws FormatError on malformed input, a version mismatch or bad shapes.
PrototypeModel deserialize(std::string_view document);

void save_model(const PrototypeModel& model, const std::filesystem::path& path);
PrototypeModel load_model(const std::filesystem::path& path);

}  // namespace alvq
