#pragma once

#include <string>

#include <json.hpp>

#include "latocc/model/model.hpp"

namespace latocc {

inline constexpr int kModelFormatVersion = 1;

/// Model document: explicit field names, row-major matrices, format tag and
/// provenance. Floating values use shortest round-trip decimal form, so
/// load(save(m)) reproduces every double bit-for-bit.
nlohmann::ordered_json model_to_json(const FittedModel& model);
FittedModel model_from_json(const nlohmann::ordered_json& doc);

std::string dump_model(const FittedModel& model);
FittedModel parse_model(const std::string& text);

void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::ordered_json& j);

}  // namespace latocc
