#pragma once

#include "acd/exp/runner.hpp"

namespace acd::exp {

nlohmann::json matrix_result_to_json(const MatrixResult& m);
MatrixResult matrix_result_from_json(const nlohmann::json& j);
nlohmann::json ablation_result_to_json(const AblationResult& a);

// One artifact in a named format: "json", "csv", "txt", or "svg".
// Unknown format names are a config error.
std::string render_matrix(const MatrixResult& m, const std::string& format);
std::string render_ablation(const AblationResult& a, const std::string& format);

// Writes report.json / report.csv / report.txt / report.svg under dir.
void emit_matrix_report(const MatrixResult& m, const std::string& dir);
void emit_ablation_report(const AblationResult& a, const std::string& dir);

}  // namespace acd::exp
