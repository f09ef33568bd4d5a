#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace rset {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);

/// Strict full-field parse (surrounding whitespace allowed).
bool parse_double(std::string_view text, double& out) noexcept;

std::vector<std::string> split_csv_line(std::string_view line);

json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const json& j, std::string_view what);

/// {"rows": r, "cols": c, "data": [...row-major...]}
json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j, std::string_view what);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rset
