#pragma once

// Matrix and vector files. CSV holds N rows of N comma-separated decimals; JSON
// holds {"dim": N, "rows": [[...], ...]}. Both reject ragged rows.

#include "smartsizer/mvncore.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace smartsizer {

Matrix parse_matrix_csv(std::string_view text);
Matrix parse_matrix_json(std::string_view text);
/// Dispatches on content: a leading '{' means JSON, anything else CSV.
Matrix parse_matrix(std::string_view text);
Matrix read_matrix_file(const std::filesystem::path& path);

std::string format_matrix_csv(const Matrix& m);
std::string format_matrix_json(const Matrix& m);
/// Writes JSON when the extension is .json, CSV otherwise. Values are written
/// with 17 significant digits so they re-read bit-exactly.
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);

/// A vector given inline ("1, 2.5, 3") or as a file (one CSV row, one column,
/// or a JSON array).
Vector parse_vector_list(std::string_view text);
Vector read_vector_arg(const std::string& file_or_list);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace smartsizer
