#pragma once

// Import/export of complex matrices.
//
// JSON form (row-major, complex entries as [re, im] pairs; a bare number is
// accepted as a real entry):
//
//   {"rows": 2, "cols": 2, "data": [[0,0], [0,0], [1,0], [0,0]]}
//   [[[0,0], [0,0]], [[1,0], [0,0]]]        // nested rows
//
// Plain-text form: a header line "rows cols" followed by rows*cols pairs
// "re im" in row-major order, whitespace separated.  Lines starting with
// '#' are comments.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "oplab/linalg.hpp"

namespace oplab {

Scalar scalar_from_json(const nlohmann::json& j);
nlohmann::json scalar_to_json(Scalar z);

Matrix matrix_from_json(const nlohmann::json& j);
nlohmann::json matrix_to_json(const Matrix& m);

Matrix matrix_from_text(std::string_view text);
std::string matrix_to_text(const Matrix& m);

/// Reads a matrix file, detecting JSON by its first non-blank character.
/// Throws ConfigError when the file is missing or malformed.
Matrix load_matrix_file(const std::filesystem::path& path);

}  // namespace oplab
