#include "oplab/matrix_io.hpp"

#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "oplab/errors.hpp"

namespace oplab {

using nlohmann::json;

Scalar scalar_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  throw ConfigError("expected a number or an [re, im] pair, got " + j.dump());
}

json scalar_to_json(Scalar z) { return json::array({z.real(), z.imag()}); }

Matrix matrix_from_json(const json& j) {
  if (j.is_object()) {
    if (!j.contains("rows") || !j.contains("cols") || !j.contains("data")) {
      throw ConfigError("matrix object needs rows, cols and data");
    }
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const json& data = j.at("data");
    if (rows < 0 || cols < 0 || !data.is_array() ||
        data.size() != static_cast<size_t>(rows * cols)) {
      throw ConfigError("matrix data length does not match rows*cols");
    }
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      for (Index c = 0; c < cols; ++c) {
        m(r, c) = scalar_from_json(data[static_cast<size_t>(r * cols + c)]);
      }
    }
    return m;
  }
  if (j.is_array()) {
    const auto rows = static_cast<Index>(j.size());
    if (rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) throw ConfigError("nested matrix rows must be arrays");
    const auto cols = static_cast<Index>(j[0].size());
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<size_t>(r)];
      if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
        throw ConfigError("nested matrix rows must all have the same length");
      }
      for (Index c = 0; c < cols; ++c) m(r, c) = scalar_from_json(row[static_cast<size_t>(c)]);
    }
    return m;
  }
  throw ConfigError("matrix must be an object or a nested array");
}

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) data.push_back(scalar_to_json(m(r, c)));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_text(std::string_view text) {
  std::string cleaned;
  std::istringstream lines{std::string(text)};
  for (std::string line; std::getline(lines, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned += line;
    cleaned += '\n';
  }
  std::istringstream in(cleaned);
  Index rows = -1;
  Index cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw ConfigError("text matrix: missing or invalid 'rows cols' header");
  }
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      double re = 0.0;
      double im = 0.0;
      if (!(in >> re >> im)) throw ConfigError("text matrix: too few entries");
      m(r, c) = {re, im};
    }
  }
  std::string trailing;
  if (in >> trailing) throw ConfigError("text matrix: unexpected trailing content");
  return m;
}

std::string matrix_to_text(const Matrix& m) {
  std::ostringstream out;
  out << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << "  ";
      out << m(r, c).real() << ' ' << m(r, c).imag();
    }
    out << '\n';
  }
  return out.str();
}

Matrix load_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '{' || text[first] == '[')) {
    try {
      return matrix_from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw ConfigError("malformed matrix JSON in " + path.string() + ": " + e.what());
    }
  }
  return matrix_from_text(text);
}

}  // namespace oplab
