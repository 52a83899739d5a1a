#include "floq/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace floq {

namespace {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ProblemParseError("field '" + path + "': " + what);
}

double read_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(path, "must be finite");
  return v;
}

RealMatrix read_matrix(const json& j, int n, const std::string& path) {
  if (j.is_number()) {
    if (n != 1) field_error(path, "a plain number is only accepted for n = 1");
    RealMatrix m(1, 1);
    m(0, 0) = read_number(j, path);
    return m;
  }
  if (!j.is_array() || j.empty()) field_error(path, "expected a non-empty array of rows");
  const auto rows = j.size();
  if (rows > 2) field_error(path, "matrices are at most 2x2");
  std::size_t cols = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const auto& row = j[i];
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.empty()) field_error(row_path, "expected a non-empty array");
    if (i == 0) cols = row.size();
    if (row.size() != cols) field_error(row_path, "rows have different lengths");
  }
  if (cols > 2) field_error(path, "matrices are at most 2x2");
  RealMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      m(i, k) = read_number(j[i][k], path + "[" + std::to_string(i) + "][" + std::to_string(k) + "]");
    }
  }
  return m;
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) field_error(path.empty() ? item.key() : path + "." + item.key(), "unknown key");
  }
}

MatrixMeasureSpec read_measure(const json& root, const char* key, int n, double period) {
  MatrixMeasureSpec m = MatrixMeasureSpec::zero(n, period);
  if (!root.contains(key)) return m;
  const auto& obj = root.at(key);
  const std::string path = key;
  if (!obj.is_object()) field_error(path, "expected an object with 'atoms' and/or 'density'");
  check_keys(obj, {"atoms", "density"}, path);
  if (obj.contains("atoms")) {
    const auto& atoms = obj.at("atoms");
    if (!atoms.is_array()) field_error(path + ".atoms", "expected an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string ap = path + ".atoms[" + std::to_string(i) + "]";
      const auto& a = atoms[i];
      if (!a.is_object()) field_error(ap, "expected an object");
      check_keys(a, {"position", "weight"}, ap);
      if (!a.contains("position")) field_error(ap + ".position", "missing");
      if (!a.contains("weight")) field_error(ap + ".weight", "missing");
      m.atoms.push_back({read_number(a.at("position"), ap + ".position"),
                         read_matrix(a.at("weight"), n, ap + ".weight")});
    }
  }
  if (obj.contains("density")) {
    const auto& segs = obj.at("density");
    if (!segs.is_array()) field_error(path + ".density", "expected an array");
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const std::string sp = path + ".density[" + std::to_string(i) + "]";
      const auto& s = segs[i];
      if (!s.is_object()) field_error(sp, "expected an object");
      check_keys(s, {"from", "to", "matrix"}, sp);
      for (const char* k : {"from", "to", "matrix"}) {
        if (!s.contains(k)) field_error(sp + "." + k, "missing");
      }
      m.density.push_back({read_number(s.at("from"), sp + ".from"),
                           read_number(s.at("to"), sp + ".to"),
                           read_matrix(s.at("matrix"), n, sp + ".matrix")});
    }
  }
  return m;
}

ComplexMatrix read_j(const json& root, int n) {
  if (!root.contains("J")) return n == 2 ? canonical_j(1.0) : scalar_j(1.0);
  const auto& j = root.at("J");
  if (!j.is_object()) field_error("J", "expected an object with 'r', 'matrix' or 'imag'");
  check_keys(j, {"r", "matrix", "imag"}, "J");
  if (j.size() != 1) field_error("J", "give exactly one of 'r', 'matrix', 'imag'");
  if (j.contains("r")) {
    if (n != 2) field_error("J.r", "only valid for n = 2");
    return canonical_j(read_number(j.at("r"), "J.r"));
  }
  if (j.contains("imag")) {
    if (n != 1) field_error("J.imag", "only valid for n = 1");
    return scalar_j(read_number(j.at("imag"), "J.imag"));
  }
  if (n != 2) field_error("J.matrix", "only valid for n = 2");
  return read_matrix(j.at("matrix"), n, "J.matrix").cast<cplx>();
}

std::string syntax_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

json matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

json measure_json(const MatrixMeasureSpec& m) {
  json out = json::object();
  json atoms = json::array();
  for (const auto& a : m.atoms) atoms.push_back({{"position", a.position}, {"weight", matrix_json(a.weight)}});
  json density = json::array();
  for (const auto& s : m.density) {
    density.push_back({{"from", s.from}, {"to", s.to}, {"matrix", matrix_json(s.matrix)}});
  }
  out["atoms"] = atoms;
  out["density"] = density;
  return out;
}

}  // namespace

InvalidProblemError::InvalidProblemError(ValidationReport report)
    : Error(report.summary()), report_(std::move(report)) {}

ParsedProblem parse_problem_text(std::string_view text, std::string source, bool validate) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ProblemParseError(source + ": syntax error at " + syntax_context(text, e.byte) + ": " +
                            e.what());
  }
  try {
    if (!root.is_object()) throw ProblemParseError("top level must be an object");
    check_keys(root, {"schema_version", "n", "period", "J", "q", "w", "base_point"}, "");
    if (!root.contains("schema_version")) field_error("schema_version", "missing (required)");
    const auto& version = root.at("schema_version");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
      field_error("schema_version", "unsupported version (expected " +
                                        std::to_string(kSchemaVersion) + ")");
    }
    if (!root.contains("n")) field_error("n", "missing");
    if (!root.at("n").is_number_integer()) field_error("n", "expected an integer");
    const int n = root.at("n").get<int>();
    if (n != 1 && n != 2) field_error("n", "must be 1 or 2");
    if (!root.contains("period")) field_error("period", "missing");
    const double period = read_number(root.at("period"), "period");

    ParsedProblem out;
    out.source = source;
    auto& sys = out.system;
    sys.n = n;
    sys.J = read_j(root, n);
    sys.q = read_measure(root, "q", n, period);
    sys.w = read_measure(root, "w", n, period);
    if (root.contains("base_point")) {
      sys.base_point = read_number(root.at("base_point"), "base_point");
    } else {
      sys.base_point = default_base_point(sys.q, sys.w);
      out.base_point_defaulted = true;
    }
    out.validation = validate_system(sys);
    if (validate && !out.validation.ok) throw InvalidProblemError(out.validation);
    return out;
  } catch (const ProblemParseError& e) {
    throw ProblemParseError(source + ": " + e.what());
  }
}

ParsedProblem parse_problem_file(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw ProblemParseError(path.string() + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str(), path.string(), validate);
}

std::string serialize_problem(const CanonicalSystem& sys) {
  json root;
  root["schema_version"] = kSchemaVersion;
  root["n"] = sys.n;
  root["period"] = sys.period();
  if (sys.n == 1) {
    root["J"] = {{"imag", sys.J(0, 0).imag()}};
  } else {
    root["J"] = {{"matrix", matrix_json(sys.J.real())}};
  }
  root["q"] = measure_json(sys.q);
  root["w"] = measure_json(sys.w);
  root["base_point"] = sys.base_point;
  return root.dump(2) + "\n";
}

}  // namespace floq
