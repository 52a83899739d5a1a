#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "floq/measure.hpp"

namespace floq {

inline constexpr int kSchemaVersion = 1;

/// Malformed problem document. The message names the line/column (syntax
/// errors) or the field path (schema errors).
class ProblemParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed document whose system fails validate_system().
class InvalidProblemError : public Error {
 public:
  explicit InvalidProblemError(ValidationReport report);
  const ValidationReport& report() const noexcept { return report_; }

 private:
  ValidationReport report_;
};

struct ParsedProblem {
  CanonicalSystem system;
  ValidationReport validation;
  /// True when the document had no base_point and the default was used.
  bool base_point_defaulted = false;
  std::string source;
};

/// Parses a JSON problem document:
///
///   {
///     "schema_version": 1, "n": 2, "period": 1.0,
///     "J": {"r": 1.0} | {"matrix": [[0, -1], [1, 0]]} | {"imag": 1.0},
///     "q": {"atoms": [{"position": 0.0, "weight": [[1, 0], [0, 0]]}],
///           "density": [{"from": 0.0, "to": 1.0, "matrix": [[0, 0], [0, -1]]}]},
///     "w": { ... },
///     "base_point": 0.5
///   }
///
/// q, w, J (default r = 1) and base_point are optional. For n = 1 matrices may
/// be written as plain numbers.
///
/// With `validate` set, a system failing validate_system() raises
/// InvalidProblemError carrying the report.
ParsedProblem parse_problem_text(std::string_view text, std::string source = "<text>",
                                 bool validate = true);
ParsedProblem parse_problem_file(const std::filesystem::path& path, bool validate = true);

/// JSON document that parses back to an identical system.
std::string serialize_problem(const CanonicalSystem& sys);

}  // namespace floq
