#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "floq/measure.hpp"

namespace floq {

using ParamMap = std::map<std::string, double>;

struct ExampleParam {
  std::string name;
  double default_value = 0.0;
  std::string description;
};

/// One of the seven worked examples: J = [[0, -1], [1, 0]], period 1 unless
/// stated, n = 2.
struct ExampleEntry {
  std::string name;
  std::string summary;
  std::vector<ExampleParam> params;
  std::function<CanonicalSystem(const ParamMap&)> build;
  /// Closed-form discriminant; empty for the example without one.
  std::function<cplx(const ParamMap&, cplx)> closed_form_D;
  /// Spectrum as a list of intervals (infinite ends allowed), where known.
  std::function<std::optional<std::vector<std::pair<double, double>>>(const ParamMap&)>
      expected_spectrum;
  /// Default window for `check` and `bands`.
  double window_lo = -10.0;
  double window_hi = 10.0;
};

const std::vector<ExampleEntry>& example_registry();

/// Throws InvalidArgument listing the available names.
const ExampleEntry& find_example(const std::string& name);

/// Defaults overridden by `overrides`; unknown parameter names are rejected.
ParamMap resolve_params(const ExampleEntry& entry, const ParamMap& overrides = {});

struct ExampleCheck {
  std::string name;
  ParamMap params;
  int samples = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double max_error = 0.0;
  double worst_lambda = 0.0;
};

/// max |D_numeric - D_closed| over `samples` evenly spaced real lambda.
ExampleCheck check_example(const ExampleEntry& entry, const ParamMap& params, int samples = 100);
ExampleCheck check_example(const ExampleEntry& entry, const ParamMap& params, int samples,
                           double lambda_min, double lambda_max);

}  // namespace floq
