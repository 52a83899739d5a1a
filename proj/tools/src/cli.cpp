#include "floq_cli/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "floq/example_registry.hpp"
#include "floq/floquet.hpp"
#include "floq/problem_io.hpp"
#include "floq/spectral.hpp"

namespace floq::cli {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Errors that map to the usage exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ordered_json complex_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json matrix_json(const ComplexMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_json(m(i, k)));
    rows.push_back(row);
  }
  return rows;
}

ordered_json vector_json(const ComplexVector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

// Finite doubles as numbers, everything else as null (JSON has no NaN).
ordered_json number_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

struct Source {
  std::string problem;
  std::string example;
  std::vector<std::string> params;
  std::string output;
};

struct Loaded {
  CanonicalSystem sys;
  ValidationReport validation;
  bool base_point_defaulted = false;
  std::string source;
  const ExampleEntry* example = nullptr;
  ParamMap params;
};

ParamMap parse_params(const std::vector<std::string>& items) {
  ParamMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--param expects name=value, got '" + item + "'");
    }
    const std::string value = item.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty()) {
      throw UsageError("--param value is not a number: '" + item + "'");
    }
    out[item.substr(0, eq)] = v;
  }
  return out;
}

Loaded load(const Source& src, bool validate) {
  if (src.problem.empty() == src.example.empty()) {
    throw UsageError("give exactly one of --problem <path> or --example <name>");
  }
  Loaded out;
  if (!src.problem.empty()) {
    if (!src.params.empty()) throw UsageError("--param only applies to --example");
    auto parsed = parse_problem_file(src.problem, validate);
    out.sys = std::move(parsed.system);
    out.validation = std::move(parsed.validation);
    out.base_point_defaulted = parsed.base_point_defaulted;
    out.source = parsed.source;
    return out;
  }
  out.example = &find_example(src.example);
  out.params = resolve_params(*out.example, parse_params(src.params));
  out.sys = out.example->build(out.params);
  out.base_point_defaulted = true;
  out.source = "example:" + src.example;
  out.validation = validate_system(out.sys);
  if (validate && !out.validation.ok) throw InvalidProblemError(out.validation);
  return out;
}

ordered_json metadata_json(const Loaded& l) {
  ordered_json meta;
  meta["source"] = l.source;
  meta["n"] = l.sys.n;
  meta["period"] = l.sys.period();
  meta["base_point"] = l.sys.base_point;
  meta["base_point_defaulted"] = l.base_point_defaulted;
  if (l.example) {
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : l.params) params[k] = v;
    meta["params"] = params;
  }
  return meta;
}

ordered_json validation_json(const ValidationReport& r) {
  ordered_json out;
  out["ok"] = r.ok;
  ordered_json violations = ordered_json::array();
  for (const auto& v : r.violations) {
    ordered_json item;
    item["code"] = to_string(v.code);
    item["position"] = v.position ? number_json(*v.position) : ordered_json(nullptr);
    item["message"] = v.message;
    violations.push_back(item);
  }
  out["violations"] = violations;
  ordered_json roots = ordered_json::array();
  for (const auto& z : r.singular_set) roots.push_back(complex_json(z));
  out["singular_set"] = roots;
  out["identically_singular"] = r.identically_singular;
  out["identically_singular_at"] =
      r.identically_singular_at ? number_json(*r.identically_singular_at) : ordered_json(nullptr);
  return out;
}

ordered_json band_json(const BandReport& r) {
  ordered_json out;
  out["window"] = {r.lambda_min, r.lambda_max};
  ordered_json bands = ordered_json::array();
  ordered_json clipped = ordered_json::array();
  for (const auto& b : r.bands) {
    bands.push_back({b.lo, b.hi});
    clipped.push_back({b.lo_clipped, b.hi_clipped});
  }
  out["bands"] = bands;
  out["clipped"] = clipped;
  ordered_json edges = ordered_json::array();
  for (const auto& e : r.edges) {
    ordered_json item;
    item["lambda"] = e.lambda;
    item["type"] = to_string(e.type);
    item["D"] = e.D;
    item["D_dot"] = e.D_dot;
    item["monodromy_is_pm_identity"] = e.monodromy_is_pm_identity;
    edges.push_back(item);
  }
  out["edges"] = edges;
  ordered_json flags;
  flags["constant_D"] = r.flags.constant_D;
  flags["constant_value"] =
      r.flags.constant_value ? number_json(*r.flags.constant_value) : ordered_json(nullptr);
  flags["non_definite"] = r.flags.non_definite;
  flags["scalar_whole_line"] = r.flags.scalar_whole_line;
  out["flags"] = flags;
  out["tolerance_achieved"] = r.tolerance_achieved;
  out["l0_dimension"] = r.l0_dimension;
  out["max_multiplier_deviation"] = r.max_multiplier_deviation;
  return out;
}

ordered_json floquet_json(const FloquetData& d) {
  ordered_json out;
  out["lambda"] = complex_json(d.monodromy.lambda);
  out["M"] = matrix_json(d.monodromy.M);
  out["det_M"] = complex_json(d.monodromy.det_M);
  out["D"] = complex_json(d.monodromy.D);
  ordered_json rho = ordered_json::array();
  for (const auto& z : d.multipliers) rho.push_back(complex_json(z));
  out["multipliers"] = rho;
  ordered_json alpha = ordered_json::array();
  for (const auto& z : d.exponents) alpha.push_back(complex_json(z));
  out["exponents"] = alpha;
  out["structure"] = to_string(d.structure);
  out["near_threshold"] = d.near_threshold;
  ordered_json vecs = ordered_json::array();
  for (const auto& v : d.eigenvectors) vecs.push_back(vector_json(v));
  out["eigenvectors"] = vecs;
  out["jordan_vector"] = d.jordan_vector ? vector_json(*d.jordan_vector) : ordered_json(nullptr);
  return out;
}

void print_json(std::ostream& out, const ordered_json& j) { out << j.dump(2) << "\n"; }

std::vector<double> sample_grid(double lo, double hi, int samples) {
  if (samples < 1) throw UsageError("--samples must be at least 1");
  if (!(lo <= hi)) throw UsageError("empty lambda window: --lambda-min must not exceed --lambda-max");
  std::vector<double> out;
  for (int i = 0; i < samples; ++i) {
    out.push_back(samples == 1 ? lo : (i + 1 == samples ? hi : lo + (hi - lo) * i / (samples - 1)));
  }
  return out;
}

struct Window {
  double lo = kNaN;
  double hi = kNaN;
};

Window resolve_window(const Loaded& l, const Window& given) {
  Window w = given;
  if (l.example) {
    if (std::isnan(w.lo)) w.lo = l.example->window_lo;
    if (std::isnan(w.hi)) w.hi = l.example->window_hi;
  }
  if (std::isnan(w.lo) || std::isnan(w.hi)) {
    throw UsageError("--lambda-min and --lambda-max are required");
  }
  return w;
}

int cmd_validate(const Source& src, std::ostream& out, std::ostream& err) {
  const auto l = load(src, false);
  ordered_json j;
  j["metadata"] = metadata_json(l);
  j["validation"] = validation_json(l.validation);
  print_json(out, j);
  if (!l.validation.ok) {
    err << "error: " << l.validation.summary() << "\n";
    return kInvalidProblem;
  }
  return kOk;
}

void write_discriminant(const CanonicalSystem& sys, const std::vector<double>& grid,
                        const std::string& format, std::ostream& out) {
  PeriodLayout layout(sys);
  struct Row {
    double lambda;
    cplx d;
    double abs_rho1;
    std::string error;
  };
  std::vector<Row> rows;
  for (double l : grid) {
    try {
      const auto data = multipliers_exponents(layout, l);
      rows.push_back({l, data.monodromy.D, std::abs(data.multipliers[0]), ""});
    } catch (const SingularLambdaError& e) {
      rows.push_back({l, cplx(kNaN, kNaN), kNaN, "singular_lambda at x=" + format_double(e.position())});
    } catch (const Error& e) {
      rows.push_back({l, cplx(kNaN, kNaN), kNaN, e.what()});
    }
  }
  if (format == "json") {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json item;
      item["lambda"] = r.lambda;
      item["re_D"] = number_json(r.d.real());
      item["im_D"] = number_json(r.d.imag());
      item["abs_rho1"] = number_json(r.abs_rho1);
      item["error"] = r.error.empty() ? ordered_json(nullptr) : ordered_json(r.error);
      arr.push_back(item);
    }
    ordered_json j;
    j["rows"] = arr;
    print_json(out, j);
    return;
  }
  out << "lambda,re_D,im_D,abs_rho1,error\n";
  for (const auto& r : rows) {
    std::string error = r.error;
    for (auto& c : error) {
      if (c == ',' || c == '\n') c = ';';
    }
    out << format_double(r.lambda) << ',' << format_double(r.d.real()) << ','
        << format_double(r.d.imag()) << ',' << format_double(r.abs_rho1) << ',' << error << "\n";
  }
}

int cmd_discriminant(const Source& src, const Window& window, int samples, std::ostream& out) {
  const auto l = load(src, true);
  const auto w = resolve_window(l, window);
  write_discriminant(l.sys, sample_grid(w.lo, w.hi, samples), src.output.empty() ? "csv" : src.output,
                     out);
  return kOk;
}

BandReport compute_bands(const Loaded& l, const Window& w, const BandOptions& opts) {
  if (l.sys.n == 1) return scalar_spectrum(l.sys, w.lo, w.hi);
  return stability_bands(l.sys, w.lo, w.hi, opts);
}

void write_bands(const Loaded& l, const BandReport& r, const std::string& format, std::ostream& out) {
  if (format == "csv") {
    out << "lo,hi,lo_clipped,hi_clipped\n";
    for (const auto& b : r.bands) {
      out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << (b.lo_clipped ? "true" : "false")
          << ',' << (b.hi_clipped ? "true" : "false") << "\n";
    }
    return;
  }
  ordered_json j = band_json(r);
  j["metadata"] = metadata_json(l);
  print_json(out, j);
}

int cmd_bands(const Source& src, const Window& window, const BandOptions& opts, std::ostream& out) {
  const auto l = load(src, true);
  const auto w = resolve_window(l, window);
  if (!(w.lo < w.hi)) throw UsageError("empty lambda window: --lambda-min must be below --lambda-max");
  write_bands(l, compute_bands(l, w, opts), src.output.empty() ? "json" : src.output, out);
  return kOk;
}

void require_json(const Source& src, const char* cmd) {
  if (!src.output.empty() && src.output != "json") {
    throw UsageError(std::string(cmd) + " only supports --output json");
  }
}

int cmd_monodromy(const Source& src, cplx lambda, std::ostream& out) {
  require_json(src, "monodromy");
  const auto l = load(src, true);
  ordered_json j = floquet_json(multipliers_exponents(l.sys, lambda));
  j["classification"] = to_string(classify_lambda(l.sys, lambda));
  j["metadata"] = metadata_json(l);
  print_json(out, j);
  return kOk;
}

int cmd_greens(const Source& src, cplx lambda, double x, double y, std::ostream& out) {
  require_json(src, "greens");
  const auto l = load(src, true);
  const GreensFunction green(l.sys, lambda);
  const auto g = green(x, y);
  ordered_json j;
  j["lambda"] = complex_json(g.lambda);
  j["x"] = g.x;
  j["y"] = g.y;
  j["G"] = matrix_json(g.G);
  j["decay_exponent"] = g.decay_exponent;
  j["multipliers"] = {complex_json(green.growing_multiplier()),
                      complex_json(green.decaying_multiplier())};
  j["metadata"] = metadata_json(l);
  print_json(out, j);
  return kOk;
}

int cmd_examples(std::vector<std::string> args, const Source& src, const Window& window,
                 int samples, const BandOptions& opts, std::ostream& out) {
  static const std::vector<std::string> actions{"discriminant", "bands", "check"};
  auto is_action = [&](const std::string& s) {
    return std::find(actions.begin(), actions.end(), s) != actions.end();
  };
  if (args.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& e : example_registry()) {
      ordered_json item;
      item["name"] = e.name;
      item["summary"] = e.summary;
      ordered_json params = ordered_json::object();
      for (const auto& p : e.params) params[p.name] = p.default_value;
      item["params"] = params;
      item["window"] = {e.window_lo, e.window_hi};
      item["closed_form"] = static_cast<bool>(e.closed_form_D);
      list.push_back(item);
    }
    print_json(out, list);
    return kOk;
  }
  if (args.size() == 1) args.push_back("check");
  if (args.size() != 2) throw UsageError("usage: examples [<name> <discriminant|bands|check>]");
  if (is_action(args[0]) && !is_action(args[1])) std::swap(args[0], args[1]);
  if (!is_action(args[1])) {
    throw UsageError("unknown examples action '" + args[1] + "' (discriminant, bands, check)");
  }
  if (!src.problem.empty() || !src.example.empty()) {
    throw UsageError("examples takes the example name as a positional argument");
  }
  Source s = src;
  s.example = args[0];
  const std::string& action = args[1];
  if (action == "check") {
    const auto& entry = find_example(s.example);
    const auto params = resolve_params(entry, parse_params(s.params));
    const double lo = std::isnan(window.lo) ? entry.window_lo : window.lo;
    const double hi = std::isnan(window.hi) ? entry.window_hi : window.hi;
    if (!(lo <= hi)) throw UsageError("empty lambda window");
    const auto check = check_example(entry, params, samples, lo, hi);
    ordered_json j;
    j["name"] = check.name;
    ordered_json p = ordered_json::object();
    for (const auto& [k, v] : check.params) p[k] = v;
    j["params"] = p;
    j["window"] = {check.lambda_min, check.lambda_max};
    j["samples"] = check.samples;
    j["max_error"] = check.max_error;
    j["worst_lambda"] = check.worst_lambda;
    print_json(out, j);
    return kOk;
  }
  if (action == "discriminant") return cmd_discriminant(s, window, samples, out);
  return cmd_bands(s, window, opts, out);
}

void add_source_options(CLI::App* sub, Source& src) {
  sub->add_option("--problem", src.problem, "Problem file (JSON)");
  sub->add_option("--example", src.example, "Built-in example name");
  sub->add_option("--param", src.params, "Example parameter override name=value")->take_all();
  sub->add_option("--output", src.output, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Floquet data, spectral bands and Green's functions of periodic canonical systems"};
  app.name("floq");
  app.require_subcommand(1);

  Source src;
  Window window;
  int samples = 100;
  BandOptions band_opts;
  double lambda_re = kNaN;
  double lambda_im = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::vector<std::string> example_args;

  auto* validate = app.add_subcommand("validate", "Check a problem against all hypotheses");
  auto* disc = app.add_subcommand("discriminant", "Sample D(lambda) over a window");
  auto* bands = app.add_subcommand("bands", "Spectral bands in a window");
  auto* mono = app.add_subcommand("monodromy", "Monodromy matrix and Floquet data at lambda");
  auto* greens = app.add_subcommand("greens", "Green's function G(x, y) at lambda");
  auto* examples = app.add_subcommand("examples", "List, sample or check the built-in examples");

  for (auto* sub : {validate, disc, bands, mono, greens, examples}) add_source_options(sub, src);
  for (auto* sub : {disc, bands, examples}) {
    sub->add_option("--lambda-min", window.lo, "Window start");
    sub->add_option("--lambda-max", window.hi, "Window end");
  }
  for (auto* sub : {disc, examples}) {
    sub->add_option("--samples", samples, "Number of sample points")->check(CLI::PositiveNumber);
  }
  for (auto* sub : {bands, examples}) {
    sub->add_option("--grid-n", band_opts.grid_n, "Grid size for the band search")
        ->check(CLI::Range(3, 10000000));
    sub->add_option("--tol", band_opts.tol, "Relative edge tolerance")->check(CLI::PositiveNumber);
  }
  for (auto* sub : {mono, greens}) {
    sub->add_option("--lambda", lambda_re, "Spectral parameter (real part)")->required();
    sub->add_option("--lambda-im", lambda_im, "Imaginary part of the spectral parameter");
  }
  greens->add_option("--x", x, "First argument of G")->required();
  greens->add_option("--y", y, "Second argument of G")->required();
  examples->add_option("args", example_args, "<name> <discriminant|bands|check>");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const cplx lambda(lambda_re, lambda_im);
    if (validate->parsed()) return cmd_validate(src, out, err);
    if (disc->parsed()) return cmd_discriminant(src, window, samples, out);
    if (bands->parsed()) return cmd_bands(src, window, band_opts, out);
    if (mono->parsed()) return cmd_monodromy(src, lambda, out);
    if (greens->parsed()) return cmd_greens(src, lambda, x, y, out);
    if (examples->parsed()) {
      return cmd_examples(example_args, src, window, samples, band_opts, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ProblemParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const InvalidProblemError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const IdenticallySingularError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const HypothesisError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidProblem;
  } catch (const SpectrumError& e) {
    err << "error: " << e.what() << " [classification: " << e.label() << "]\n";
    return kSpectrumQuery;
  } catch (const SingularLambdaError& e) {
    err << "error: " << e.what() << " [classification: singular_lambda]\n";
    return kSpectrumQuery;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"floq"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace floq::cli
