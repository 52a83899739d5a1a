#include "floq/example_registry.hpp"

#include <cmath>
#include <limits>

#include "floq/floquet.hpp"

namespace floq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RealMatrix mat(double a, double b, double c, double d) {
  RealMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

CanonicalSystem make_system(MatrixMeasureSpec q, MatrixMeasureSpec w) {
  CanonicalSystem sys;
  sys.n = 2;
  sys.J = canonical_j(1.0);
  sys.q = std::move(q);
  sys.w = std::move(w);
  sys.base_point = default_base_point(sys.q, sys.w);
  return sys;
}

// Atom at 0 plus a constant density over the period.
MatrixMeasureSpec comb_plus_density(const RealMatrix& atom, const RealMatrix& density) {
  MatrixMeasureSpec m = MatrixMeasureSpec::lebesgue(density, 1.0);
  m.atoms.push_back({0.0, atom});
  return m;
}

std::vector<ExampleEntry> build_registry() {
  std::vector<ExampleEntry> r;

  r.push_back({
      "schrodinger-free",
      "q = [[0,0],[0,-1]], w = [[1,0],[0,0]] (densities); -y'' = lambda y",
      {},
      [](const ParamMap&) {
        return make_system(MatrixMeasureSpec::lebesgue(mat(0, 0, 0, -1), 1.0),
                           MatrixMeasureSpec::lebesgue(mat(1, 0, 0, 0), 1.0));
      },
      [](const ParamMap&, cplx l) { return 2.0 * std::cos(std::sqrt(l)); },
      [](const ParamMap&) {
        return std::optional<std::vector<std::pair<double, double>>>({{0.0, kInf}});
      },
      -10.0, 40.0});

  r.push_back({
      "constant-q-no-weight",
      "q = [[a,b],[b,d]] (density), w = 0",
      {{"a", 0.0, "q11"}, {"b", 1.0, "q12 = q21"}, {"d", 0.0, "q22"}},
      [](const ParamMap& p) {
        return make_system(
            MatrixMeasureSpec::lebesgue(mat(p.at("a"), p.at("b"), p.at("b"), p.at("d")), 1.0),
            MatrixMeasureSpec::zero(2, 1.0));
      },
      [](const ParamMap& p, cplx) {
        const double b = p.at("b");
        return 2.0 * std::cosh(std::sqrt(cplx(b * b - p.at("a") * p.at("d"))));
      },
      [](const ParamMap&) {
        return std::optional<std::vector<std::pair<double, double>>>(
            std::vector<std::pair<double, double>>{});
      },
      -10.0, 10.0});

  r.push_back({
      "constant-q-partial-weight",
      "q = [[a,b],[b,0]], w = [[1,0],[0,0]] (densities)",
      {{"a", 1.0, "q11"}, {"b", 1.0, "q12 = q21"}},
      [](const ParamMap& p) {
        return make_system(
            MatrixMeasureSpec::lebesgue(mat(p.at("a"), p.at("b"), p.at("b"), 0.0), 1.0),
            MatrixMeasureSpec::lebesgue(mat(1, 0, 0, 0), 1.0));
      },
      [](const ParamMap& p, cplx) { return cplx(2.0 * std::cosh(p.at("b"))); },
      [](const ParamMap&) { return std::optional<std::vector<std::pair<double, double>>>(); },
      -10.0, 10.0});

  r.push_back({
      "dirac-comb-scalar-weight",
      "q = [[a mu, 0],[0, -1]], w = [[alpha mu, 0],[0, 0]], mu = sum of delta_k",
      {{"a", 1.0, "q atom weight"}, {"alpha", 1.0, "w atom weight"}},
      [](const ParamMap& p) {
        return make_system(comb_plus_density(mat(p.at("a"), 0, 0, 0), mat(0, 0, 0, -1)),
                           MatrixMeasureSpec::comb(mat(p.at("alpha"), 0, 0, 0), 1.0));
      },
      [](const ParamMap& p, cplx l) { return 2.0 + p.at("a") - p.at("alpha") * l; },
      [](const ParamMap& p) -> std::optional<std::vector<std::pair<double, double>>> {
        const double a = p.at("a");
        const double alpha = p.at("alpha");
        if (!(alpha > 0.0)) return std::nullopt;
        return std::vector<std::pair<double, double>>{{a / alpha, (4.0 + a) / alpha}};
      },
      -10.0, 10.0});

  r.push_back({
      "dirac-comb-rank-one",
      "q = [[a,b],[b,0]] mu, w = [[1,0],[0,0]] mu, b^2 != 4",
      {{"a", 0.0, "q11 atom weight"}, {"b", 1.0, "q12 atom weight"}},
      [](const ParamMap& p) {
        return make_system(
            MatrixMeasureSpec::comb(mat(p.at("a"), p.at("b"), p.at("b"), 0.0), 1.0),
            MatrixMeasureSpec::comb(mat(1, 0, 0, 0), 1.0));
      },
      [](const ParamMap& p, cplx) {
        const double b2 = p.at("b") * p.at("b");
        return cplx(2.0 * (4.0 + b2) / (4.0 - b2));
      },
      [](const ParamMap&) { return std::optional<std::vector<std::pair<double, double>>>(); },
      -10.0, 10.0});

  r.push_back({
      "dirac-comb-full",
      "q = [[a,b],[b,d]] mu, w = I mu, (a-d)^2 + 4b^2 < 16",
      {{"a", 0.0, "q11 atom weight"}, {"b", 1.0, "q12 atom weight"}, {"d", 0.0, "q22 atom weight"}},
      [](const ParamMap& p) {
        return make_system(
            MatrixMeasureSpec::comb(mat(p.at("a"), p.at("b"), p.at("b"), p.at("d")), 1.0),
            MatrixMeasureSpec::comb(mat(1, 0, 0, 1), 1.0));
      },
      [](const ParamMap& p, cplx l) {
        const double a = p.at("a");
        const double b = p.at("b");
        const double d = p.at("d");
        return 16.0 / (l * l - (a + d) * l + a * d - b * b + 4.0) - 2.0;
      },
      [](const ParamMap& p) -> std::optional<std::vector<std::pair<double, double>>> {
        // D = 2 where the denominator equals 4: lambda^2 - (a+d) lambda + ad - b^2 = 0.
        const double a = p.at("a");
        const double b = p.at("b");
        const double d = p.at("d");
        const double disc = (a - d) * (a - d) + 4.0 * b * b;
        const double lo = 0.5 * (a + d - std::sqrt(disc));
        const double hi = 0.5 * (a + d + std::sqrt(disc));
        if (disc == 0.0) return std::vector<std::pair<double, double>>{{-kInf, kInf}};
        return std::vector<std::pair<double, double>>{{-kInf, lo}, {hi, kInf}};
      },
      -20.0, 20.0});

  r.push_back({
      "alternating-comb-singular",
      "period 2, q = [[0,2],[2,0]] sum (delta_2k - delta_2k+1), w = [[2,0],[0,0]] sum delta_k",
      {},
      [](const ParamMap&) {
        MatrixMeasureSpec q = MatrixMeasureSpec::zero(2, 2.0);
        q.atoms.push_back({0.0, mat(0, 2, 2, 0)});
        q.atoms.push_back({1.0, mat(0, -2, -2, 0)});
        MatrixMeasureSpec w = MatrixMeasureSpec::zero(2, 2.0);
        w.atoms.push_back({0.0, mat(2, 0, 0, 0)});
        w.atoms.push_back({1.0, mat(2, 0, 0, 0)});
        return make_system(std::move(q), std::move(w));
      },
      {},
      [](const ParamMap&) { return std::optional<std::vector<std::pair<double, double>>>(); },
      -10.0, 10.0});

  return r;
}

}  // namespace

const std::vector<ExampleEntry>& example_registry() {
  static const std::vector<ExampleEntry> registry = build_registry();
  return registry;
}

const ExampleEntry& find_example(const std::string& name) {
  for (const auto& e : example_registry()) {
    if (e.name == name) return e;
  }
  std::string names;
  for (const auto& e : example_registry()) names += (names.empty() ? "" : ", ") + e.name;
  throw InvalidArgument("unknown example '" + name + "'; available: " + names);
}

ParamMap resolve_params(const ExampleEntry& entry, const ParamMap& overrides) {
  ParamMap out;
  for (const auto& p : entry.params) out[p.name] = p.default_value;
  for (const auto& [key, value] : overrides) {
    if (!out.count(key)) {
      std::string known;
      for (const auto& p : entry.params) known += (known.empty() ? "" : ", ") + p.name;
      throw InvalidArgument("example '" + entry.name + "' has no parameter '" + key +
                            "' (parameters: " + (known.empty() ? "none" : known) + ")");
    }
    out[key] = value;
  }
  return out;
}

ExampleCheck check_example(const ExampleEntry& entry, const ParamMap& params, int samples) {
  return check_example(entry, params, samples, entry.window_lo, entry.window_hi);
}

ExampleCheck check_example(const ExampleEntry& entry, const ParamMap& params, int samples,
                           double lambda_min, double lambda_max) {
  if (!entry.closed_form_D) {
    throw InvalidArgument("example '" + entry.name + "' has no closed-form discriminant");
  }
  if (samples < 1) throw InvalidArgument("check_example: samples must be positive");
  const auto sys = entry.build(params);
  PeriodLayout layout(sys);
  ExampleCheck out{entry.name, params, samples, lambda_min, lambda_max, 0.0, lambda_min};
  for (int i = 0; i < samples; ++i) {
    const double l = samples == 1 ? lambda_min
                                  : lambda_min + (lambda_max - lambda_min) * i / (samples - 1);
    const double err = std::abs(discriminant(layout, l) - entry.closed_form_D(params, l));
    if (err > out.max_error) {
      out.max_error = err;
      out.worst_lambda = l;
    }
  }
  return out;
}

}  // namespace floq
