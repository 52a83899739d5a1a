// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "floq/example_registry.hpp"
#include "floq/floquet.hpp"
#include "floq/spectral.hpp"
#include "floq_cli/cli.hpp"
#include "test_support.hpp"

using namespace floq;
using floq::testing::example_system;
using floq::testing::oracle_resolvent;
using floq::testing::random_system;
using floq::testing::scalar_comb_system;
using floq::testing::uniform;

namespace {

// Pinned tolerances and budgets.
constexpr double kClosedFormTol = 1e-9;
constexpr double kClosedFormSeconds = 1.0;
constexpr double kBandEdgeTol = 1e-8;
constexpr double kDetTol = 1e-10;
constexpr double kMultiplierProductTol = 1e-10;
constexpr double kBasePointTol = 1e-9;
constexpr double kImagDTol = 1e-10;
constexpr double kConjugationTol = 1e-10;
constexpr double kRandomSeconds = 10.0;
constexpr int kRandomSystems = 50;
constexpr int kRandomLambdas = 20;
constexpr double kDerivativeRelTol = 1e-6;
constexpr double kIdentityTol = 1e-8;
constexpr int kDerivativeLambdas = 50;
constexpr double kJordanTol = 1e-9;
constexpr double kJumpTol = 1e-9;
constexpr double kResolventOracleTol = 1e-9;
constexpr double kDecayConstant = 10.0;
constexpr double kConstantDTol = 1e-12;
constexpr double kScalarModulusTol = 1e-10;
constexpr int kScalarLambdas = 100;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* id, const char* what, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%s)\n", o.pass ? "PASS" : "FAIL", id, what, o.detail.c_str());
  std::fflush(stdout);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Outcome ac_closed_forms() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& e : example_registry()) {
    if (!e.closed_form_D) continue;
    const auto c = check_example(e, resolve_params(e, {}), 100);
    if (c.max_error > worst) {
      worst = c.max_error;
      worst_name = e.name;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= kClosedFormTol && t < kClosedFormSeconds,
          fmt("max error %.3g, %.3f s", worst, t) + (worst_name.empty() ? "" : " worst " + worst_name)};
}

Outcome ac_bands() {
  const auto r4 = stability_bands(example_system("dirac-comb-scalar-weight"), -10, 10);
  const auto r6 = stability_bands(example_system("dirac-comb-full"), -50, 50);
  bool ok = r4.bands.size() == 1 && r6.bands.size() == 2;
  double err = 0.0;
  if (ok) {
    err = std::max({std::abs(r4.bands[0].lo - 1.0), std::abs(r4.bands[0].hi - 5.0),
                    std::abs(r6.bands[0].lo + 50.0), std::abs(r6.bands[0].hi + 1.0),
                    std::abs(r6.bands[1].lo - 1.0), std::abs(r6.bands[1].hi - 50.0)});
    ok = err <= kBandEdgeTol && r6.bands[0].lo_clipped && r6.bands[1].hi_clipped && !r4.bands[0].lo_clipped &&
         !r4.bands[0].hi_clipped;
  }
  return {ok, fmt("%g + %g bands, max edge error %.3g", static_cast<double>(r4.bands.size()),
                  static_cast<double>(r6.bands.size()), err)};
}

Outcome ac_random_invariants() {
  std::mt19937_64 rng(20240601);
  const auto t0 = std::chrono::steady_clock::now();
  double det = 0, prod = 0, base = 0, imag = 0, conj = 0;
  for (int i = 0; i < kRandomSystems; ++i) {
    const auto sys = random_system(rng);
    auto shifted = sys;
    do {
      shifted.base_point = sys.base_point + uniform(rng, 0.05, 0.95) * sys.period();
    } while (is_atom(sys.q, shifted.base_point) || is_atom(sys.w, shifted.base_point));
    PeriodLayout layout(sys), layout_shifted(shifted);
    for (int k = 0; k < kRandomLambdas; ++k) {
      const double l = uniform(rng, -10, 10);
      const auto f = multipliers_exponents(layout, l);
      const cplx d = f.monodromy.D;
      const double scale = 1.0 + std::abs(d);
      det = std::max(det, std::abs(f.monodromy.det_M - 1.0));
      prod = std::max(prod, std::abs(f.multipliers[0] * f.multipliers[1] - 1.0));
      base = std::max(base, std::abs(discriminant(layout_shifted, l) - d) / scale);
      imag = std::max(imag, std::abs(d.imag()) / scale);
      const cplx lc(l, uniform(rng, -2, 2));
      const cplx dc = discriminant(layout, lc);
      conj = std::max(conj, std::abs(discriminant(layout, std::conj(lc)) - std::conj(dc)) / (1.0 + std::abs(dc)));
    }
  }
  const double t = seconds_since(t0);
  const bool ok = det <= kDetTol && prod <= kMultiplierProductTol && base <= kBasePointTol && imag <= kImagDTol &&
                  conj <= kConjugationTol && t < kRandomSeconds;
  std::ostringstream s;
  s << "det " << det << ", rho1 rho2 " << prod << ", base point " << base << ", Im D " << imag << ", conj " << conj
    << ", " << t << " s";
  return {ok, s.str()};
}

Outcome ac_derivative() {
  std::mt19937_64 rng(7);
  double fd_err = 0, id_err = 0;
  for (const char* name : {"schrodinger-free", "dirac-comb-scalar-weight", "dirac-comb-full"}) {
    const auto& e = find_example(name);
    const auto sys = e.build(resolve_params(e, {}));
    PeriodLayout layout(sys);
    const double r = sys.J(1, 0).real();
    for (int k = 0; k < kDerivativeLambdas; ++k) {
      const double l = uniform(rng, e.window_lo, e.window_hi);
      const auto m = monodromy(layout, l);
      const auto t = t_matrix(layout, l);
      const cplx dd = (m.M * sys.J.inverse() * t).trace();
      const double h = 1e-5 * (1.0 + std::abs(l));
      const cplx fd = (discriminant(layout, l + h) - discriminant(layout, l - h)) / (2.0 * h);
      fd_err = std::max(fd_err, std::abs(dd - fd) / (1.0 + std::abs(dd)));
      const auto& mm = m.M;
      const cplx d = m.D;
      ComplexVector a(2);
      a << mm(0, 0) - mm(1, 1), 2.0 * mm(1, 0);
      const cplx residual = 4.0 * r * mm(1, 0) * dd + t(0, 0) * (d * d - 4.0) - (a.adjoint() * t * a)(0, 0);
      id_err = std::max(id_err, std::abs(residual) / (1.0 + std::norm(d) + t.norm()));
    }
  }
  return {fd_err <= kDerivativeRelTol && id_err <= kIdentityTol,
          fmt("finite difference rel error %.3g, identity residual %.3g", fd_err, id_err)};
}

Outcome ac_jordan() {
  FloquetBasis basis(example_system("dirac-comb-scalar-weight"), 1.0);
  if (basis.data().structure != FloquetStructure::double_jordan) return {false, "structure is not double_jordan"};
  double chain = 0, periodic = 0;
  for (int k = 0; k <= 60; ++k) {
    const double x = -3.0 + 0.1 * k + 0.013;
    const auto [v1, v2] = basis.generalized(x);
    const auto [w1, w2] = basis.generalized(x + 1.0);
    chain = std::max(chain, (w2.u_balanced - v2.u_balanced - v1.u_balanced).norm());
    const auto p = basis.periodic_factors(x);
    const auto q = basis.periodic_factors(x + 1.0);
    periodic = std::max({periodic, (q.p0 - p.p0).norm(), (q.p1 - p.p1).norm()});
  }
  return {chain <= kJordanTol && periodic <= kJordanTol,
          fmt("chain residual %.3g, periodic factor drift %.3g", chain, periodic)};
}

Outcome ac_resolvent() {
  const auto sys = example_system("dirac-comb-full");
  ComplexVector f(2);
  f << 1.0, 0.0;
  const PointSource src{0.0, f};
  std::vector<double> points;
  for (int k = -10; k <= 10; ++k) points.push_back(k);
  const auto out = resolvent_apply(sys, 0.0, std::span(&src, 1), points);
  const auto oracle = oracle_resolvent(sys, 0.0, {{0.0, f}});
  GreensFunction g(sys, 0.0);
  const double rho2 = std::abs(g.decaying_multiplier());
  double at_zero = 0.0;
  for (const auto& s : out.samples) {
    if (s.x == 0.0) at_zero = std::max(s.u_minus.norm(), s.u_plus.norm());
  }
  double jump = 0, oracle_err = 0, decay = 0;
  int atoms = 0;
  for (const auto& s : out.samples) {
    if (!s.at_atom || std::abs(s.x) > 10.0) continue;
    ++atoms;
    jump = std::max(jump, s.jump_residual);
    const double k = std::abs(std::round(s.x));
    const double size = std::max(s.u_minus.norm(), s.u_plus.norm());
    decay = std::max(decay, size / (at_zero * std::pow(rho2, k)));
    for (const auto& o : oracle) {
      if (std::abs(o.x - s.x) > 1e-9) continue;
      oracle_err = std::max({oracle_err, (s.u_minus - o.u_minus).norm(), (s.u_plus - o.u_plus).norm()});
    }
  }
  return {atoms == 21 && jump <= kJumpTol && oracle_err <= kResolventOracleTol && decay <= kDecayConstant,
          fmt("jump residual %.3g, oracle error %.3g, decay constant %.3g", jump, oracle_err, decay)};
}

Outcome ac_degenerate() {
  const auto partial = stability_bands(example_system("constant-q-partial-weight"), -10, 10);
  const auto no_alpha = stability_bands(example_system("dirac-comb-scalar-weight", {{"alpha", 0}}), -10, 10);
  const auto no_weight = stability_bands(example_system("constant-q-no-weight", {{"a", 1}, {"b", 0}, {"d", 1}}), -10, 10);
  const bool ok_partial = partial.l0_dimension == 1 && partial.flags.constant_D && partial.flags.constant_value &&
                         std::abs(*partial.flags.constant_value - 2 * std::cosh(1.0)) <= kConstantDTol;
  const bool ok_no_alpha = no_alpha.l0_dimension == 2 && no_alpha.flags.constant_D;
  const bool ok_no_weight = no_weight.flags.constant_D && no_weight.bands.empty();
  std::ostringstream s;
  s << "constant-q-partial-weight dim " << partial.l0_dimension << ", scalar comb alpha=0 dim " << no_alpha.l0_dimension
    << ", constant-q-no-weight bands " << no_weight.bands.size();
  return {ok_partial && ok_no_alpha && ok_no_weight, s.str()};
}

Outcome ac_identically_singular() {
  std::ostringstream out, err;
  const int by_example = cli::run({"validate", "--example", "alternating-comb-singular"}, out, err);
  std::ostringstream out2, err2;
  const int by_file =
      cli::run({"discriminant", "--problem", std::string(FLOQ_DATA_DIR) + "/alternating_comb_singular.json"}, out2,
               err2);
  const bool ok = by_example == cli::kInvalidProblem && by_file == cli::kInvalidProblem &&
                  err.str().find("identically singular") != std::string::npos;
  return {ok, fmt("exit codes %g and %g", by_example, by_file)};
}

Outcome ac_scalar() {
  const auto sys = scalar_comb_system();
  PeriodLayout layout(sys);
  double dev = 0.0;
  for (int k = 0; k < kScalarLambdas; ++k) {
    const double l = -20.0 + 40.0 * k / (kScalarLambdas - 1);
    dev = std::max(dev, std::abs(std::abs(discriminant(layout, l)) - 1.0));
  }
  const auto r = scalar_spectrum(sys, -20, 20, kScalarLambdas);
  return {dev <= kScalarModulusTol && r.flags.scalar_whole_line && r.max_multiplier_deviation <= kScalarModulusTol,
          fmt("max ||rho| - 1| %.3g", dev)};
}

}  // namespace

int main() {
  report("AC1", "closed-form discriminants of the reference examples", ac_closed_forms);
  report("AC2", "band edges of the scalar-weight and full Dirac combs", ac_bands);
  report("AC3", "monodromy invariants on random systems", ac_random_invariants);
  report("AC4", "derivative of D against finite differences and the T identity", ac_derivative);
  report("AC5", "Jordan chain at the band edge of the scalar-weight comb", ac_jordan);
  report("AC6", "resolvent jump relation, decay and atom recursion oracle", ac_resolvent);
  report("AC7", "degenerate weights: L0 dimension and constant D", ac_degenerate);
  report("AC8", "identically singular problem exits with code 2", ac_identically_singular);
  report("AC9", "scalar multipliers on the unit circle", ac_scalar);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
