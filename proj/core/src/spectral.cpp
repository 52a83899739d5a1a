#include "floq/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "floq/linalg.hpp"

namespace floq {

namespace {

constexpr double kTouchTol = 1e-9;
constexpr double kIdentityTol = 1e-8;
constexpr double kConstantTol = 1e-10;
constexpr int kMaxBisection = 200;

bool singular_at(const PeriodLayout& layout, cplx lambda, double* where = nullptr) {
  const auto& sys = layout.system();
  for (const auto& atom : layout.atoms()) {
    const ComplexMatrix b = jump_matrix(sys.J, atom.dq, atom.dw, lambda, +1);
    const double scale = 1.0 + max_abs(b);
    const double det_scale = sys.n == 1 ? scale : scale * scale;
    if (std::abs(b.determinant()) <= 1e-12 * det_scale) {
      if (where) *where = atom.position;
      return true;
    }
  }
  return false;
}

struct Sample {
  double lambda;
  double d;
  bool touch = false;
};

struct Point {
  double lambda;
  bool root = false;
  bool touch = false;
};

class BandSearch {
 public:
  BandSearch(const CanonicalSystem& sys, const BandOptions& opts) : layout_(sys), opts_(opts) {}

  double d(double lambda) const { return discriminant(layout_, lambda).real(); }
  double d_dot(double lambda) const { return discriminant_derivative(layout_, lambda).real(); }
  double tol_at(double lambda) const { return opts_.tol * (1.0 + std::abs(lambda)); }
  const PeriodLayout& layout() const { return layout_; }
  double achieved() const { return achieved_; }

  // Extremum of D on [a, b]: zero of D' by sign bisection, or golden-section
  // search when D' has no sign change on the bracket.
  double extremum(double a, double b, bool is_max) {
    double da = d_dot(a);
    double db = d_dot(b);
    if (da * db < 0.0) {
      for (int it = 0; it < kMaxBisection && b - a > tol_at(0.5 * (a + b)); ++it) {
        const double m = 0.5 * (a + b);
        const double dm = d_dot(m);
        if (dm == 0.0) return m;
        if ((dm < 0.0) == (da < 0.0)) {
          a = m;
          da = dm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    const double sign = is_max ? 1.0 : -1.0;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double e = a + g * (b - a);
    double fc = sign * d(c);
    double fe = sign * d(e);
    for (int it = 0; it < kMaxBisection && b - a > tol_at(0.5 * (a + b)); ++it) {
      if (fc > fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = sign * d(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = sign * d(e);
      }
    }
    return 0.5 * (a + b);
  }

  // Root of D - level in [a, b] given a strict sign change.
  double crossing(double a, double b, double fa, double level) {
    for (int it = 0; it < kMaxBisection && b - a > tol_at(0.5 * (a + b)); ++it) {
      const double m = 0.5 * (a + b);
      const double fm = d(m) - level;
      if (fm == 0.0) {
        return m;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = m;
        fa = fm;
      } else {
        b = m;
      }
    }
    achieved_ = std::max(achieved_, b - a);
    return 0.5 * (a + b);
  }

 private:
  PeriodLayout layout_;
  BandOptions opts_;
  double achieved_ = 0.0;
};

void check_window(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    throw InvalidArgument("lambda window must be finite with lambda_min < lambda_max");
  }
}

}  // namespace

std::string to_string(EdgeType t) {
  return t == EdgeType::simple ? "simple" : "degenerate";
}

std::string to_string(PointLabel label) {
  switch (label) {
    case PointLabel::resolvent: return "resolvent";
    case PointLabel::band_interior: return "band_interior";
    case PointLabel::band_edge: return "band_edge";
    case PointLabel::singular: return "singular_lambda";
  }
  return "unknown";
}

BandReport stability_bands(const CanonicalSystem& sys, double lambda_min, double lambda_max,
                           const BandOptions& opts) {
  check_window(lambda_min, lambda_max);
  if (opts.grid_n < 3) throw InvalidArgument("stability_bands: grid_n must be at least 3");
  if (!(opts.tol > 0.0)) throw InvalidArgument("stability_bands: tol must be positive");
  if (sys.n != 2) {
    throw HypothesisError("stability_bands: n = 1 has no band structure; use scalar_spectrum");
  }
  const auto validation = validate_system(sys);
  if (!validation.ok) throw HypothesisError(validation.summary());

  BandSearch search(sys, opts);
  BandReport out;
  out.lambda_min = lambda_min;
  out.lambda_max = lambda_max;

  const auto l0 = detect_l0(sys);
  out.l0_dimension = l0.dimension;
  out.flags.non_definite = l0.dimension > 0;

  const int n = opts.grid_n;
  const double step = (lambda_max - lambda_min) / (n - 1);
  std::vector<Sample> samples;
  samples.reserve(n + 16);
  double d_min = std::numeric_limits<double>::infinity();
  double d_max = -d_min;
  for (int i = 0; i < n; ++i) {
    const double l = i + 1 == n ? lambda_max : lambda_min + i * step;
    const double v = search.d(l);
    samples.push_back({l, v});
    d_min = std::min(d_min, v);
    d_max = std::max(d_max, v);
  }

  if (d_max - d_min <= kConstantTol * (1.0 + std::max(std::abs(d_min), std::abs(d_max)))) {
    out.flags.constant_D = true;
    out.flags.constant_value = 0.5 * (d_min + d_max);
    return out;
  }

  // Refine grid extrema; a refined extremum within kTouchTol of +-2 is a
  // tangency and is snapped onto the level.
  std::vector<Sample> extra;
  for (int i = 1; i + 1 < n; ++i) {
    const double l = samples[i - 1].d;
    const double c = samples[i].d;
    const double r = samples[i + 1].d;
    const bool is_max = (c >= l && c > r) || (c > l && c >= r);
    const bool is_min = (c <= l && c < r) || (c < l && c <= r);
    if (!is_max && !is_min) continue;
    const double star = search.extremum(samples[i - 1].lambda, samples[i + 1].lambda, is_max);
    double value = search.d(star);
    bool touch = false;
    if (std::abs(std::abs(value) - 2.0) <= kTouchTol) {
      value = value > 0.0 ? 2.0 : -2.0;
      touch = true;
    }
    extra.push_back({star, value, touch});
  }
  samples.insert(samples.end(), extra.begin(), extra.end());
  std::stable_sort(samples.begin(), samples.end(),
                   [](const Sample& a, const Sample& b) { return a.lambda < b.lambda; });
  std::vector<Sample> merged;
  for (const auto& s : samples) {
    if (!merged.empty() && s.lambda == merged.back().lambda) {
      if (s.touch) merged.back() = s;
      continue;
    }
    merged.push_back(s);
  }

  std::vector<Point> roots;
  for (double level : {2.0, -2.0}) {
    for (std::size_t i = 0; i < merged.size(); ++i) {
      const double gi = merged[i].d - level;
      if (gi == 0.0) {
        roots.push_back({merged[i].lambda, true, merged[i].touch});
        continue;
      }
      if (i + 1 == merged.size()) continue;
      const double gj = merged[i + 1].d - level;
      if (gj != 0.0 && (gi < 0.0) != (gj < 0.0)) {
        roots.push_back(
            {search.crossing(merged[i].lambda, merged[i + 1].lambda, gi, level), true, false});
      }
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const Point& a, const Point& b) { return a.lambda < b.lambda; });

  std::vector<Point> points{{lambda_min, false, false}};
  for (const auto& r : roots) {
    auto& last = points.back();
    if (r.lambda - last.lambda <= 4.0 * search.tol_at(r.lambda)) {
      last.root = true;
      last.touch = last.touch || r.touch;
      if (points.size() > 1) last.lambda = r.lambda;
      continue;
    }
    points.push_back(r);
  }
  if (lambda_max - points.back().lambda <= 4.0 * search.tol_at(lambda_max)) {
    points.back().lambda = lambda_max;
  } else {
    points.push_back({lambda_max, false, false});
  }

  // Intervals between consecutive points lie entirely inside or outside.
  const std::size_t m = points.size() - 1;
  std::vector<bool> inside(m);
  for (std::size_t j = 0; j < m; ++j) {
    inside[j] = std::abs(search.d(0.5 * (points[j].lambda + points[j + 1].lambda))) <= 2.0;
  }

  for (std::size_t j = 0; j < points.size(); ++j) {
    const bool left_in = j > 0 && inside[j - 1];
    const bool right_in = j < m && inside[j];
    const auto& p = points[j];
    if (right_in && !left_in) {
      std::size_t k = j;
      while (k < m && inside[k]) ++k;
      Band band{p.lambda, points[k].lambda, false, false};
      band.lo_clipped = j == 0 && !p.root;
      band.hi_clipped = k == m && !points[k].root;
      out.bands.push_back(band);
    } else if (!left_in && !right_in && p.root) {
      out.bands.push_back({p.lambda, p.lambda, false, false});
    }
    if (!p.root) continue;
    BandEdge edge;
    edge.lambda = p.lambda;
    const auto mono = monodromy(search.layout(), p.lambda);
    edge.D = mono.D.real();
    edge.D_dot = search.d_dot(p.lambda);
    const double sign = edge.D >= 0.0 ? 1.0 : -1.0;
    edge.monodromy_is_pm_identity =
        max_abs(ComplexMatrix(mono.M - sign * ComplexMatrix::Identity(2, 2))) <=
        kIdentityTol * (1.0 + max_abs(mono.M));
    const bool two_sided = left_in == right_in;
    edge.type = p.touch || two_sided ? EdgeType::degenerate : EdgeType::simple;
    out.edges.push_back(edge);
  }
  out.tolerance_achieved = search.achieved();
  return out;
}

BandReport scalar_spectrum(const CanonicalSystem& sys, double lambda_min, double lambda_max,
                           int probes) {
  check_window(lambda_min, lambda_max);
  if (sys.n != 1) throw HypothesisError("scalar_spectrum: requires n = 1");
  if (probes < 2) throw InvalidArgument("scalar_spectrum: probes must be at least 2");
  if (sys.w.is_zero()) throw HypothesisError("scalar_spectrum: weight is identically zero");
  const auto validation = validate_system(sys);
  if (!validation.ok) throw HypothesisError(validation.summary());

  PeriodLayout layout(sys);
  BandReport out;
  out.lambda_min = lambda_min;
  out.lambda_max = lambda_max;
  out.flags.scalar_whole_line = true;
  out.bands.push_back({lambda_min, lambda_max, true, true});
  const double step = (lambda_max - lambda_min) / (probes - 1);
  for (int i = 0; i < probes; ++i) {
    const double l = lambda_min + i * step;
    const double rho = std::abs(discriminant(layout, l));
    out.max_multiplier_deviation = std::max(out.max_multiplier_deviation, std::abs(rho - 1.0));
  }
  return out;
}

PointLabel classify_lambda(const CanonicalSystem& sys, cplx lambda) {
  PeriodLayout layout(sys);
  if (singular_at(layout, lambda)) return PointLabel::singular;
  const cplx d = discriminant(layout, lambda);
  if (sys.n == 1) {
    return std::abs(std::abs(d) - 1.0) <= 1e-10 ? PointLabel::band_interior
                                                 : PointLabel::resolvent;
  }
  // A non-real D forces |rho_1| != 1.
  if (std::abs(d.imag()) > 1e-10 * (1.0 + std::abs(d))) return PointLabel::resolvent;
  const double re = d.real();
  if (std::abs(std::abs(re) - 2.0) <= kTouchTol) return PointLabel::band_edge;
  return std::abs(re) < 2.0 ? PointLabel::band_interior : PointLabel::resolvent;
}

L0Report detect_l0(const CanonicalSystem& sys, double probe_lambda) {
  constexpr int kAttempts = 5;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const double lambda = probe_lambda + attempt;
    std::optional<FloquetBasis> basis;
    try {
      basis.emplace(sys, lambda);
    } catch (const SingularLambdaError&) {
      continue;
    }
    const auto& data = basis->data();
    if (data.structure == FloquetStructure::double_jordan) continue;

    const auto& layout = basis->layout();
    const double x0 = sys.base_point;
    const double period = sys.period();
    const ComplexMatrix t = t_matrix(layout, lambda);

    std::vector<double> probes;
    for (int i = 0; i < 32; ++i) probes.push_back(x0 + period * i / 32.0);
    for (const auto& a : layout.atoms()) {
      probes.push_back(a.position < x0 ? a.position + period : a.position);
    }
    auto sup_sq = [&](const ComplexVector& c) {
      double s = 0.0;
      for (double x : probes) {
        const auto u = balanced_solution(layout, lambda, c, x);
        s = std::max({s, u.u_minus.squaredNorm(), u.u_plus.squaredNorm()});
      }
      return s;
    };

    L0Report out;
    out.probe_lambda = lambda;
    std::vector<ComplexVector> candidates;
    if (data.structure == FloquetStructure::double_diagonal) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> eig(
          Eigen::Matrix2cd(0.5 * (t + t.adjoint())));
      for (int i = 0; i < 2; ++i) {
        const ComplexVector c = eig.eigenvectors().col(i);
        const double seminorm = eig.eigenvalues()(i);
        out.seminorms.push_back(seminorm);
        if (seminorm <= 1e-12 * (1.0 + sup_sq(c))) candidates.push_back(c);
      }
    } else {
      for (const auto& c : data.eigenvectors) {
        const double seminorm = (c.adjoint() * t * c)(0, 0).real();
        out.seminorms.push_back(seminorm);
        if (seminorm <= 1e-12 * (1.0 + sup_sq(c))) candidates.push_back(c);
      }
    }

    // Confirm candidates pointwise: w u = 0 at every atom and on every
    // segment carrying density.
    for (const auto& c : candidates) {
      const double scale = 1.0 + std::sqrt(sup_sq(c));
      bool ok = true;
      for (const auto& a : layout.atoms()) {
        if (a.dw.isZero()) continue;
        const auto u = balanced_solution(layout, lambda, c, a.position);
        const double r = (a.dw.cast<cplx>() * u.u_balanced).norm();
        if (r > 1e-9 * (1.0 + max_abs(a.dw)) * scale) ok = false;
      }
      for (const auto& seg : layout.segments()) {
        if (seg.w_density.isZero()) continue;
        for (int i = 0; i < 5; ++i) {
          const double x = seg.from + (i + 0.5) / 5.0 * (seg.to - seg.from);
          const auto u = balanced_solution(layout, lambda, c, x);
          const double r = (seg.w_density.cast<cplx>() * u.u_minus).norm();
          if (r > 1e-9 * (1.0 + max_abs(seg.w_density)) * scale) ok = false;
        }
      }
      if (ok) out.basis.push_back(c);
    }
    out.dimension = static_cast<int>(out.basis.size());
    return out;
  }
  throw Error("detect_l0: no usable probe point (Jordan structure or singular at every probe)");
}

namespace {

const CanonicalSystem& checked_for_greens(const CanonicalSystem& sys, cplx lambda) {
  if (sys.n != 2) throw HypothesisError("greens_function: requires n = 2");
  double where = 0.0;
  if (singular_at(PeriodLayout(sys), lambda, &where)) {
    throw SpectrumError("greens_function: lambda lies in the singular set (atom at " +
                            std::to_string(where) + ")",
                        to_string(PointLabel::singular));
  }
  return sys;
}

}  // namespace

GreensFunction::GreensFunction(const CanonicalSystem& sys, cplx lambda)
    : basis_(checked_for_greens(sys, lambda), lambda) {
  const auto& data = basis_.data();
  const double r1 = std::abs(data.multipliers[0]);
  if (!(r1 > 1.0 + 1e-10)) {
    throw SpectrumError("greens_function: lambda lies on the spectrum (|rho| = 1)",
                        to_string(classify_lambda(sys, lambda)));
  }
  if (detect_l0(sys).dimension > 0) {
    throw HypothesisError("greens_function: the system is not definite (L0 is nontrivial)");
  }
  rho_[0] = data.multipliers[0];
  rho_[1] = data.multipliers[1];
  c_[0] = data.eigenvectors[0];
  c_[1] = data.eigenvectors[1];
  const cplx k = (c_[0].transpose() * sys.J * c_[1])(0, 0);
  c_[1] /= k;
  decay_ = std::log(r1) / sys.period();
}

BalancedValue GreensFunction::psi(int which, double x) const {
  if (which != 1 && which != 2) throw InvalidArgument("GreensFunction::psi: which must be 1 or 2");
  return basis_.solution(c_[which - 1], rho_[which - 1], x);
}

GreensValue GreensFunction::operator()(double x, double y) const {
  const double period = basis_.layout().system().period();
  GreensValue out;
  out.lambda = lambda();
  out.x = x;
  out.y = y;
  out.decay_exponent = decay_;
  if (std::abs(x - y) <= position_tolerance(x, period)) {
    const auto p1 = psi(1, x).u_balanced;
    const auto p2 = psi(2, x).u_balanced;
    out.G = 0.5 * (p2 * p1.transpose() + p1 * p2.transpose());
  } else if (y < x) {
    out.G = psi(2, x).u_balanced * psi(1, y).u_balanced.transpose();
  } else {
    out.G = psi(1, x).u_balanced * psi(2, y).u_balanced.transpose();
  }
  return out;
}

GreensValue greens_function(const CanonicalSystem& sys, cplx lambda, double x, double y) {
  return GreensFunction(sys, lambda)(x, y);
}

ResolventOutput resolvent_apply(const CanonicalSystem& sys, cplx lambda,
                                std::span<const PointSource> sources,
                                std::span<const double> sample_points) {
  if (sources.empty()) throw InvalidArgument("resolvent_apply: no sources given");
  GreensFunction green(sys, lambda);
  const auto& layout = green.basis().layout();
  const double period = sys.period();

  struct Term {
    double position;
    ComplexVector wf;  // Delta_w f
    cplx s1;           // psi_1#^T Delta_w f
    cplx s2;           // psi_2#^T Delta_w f
  };
  std::vector<Term> terms;
  for (const auto& src : sources) {
    if (src.value.size() != sys.n) {
      throw InvalidArgument("resolvent_apply: source vector has wrong dimension");
    }
    const RealMatrix dw = jump_at(sys.w, src.position);
    if (!is_atom(sys.w, src.position) || dw.isZero()) {
      throw InvalidArgument("resolvent_apply: source at " + std::to_string(src.position) +
                            " is not an atom of w");
    }
    const ComplexVector wf = dw.cast<cplx>() * src.value;
    const auto p1 = green.psi(1, src.position).u_balanced;
    const auto p2 = green.psi(2, src.position).u_balanced;
    terms.push_back({src.position, wf, (p1.transpose() * wf)(0, 0), (p2.transpose() * wf)(0, 0)});
  }

  double s_lo = terms.front().position;
  double s_hi = s_lo;
  for (const auto& t : terms) {
    s_lo = std::min(s_lo, t.position);
    s_hi = std::max(s_hi, t.position);
  }
  std::vector<double> xs(sample_points.begin(), sample_points.end());
  const long k_lo = static_cast<long>(std::floor(s_lo / period)) - 1;
  const long k_hi = static_cast<long>(std::floor(s_hi / period)) + 1;
  for (long k = k_lo; k <= k_hi; ++k) {
    for (const auto& a : layout.atoms()) {
      const double x = k * period + a.position;
      const double tol = position_tolerance(x, period);
      if (x >= s_lo - tol && x <= s_hi + tol) xs.push_back(x);
    }
  }
  std::sort(xs.begin(), xs.end());
  std::vector<double> unique_xs;
  for (double x : xs) {
    if (!unique_xs.empty() && x - unique_xs.back() <= position_tolerance(x, period)) continue;
    unique_xs.push_back(x);
  }

  ResolventOutput out;
  out.lambda = lambda;
  const int n = sys.n;
  for (double x : unique_xs) {
    const double tol = position_tolerance(x, period);
    cplx s1_lt = 0.0, s1_le = 0.0, s2_ge = 0.0, s2_gt = 0.0;
    ComplexVector wf_here = ComplexVector::Zero(n);
    for (const auto& t : terms) {
      const bool same = std::abs(t.position - x) <= tol;
      if (same) {
        s1_le += t.s1;
        s2_ge += t.s2;
        wf_here += t.wf;
      } else if (t.position < x) {
        s1_lt += t.s1;
        s1_le += t.s1;
      } else {
        s2_ge += t.s2;
        s2_gt += t.s2;
      }
    }
    const auto p1 = green.psi(1, x);
    const auto p2 = green.psi(2, x);
    ResolventSample s;
    s.x = x;
    s.u_minus = p2.u_minus * s1_lt + p1.u_minus * s2_ge;
    s.u_plus = p2.u_plus * s1_le + p1.u_plus * s2_gt;
    s.u_balanced = 0.5 * (s.u_minus + s.u_plus);
    if (const auto* atom = layout.atom_at(x)) {
      s.at_atom = true;
      const ComplexMatrix bp = jump_matrix(sys.J, atom->dq, atom->dw, lambda, +1);
      const ComplexMatrix bm = jump_matrix(sys.J, atom->dq, atom->dw, lambda, -1);
      s.jump_residual = (bp * s.u_plus - bm * s.u_minus - wf_here).norm();
      out.max_jump_residual = std::max(out.max_jump_residual, s.jump_residual);
    }
    out.samples.push_back(std::move(s));
  }

  for (std::size_t i = 0; i + 1 < out.samples.size(); ++i) {
    const auto& a = out.samples[i];
    const auto& b = out.samples[i + 1];
    ComplexVector start = a.u_plus;
    if (const auto* atom = layout.atom_at(a.x)) {
      start = atom_transfer(sys.J, atom->dq, atom->dw, lambda, a.x).inverse() * a.u_plus;
    }
    const ComplexMatrix phi = fundamental_matrix(layout, lambda, a.x, b.x).value();
    const double r = (b.u_minus - phi * start).norm() / (1.0 + b.u_minus.norm());
    out.max_ac_residual = std::max(out.max_ac_residual, r);
  }
  return out;
}

}  // namespace floq
