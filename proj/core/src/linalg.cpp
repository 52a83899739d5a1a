#include "floq/linalg.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace floq {

namespace {

constexpr double kRescaleThreshold = 1e150;

// cosh(s) and sinh(s)/s as power series in z = s^2.
void small_cosh_sinhc(cplx z, cplx& cosh_s, cplx& sinhc_s) {
  cplx term_c = 1.0;
  cplx term_s = 1.0;
  cosh_s = term_c;
  sinhc_s = term_s;
  for (int k = 1; k <= 12; ++k) {
    term_c *= z / static_cast<double>((2 * k - 1) * (2 * k));
    term_s *= z / static_cast<double>((2 * k) * (2 * k + 1));
    cosh_s += term_c;
    sinhc_s += term_s;
  }
}

}  // namespace

ComplexMatrix ScaledMatrix::value() const {
  if (log_scale == 0.0) return matrix;
  return matrix * std::exp(log_scale);
}

ScaledMatrix expm_scaled(const ComplexMatrix& a) {
  const auto n = a.rows();
  if (n != a.cols() || n < 1 || n > 2) {
    throw InvalidArgument("expm: matrix must be 1x1 or 2x2");
  }
  if (n == 1) {
    const cplx z = a(0, 0);
    ComplexMatrix out(1, 1);
    out(0, 0) = std::exp(cplx(0.0, z.imag()));
    return {out, z.real()};
  }

  const cplx half_trace = 0.5 * (a(0, 0) + a(1, 1));
  ComplexMatrix b = a;
  b(0, 0) -= half_trace;
  b(1, 1) -= half_trace;
  const cplx z = -(b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0));  // s^2
  cplx s = std::sqrt(z);
  if (s.real() < 0.0) s = -s;

  // Eigenvalue gap is 2|s|; below this the closed form loses digits to the
  // division by s, so switch to the series.
  const double gap_floor = 1e-2;
  cplx cosh_s;
  cplx sinhc_s;
  double log_scale = half_trace.real();
  if (std::abs(s) < gap_floor) {
    small_cosh_sinhc(z, cosh_s, sinhc_s);
  } else if (s.real() < 300.0) {
    cosh_s = std::cosh(s);
    sinhc_s = std::sinh(s) / s;
  } else {
    // Factor e^{Re s} out of both hyperbolic functions.
    const cplx damp = std::exp(-2.0 * s);
    const cplx phase = std::exp(cplx(0.0, s.imag()));
    cosh_s = 0.5 * phase * (1.0 + damp);
    sinhc_s = 0.5 * phase * (1.0 - damp) / s;
    log_scale += s.real();
  }

  ComplexMatrix out = sinhc_s * b;
  out(0, 0) += cosh_s;
  out(1, 1) += cosh_s;
  out *= std::exp(cplx(0.0, half_trace.imag()));
  return {out, log_scale};
}

ComplexMatrix expm(const ComplexMatrix& a) { return expm_scaled(a).value(); }

ScaledMatrix multiply(const ScaledMatrix& lhs, const ScaledMatrix& rhs) {
  ScaledMatrix out{lhs.matrix * rhs.matrix, lhs.log_scale + rhs.log_scale};
  const double norm = max_abs(out.matrix);
  if (norm > kRescaleThreshold || (norm > 0.0 && norm < 1.0 / kRescaleThreshold)) {
    out.matrix /= norm;
    out.log_scale += std::log(norm);
  }
  return out;
}

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::max(best, std::abs(m(i, j)));
  return best;
}

double max_abs(const RealMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 64) throw InvalidArgument("gauss_legendre: order must be in [1, 64]");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(order); it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(order, std::move(rule)).first->second;
}

double spectral_rate(const ComplexMatrix& a) {
  if (a.rows() == 1) return std::abs(a(0, 0));
  const cplx half_trace = 0.5 * (a(0, 0) + a(1, 1));
  const cplx det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
  const cplx disc = std::sqrt(half_trace * half_trace - det);
  return std::max(std::abs(half_trace + disc), std::abs(half_trace - disc));
}

}  // namespace floq
