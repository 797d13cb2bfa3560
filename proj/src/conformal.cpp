#include "menergy/conformal.hpp"

#include <cmath>

#include "menergy/errors.hpp"

namespace menergy {

namespace {

void require_distinct(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw DimensionMismatch("points differ in dimension");
  const double scale = std::max(x.cwiseAbs().maxCoeff(), y.cwiseAbs().maxCoeff());
  const double dist = (x - y).norm();
  if (dist == 0.0 || dist < kernel::kDegenerateRelTol * scale)
    throw DegeneratePairError("pair of coincident points");
}

void require_pair(const PointPlanePair& p) {
  require_distinct(p.x, p.y);
  if (p.hx.ambient_dim() != p.hy.ambient_dim() || p.hx.dim() != p.hy.dim() ||
      p.hx.ambient_dim() != p.x.size())
    throw DimensionMismatch("pair planes and points disagree in dimension");
}

}  // namespace

double safe_pow(double base, double exponent) {
  if (base <= 0.0) return exponent > 0.0 ? 0.0 : 1.0;
  if (base < 1e-300) return std::exp(exponent * std::log(base));
  return std::pow(base, exponent);
}

Vec reflect(const Vec& x, const Vec& y, const Vec& z) {
  require_distinct(x, y);
  if (z.size() != x.size()) throw DimensionMismatch("reflect: vector dimension mismatch");
  const Vec d = x - y;
  return z - (2.0 * z.dot(d) / d.squaredNorm()) * d;
}

Subspace reflect_subspace(const Vec& x, const Vec& y, const Subspace& h) {
  require_distinct(x, y);
  if (h.ambient_dim() != x.size()) throw DimensionMismatch("reflect_subspace: dimension mismatch");
  const Vec d = x - y;
  const double dd = d.squaredNorm();
  Mat f = h.frame();
  for (Eigen::Index j = 0; j < f.cols(); ++j) f.col(j) -= (2.0 * f.col(j).dot(d) / dd) * d;
  return Subspace::span(f);
}

double conformal_angle(const PointPlanePair& p) {
  require_pair(p);
  return sine_spectrum(reflect_subspace(p.x, p.y, p.hx), p.hy).angle_metric();
}

double numerator_ltau(const PointPlanePair& p, double tau) {
  require(tau > -1.0, "tau must exceed -1");
  return safe_pow(conformal_angle(p), (1.0 + tau) * p.hx.dim());
}

double pointwise_ftau(const Vec& x, const Vec& y, const Subspace& hy, const Vec& e, double tau) {
  require_distinct(x, y);
  require(tau > -1.0, "tau must exceed -1");
  if (e.size() != x.size() || hy.ambient_dim() != x.size())
    throw DimensionMismatch("pointwise_ftau: dimension mismatch");
  require(std::abs(e.norm() - 1.0) < 1e-9, "pointwise_ftau: e must be a unit vector");
  const Vec d = x - y;
  const Vec v = hy.project_perp(e) - (2.0 * e.dot(d) / d.squaredNorm()) * hy.project_perp(d);
  return safe_pow(v.norm(), (1.0 + tau) * hy.dim());
}

double numerator_ks(const PointPlanePair& p) {
  require_pair(p);
  const double omc = sine_spectrum(reflect_subspace(p.x, p.y, p.hx), p.hy).one_minus_cos_product();
  return safe_pow(omc, p.hx.dim());
}

ComparisonConstants comparison_constant(double tau, int m) {
  require(tau >= 0.0 && m >= 1, "comparison_constant: need tau >= 0, m >= 1");
  ComparisonConstants c;
  if (tau < 1.0) {
    c.lower = 0.0;
    c.upper = std::pow(std::sqrt(static_cast<double>(m)), (1.0 + tau) * m);
  } else if (tau == 1.0) {
    c.lower = std::pow(2.0, -m);
    c.upper = std::pow(static_cast<double>(m), m);
  } else {
    c.lower = combined_angle_constant(tau, m);
  }
  return c;
}

namespace kernel {

double pair_numerator(const double* x, const double* y, const double* hx, const double* hy,
                      int n, int m, Kernel kind, double exponent) {
  std::array<double, kMaxAmbientDim> d;
  double dd = 0.0, scale = 0.0;
  for (int i = 0; i < n; ++i) {
    d[i] = x[i] - y[i];
    dd += d[i] * d[i];
    scale = std::max({scale, std::abs(x[i]), std::abs(y[i])});
  }
  if (dd == 0.0 || std::sqrt(dd) < kDegenerateRelTol * scale) return -1.0;
  std::array<double, kMaxAmbientDim * kMaxIntrinsicDim> reflected;
  for (int j = 0; j < m; ++j) {
    const double* col = hx + j * n;
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += col[i] * d[i];
    const double s = 2.0 * dot / dd;
    for (int i = 0; i < n; ++i) reflected[j * n + i] = col[i] - s * d[i];
  }
  const SineSpectrum spec = sine_spectrum(reflected.data(), hy, n, m);
  if (kind == Kernel::Ltau) return safe_pow(spec.max_sin2(), 0.5 * exponent);
  return safe_pow(spec.one_minus_cos_product(), exponent);
}

}  // namespace kernel

}  // namespace menergy
