#pragma once

#include <optional>

#include "menergy/grassmann.hpp"

namespace menergy {

/// Two distinct points with their mock tangent planes.
struct PointPlanePair {
  Vec x;
  Vec y;
  Subspace hx;
  Subspace hy;
};

enum class Kernel { Ltau, KS };

/// Reflection of z at the hyperplane (x - y)⊥.
Vec reflect(const Vec& x, const Vec& y, const Vec& z);

Subspace reflect_subspace(const Vec& x, const Vec& y, const Subspace& h);

/// ∢(R_xy(H(x)), H(y)).
double conformal_angle(const PointPlanePair& p);

/// ∢(R_xy(H(x)), H(y))^{(1+tau)m}.
double numerator_ltau(const PointPlanePair& p, double tau);

/// |Π_{H(y)⊥}(e) - 2<e,x-y> Π_{H(y)⊥}(x-y)/|x-y|^2|^{(1+tau)m}; its supremum
/// over unit e in H(x) is numerator_ltau.
double pointwise_ftau(const Vec& x, const Vec& y, const Subspace& hy, const Vec& e, double tau);

/// (1 - Π cos ϑ_i)^m over the principal angles of (R_xy(H(x)), H(y)).
double numerator_ks(const PointPlanePair& p);

struct ComparisonConstants {
  double lower = 0.0;
  std::optional<double> upper;
};

/// Constants with lower·E^tau <= E_KS <= upper·E^tau.
ComparisonConstants comparison_constant(double tau, int m);

/// base^exponent with 0^positive = 0 and no underflow for tiny bases.
double safe_pow(double base, double exponent);

namespace kernel {

/// Numerator for one ordered pair on raw column-major frames. Returns a
/// negative value when the points coincide.
double pair_numerator(const double* x, const double* y, const double* hx, const double* hy,
                      int n, int m, Kernel kind, double exponent);

/// The ordered pair's distance below which a pair counts as degenerate.
inline constexpr double kDegenerateRelTol = 1e-14;

}  // namespace kernel

}  // namespace menergy
