#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "menergy/energy.hpp"
#include "menergy/grassmann.hpp"

namespace menergy {

/// anchor + graph u over the plane F, with u taking F-coordinates to F⊥.
struct GraphDescriptor {
  Subspace base;
  GraphMap u;
  GraphJacobian du;  // may be empty
  double lip_bound = 0.0;
  Vec anchor;
  std::optional<double> hessian_bound;  // sup of ‖D²u‖ on the domain of interest

  int m() const { return base.dim(); }
  int n() const { return base.ambient_dim(); }
  Vec point(const Vec& xi) const { return anchor + base.frame() * xi + u(xi); }
  /// Tangent plane at xi, spanned by e_i + Du(xi)e_i.
  Subspace tangent(const Vec& xi) const;
};

namespace fixtures {
/// u(ξ) = a|ξ|²/2 along e_{m+1} in R^{m+1}; lip bound a·radius.
GraphDescriptor paraboloid(int m, double a, double radius);
/// u(ξ) = s|ξ| along e_{m+1}; Du jumps at 0.
GraphDescriptor cone_abs(int m, double s);
/// u(ξ) = A sin(k ξ₁) along e_{m+1}.
GraphDescriptor sin_wave(int m, double amplitude, double frequency);
/// m = 1, u(t) = Σ c_k t^k along e2; bounds are taken over |t| <= radius.
GraphDescriptor polynomial(const std::vector<double>& coeffs, double radius);
/// Graph of the linear map ξ -> Q L ξ over F, Q an orthonormal basis of F⊥.
GraphDescriptor linear(const Subspace& f, const Mat& l);
/// Graph over F of σ ν (sin(⟨w, ξ⟩ + φ) - sin φ) with |w| = 1 and unit ν ⊥ F.
GraphDescriptor sine_bump(const Subspace& f, double sigma, const Vec& w, double phase, const Vec& nu);
}  // namespace fixtures

/// ũ(y) = u(y + ξ) - u(ξ) anchored at x = anchor + ξ + u(ξ).
GraphDescriptor shift_graph(const GraphDescriptor& g, const Vec& x);

struct TiltReport {
  bool covered = false;
  double sigma = 0.0;
  double target_radius = 0.0;  // (1-σ)ρ/√(1+lip²)
  double worst_residual = 0.0;
  double worst_preimage = 0.0;  // largest |preimage| / ρ
  std::size_t grid_points = 0;
  std::size_t failures = 0;
};

/// Checks that every grid point of B_{(1-σ)ρ/√(1+lip²)}(0) ∩ G has a preimage
/// in graph u ∩ B_ρ(0) under Π_G. The graph must be anchored at the origin.
TiltReport tilting_coverage_check(const GraphDescriptor& g, const Subspace& gp, double chi, double rho,
                                  int grid_per_radius = 8);

struct AngleBounds {
  double angle = 0.0;   // ∢(T_p, T_q)
  double du_diff = 0.0; // ‖Du(x) - Du(y)‖
  double upper = 0.0;   // √((1+β²)/(1-β²)) ∢
  bool ok = false;      // angle <= du_diff <= upper (1e-12 slack)
};

AngleBounds graph_angle_bounds(const GraphDescriptor& g, const Vec& x, const Vec& y, double beta);

struct IntersectionReport {
  Mat x_frame;  // first j principal vectors of F, as columns (X)
  Mat y_frame;  // remaining principal vectors of F (Y)
  int j = 0;
  double c = 0.0;    // 5/(χ-8σ)
  bool verified = false;
  std::vector<Vec> points;
  std::size_t pairs_checked = 0;
  double worst_ratio = 0.0;  // max |Π_Y Δ| / (C |Π_X Δ|)
};

struct IntersectOptions {
  double extent = 0.5;      // half-width of the seed grid in X-coordinates
  int seeds_per_axis = 9;
  unsigned random_seed = 1;
};

IntersectionReport intersect_graphs(const GraphDescriptor& ga, const GraphDescriptor& gb, double chi,
                                    double sigma, const IntersectOptions& opt = {});

/// 2^{(1+τ)m-1}(1 + 2^{(1+τ)m}).
double c2_bound_constant(double tau, int m);

struct C2Check {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = false;
};

C2Check c2_integrand_bound(const GraphDescriptor& g, const Vec& x, const Vec& y, double tau);

struct SobolevRegion {
  enum class Shape { Box, Disk };
  Shape shape = Shape::Box;
  Vec lower;  // Box corner (or disk center)
  Vec upper;  // Box corner (unused for disks)
  double radius = 0.0;
};

struct SobolevValue {
  double integral = 0.0;  // ∫∫ |Du(x) - Du(y)|^ρ / |x-y|^{m+sρ}
  double seminorm = 0.0;  // integral^{1/ρ}
  std::size_t cells = 0;
};

/// Midpoint tensor-grid quadrature with `cells_per_axis` cells per axis;
/// diagonal cell pairs are excluded.
SobolevValue sobolev_seminorm(const GraphJacobian& du, int m, const SobolevRegion& region, double s, double rho,
                              int cells_per_axis, unsigned threads = 1);

struct SufficiencyLevel {
  double h = 0.0;
  double energy = 0.0;
  double seminorm_power = 0.0;
  double ratio = 0.0;
};

/// Local energy of the sampled graph over B_r(anchor) against [Du]^{(1+τ)m} on
/// the domain disk of radius r, for each grid step.
std::vector<SufficiencyLevel> sobolev_sufficiency_check(const GraphDescriptor& g, double tau, double r,
                                                        const std::vector<double>& steps, unsigned threads = 1);

}  // namespace menergy
