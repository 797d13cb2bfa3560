#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "menergy/types.hpp"

namespace menergy {

/// Upper bound on the intrinsic dimension handled by the pair kernels.
inline constexpr int kMaxIntrinsicDim = 8;

/// An m-dimensional linear subspace of R^n, stored as an orthonormal frame
/// (one column per frame vector).
class Subspace {
 public:
  /// Accepts a frame that is already orthonormal up to `defect_tol`
  /// (entrywise deviation of the Gram matrix from the identity) and
  /// re-orthonormalizes it with modified Gram-Schmidt.
  static Subspace from_frame(const Mat& frame, double defect_tol = 1e-6);

  /// Orthonormalizes an arbitrary linearly independent set of columns.
  static Subspace span(const Mat& vectors);

  /// Span of the listed standard basis vectors of R^n.
  static Subspace coordinate(int n, std::initializer_list<int> axes);

  static Subspace full(int n);

  int ambient_dim() const { return static_cast<int>(frame_.rows()); }
  int dim() const { return static_cast<int>(frame_.cols()); }
  const Mat& frame() const { return frame_; }

  Mat projector() const { return frame_ * frame_.transpose(); }
  Vec project(const Vec& v) const { return frame_ * (frame_.transpose() * v); }
  Vec project_perp(const Vec& v) const { return v - project(v); }
  /// Coordinates of Π(v) in the frame.
  Vec coords(const Vec& v) const { return frame_.transpose() * v; }

  /// Orthonormal basis of the orthogonal complement, n x (n-m).
  Mat complement_frame() const;

 private:
  explicit Subspace(Mat frame) : frame_(std::move(frame)) {}
  Mat frame_;
};

struct PrincipalDecomposition {
  std::vector<double> angles;  // nondecreasing, in [0, pi/2]
  Mat left;                    // principal vectors of the first plane, as columns
  Mat right;                   // principal vectors of the second plane
};

Mat projector(const Subspace& s);

/// x + Π_S(z - x).
Vec affine_project(const Vec& x, const Subspace& s, const Vec& z);

double operator_norm(const Mat& a);

/// Operator norm of the difference of the two orthogonal projectors.
double angle_metric(const Subspace& f, const Subspace& g);

/// The six projector expressions that all equal the angle metric:
/// |Π_F-Π_G|, |Π_F⊥-Π_G⊥|, |Π_F⊥Π_G|, |Π_FΠ_G⊥|, |Π_G⊥Π_F|, |Π_GΠ_F⊥|.
std::array<double, 6> projector_norm_identities(const Subspace& f, const Subspace& g);

PrincipalDecomposition principal_angles(const Subspace& f, const Subspace& g);

/// arccos of the product of the principal-angle cosines.
double combined_angle(const Subspace& f, const Subspace& g);

/// Whether z lies in the cone |Π_F⊥(z-p)| <= beta |Π_F(z-p)|.
bool cone_contains(const Vec& p, double beta, const Subspace& f, const Vec& z);

/// Smallest opening kappa for which C_p(sigma, F) ⊂ C_p(kappa, G) is
/// guaranteed whenever the planes are at most chi apart.
double cone_lemma_bound(double chi, double sigma);

/// Tunable constant; only known to exceed sqrt(2).
inline constexpr double kDefaultTwoPlaneConstant = 1.4142135623730951 * 1.01;

/// Upper bound on the angle between two planes approximating the same set at
/// scales r1 <= r2 with flatness defects d1, d2.
double two_plane_angle_bound(double d1, double d2, double r1, double r2,
                             double c_tilde = kDefaultTwoPlaneConstant);

/// c(tau, m) = min{1, [(1-1/tau)(1-1/tau^2)^{-(1+tau)/2}]^m} for tau > 1.
double combined_angle_constant(double tau, int m);

/// Squared sines of the principal angles between span(a) and span(b),
/// ascending. `a`, `b` are column-major n x m orthonormal frames. Computed
/// from (I - BBᵀ)A so that small angles keep full relative precision.
struct SineSpectrum {
  std::array<double, kMaxIntrinsicDim> sin2{};
  int m = 0;

  double max_sin2() const { return m == 0 ? 0.0 : sin2[m - 1]; }
  /// |Π_A - Π_B|.
  double angle_metric() const;
  /// 1 - Π cos(ϑ_i), evaluated without cancellation.
  double one_minus_cos_product() const;
};

SineSpectrum sine_spectrum(const double* a, const double* b, int n, int m);
SineSpectrum sine_spectrum(const Subspace& f, const Subspace& g);

/// Haar-random m-plane in R^n.
Subspace random_subspace(int n, int m, std::mt19937_64& rng);

/// A plane with the prescribed principal angles to `f`: frame vector i of the
/// result is cos(a_i) f_i + sin(a_i) w_i for random orthonormal w_i ⊥ f.
/// Requires at most n - m nonzero angles.
Subspace subspace_at_angles(const Subspace& f, const std::vector<double>& angles,
                            std::mt19937_64& rng);

/// Random orthogonal n x n matrix.
Mat random_orthogonal(int n, std::mt19937_64& rng);

}  // namespace menergy
