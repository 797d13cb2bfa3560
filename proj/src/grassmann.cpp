#include "menergy/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "menergy/errors.hpp"

namespace menergy {

namespace {

// Modified Gram-Schmidt, applied twice. Returns false on rank deficiency.
bool orthonormalize(Mat& q) {
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const double before = q.col(j).norm();
      for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
      const double after = q.col(j).norm();
      if (!(after > 1e-10 * before) || after == 0.0) return false;
      q.col(j) /= after;
    }
  }
  return true;
}

void require_valid_shape(const Mat& frame) {
  require(frame.cols() >= 1, "subspace needs at least one frame vector");
  require(frame.rows() >= frame.cols(), "subspace dimension exceeds ambient dimension");
  require(frame.allFinite(), "subspace frame has non-finite entries");
}

void require_same_shape(const Subspace& f, const Subspace& g) {
  if (f.ambient_dim() != g.ambient_dim() || f.dim() != g.dim())
    throw DimensionMismatch("subspaces differ in ambient or intrinsic dimension");
}

}  // namespace

Subspace Subspace::from_frame(const Mat& frame, double defect_tol) {
  require_valid_shape(frame);
  const Mat gram = frame.transpose() * frame;
  const double defect = (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  if (!(defect <= defect_tol))
    throw PreconditionError("frame is not orthonormal (Gram defect " + std::to_string(defect) + ")");
  Mat q = frame;
  if (!orthonormalize(q)) throw PreconditionError("frame is rank deficient");
  return Subspace(std::move(q));
}

Subspace Subspace::span(const Mat& vectors) {
  require_valid_shape(vectors);
  Mat q = vectors;
  if (!orthonormalize(q)) throw PreconditionError("spanning set is rank deficient");
  return Subspace(std::move(q));
}

Subspace Subspace::coordinate(int n, std::initializer_list<int> axes) {
  Mat f = Mat::Zero(n, static_cast<Eigen::Index>(axes.size()));
  Eigen::Index j = 0;
  for (int a : axes) {
    require(a >= 0 && a < n, "coordinate axis out of range");
    f(a, j++) = 1.0;
  }
  return from_frame(f);
}

Subspace Subspace::full(int n) { return Subspace(Mat::Identity(n, n)); }

Mat Subspace::complement_frame() const {
  const int n = ambient_dim();
  const int m = dim();
  if (m == n) return Mat(n, 0);
  Eigen::HouseholderQR<Mat> qr(frame_);
  const Mat q = qr.householderQ() * Mat::Identity(n, n);
  return q.rightCols(n - m);
}

Mat projector(const Subspace& s) { return s.projector(); }

Vec affine_project(const Vec& x, const Subspace& s, const Vec& z) {
  if (x.size() != s.ambient_dim() || z.size() != s.ambient_dim())
    throw DimensionMismatch("affine_project: point dimension does not match subspace");
  return x + s.project(z - x);
}

double operator_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double angle_metric(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  if (f.dim() == f.ambient_dim()) return 0.0;
  return operator_norm(f.projector() - g.projector());
}

std::array<double, 6> projector_norm_identities(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  const int n = f.ambient_dim();
  const Mat id = Mat::Identity(n, n);
  const Mat pf = f.projector();
  const Mat pg = g.projector();
  const Mat pf_perp = id - pf;
  const Mat pg_perp = id - pg;
  return {operator_norm(pf - pg),      operator_norm(pf_perp - pg_perp),
          operator_norm(pf_perp * pg), operator_norm(pf * pg_perp),
          operator_norm(pg_perp * pf), operator_norm(pg * pf_perp)};
}

PrincipalDecomposition principal_angles(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  const int m = f.dim();
  const Mat c = f.frame().transpose() * g.frame();
  Eigen::JacobiSVD<Mat> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat x = f.frame() * svd.matrixU();
  Mat y = g.frame() * svd.matrixV();
  const Eigen::VectorXd sigma = svd.singularValues();

  // Large angles from the cosines, small ones from the sines of the residual
  // y_i - cos_i x_i, which does not lose precision near zero.
  std::vector<double> angles(m);
  for (int i = 0; i < m; ++i) {
    const double cos_i = std::clamp(sigma(i), 0.0, 1.0);
    if (cos_i * cos_i < 0.5) {
      angles[i] = std::acos(cos_i);
    } else {
      const double sin_i = std::clamp((y.col(i) - sigma(i) * x.col(i)).norm(), 0.0, 1.0);
      angles[i] = std::asin(sin_i);
    }
  }

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return angles[a] < angles[b]; });

  PrincipalDecomposition out;
  out.angles.resize(m);
  out.left.resize(f.ambient_dim(), m);
  out.right.resize(f.ambient_dim(), m);
  for (int k = 0; k < m; ++k) {
    out.angles[k] = angles[order[k]];
    out.left.col(k) = x.col(order[k]);
    out.right.col(k) = y.col(order[k]);
    if (out.left.col(k).dot(out.right.col(k)) < 0.0) out.right.col(k) *= -1.0;
  }
  return out;
}

double combined_angle(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  const double omc = sine_spectrum(f, g).one_minus_cos_product();
  return 2.0 * std::asin(std::sqrt(std::clamp(omc, 0.0, 2.0) / 2.0));
}

bool cone_contains(const Vec& p, double beta, const Subspace& f, const Vec& z) {
  if (p.size() != f.ambient_dim() || z.size() != f.ambient_dim())
    throw DimensionMismatch("cone_contains: point dimension does not match subspace");
  require(beta >= 0.0, "cone opening must be nonnegative");
  const Vec d = z - p;
  const Vec along = f.project(d);
  return (d - along).norm() <= beta * along.norm();
}

double cone_lemma_bound(double chi, double sigma) {
  require(chi >= 0.0 && sigma >= 0.0, "cone_lemma_bound: chi and sigma must be nonnegative");
  const double t = (1.0 + sigma) * chi;
  if (!(t < 1.0)) throw PreconditionError("cone_lemma_bound: (1+sigma)chi must be < 1");
  return (sigma + t) / (1.0 - t);
}

double two_plane_angle_bound(double d1, double d2, double r1, double r2, double c_tilde) {
  require(r1 > 0.0 && r1 <= r2, "two_plane_angle_bound: need 0 < r1 <= r2");
  require(d1 >= 0.0 && d1 < 0.5 && d2 >= 0.0 && d2 < 0.5,
          "two_plane_angle_bound: defects must lie in [0, 1/2)");
  require(c_tilde > std::sqrt(2.0), "two_plane_angle_bound: constant must exceed sqrt(2)");
  return 2.0 * c_tilde * (d1 + 2.0 * d2 * r2 / r1) / (1.0 - 2.0 * d1);
}

double combined_angle_constant(double tau, int m) {
  require(tau > 1.0 && m >= 1, "combined_angle_constant: need tau > 1, m >= 1");
  const double base = (1.0 - 1.0 / tau) * std::pow(1.0 - 1.0 / (tau * tau), -(1.0 + tau) / 2.0);
  return std::min(1.0, std::pow(base, m));
}

double SineSpectrum::angle_metric() const { return std::sqrt(max_sin2()); }

double SineSpectrum::one_minus_cos_product() const {
  double log_prod = 0.0;
  for (int i = 0; i < m; ++i) {
    const double s2 = sin2[i];
    if (s2 >= 1.0) return 1.0;
    const double one_minus_cos = s2 / (1.0 + std::sqrt(1.0 - s2));
    log_prod += std::log1p(-one_minus_cos);
  }
  return -std::expm1(log_prod);
}

SineSpectrum sine_spectrum(const double* a, const double* b, int n, int m) {
  SineSpectrum out;
  out.m = m;
  if (m == 0) return out;
  // Columns of (I - BBᵀ)A.
  std::array<double, kMaxAmbientDim * kMaxIntrinsicDim> res;
  for (int j = 0; j < m; ++j) {
    const double* aj = a + j * n;
    double* rj = res.data() + j * n;
    for (int i = 0; i < n; ++i) rj[i] = aj[i];
    for (int k = 0; k < m; ++k) {
      const double* bk = b + k * n;
      double dot = 0.0;
      for (int i = 0; i < n; ++i) dot += bk[i] * aj[i];
      for (int i = 0; i < n; ++i) rj[i] -= dot * bk[i];
    }
  }
  auto gram = [&](int p, int q) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += res[p * n + i] * res[q * n + i];
    return s;
  };
  if (m == 1) {
    out.sin2[0] = gram(0, 0);
  } else if (m == 2) {
    const double p = gram(0, 0), q = gram(0, 1), r = gram(1, 1);
    const double disc = std::hypot(p - r, 2.0 * q);
    const double hi = 0.5 * (p + r + disc);
    const double lo = hi > 0.0 ? std::max(0.0, (p * r - q * q) / hi) : 0.0;
    out.sin2[0] = lo;
    out.sin2[1] = hi;
  } else {
    using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxIntrinsicDim,
                                kMaxIntrinsicDim>;
    Small s(m, m);
    for (int p = 0; p < m; ++p)
      for (int q = p; q < m; ++q) s(p, q) = s(q, p) = gram(p, q);
    Eigen::SelfAdjointEigenSolver<Small> eig(s, Eigen::EigenvaluesOnly);
    for (int i = 0; i < m; ++i) out.sin2[i] = eig.eigenvalues()(i);
  }
  for (int i = 0; i < m; ++i) out.sin2[i] = std::clamp(out.sin2[i], 0.0, 1.0);
  return out;
}

SineSpectrum sine_spectrum(const Subspace& f, const Subspace& g) {
  require_same_shape(f, g);
  require(f.ambient_dim() <= kMaxAmbientDim && f.dim() <= kMaxIntrinsicDim,
          "sine_spectrum: dimension exceeds kernel limits");
  return sine_spectrum(f.frame().data(), g.frame().data(), f.ambient_dim(), f.dim());
}

Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = normal(rng);
  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  const Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  return q;
}

Subspace random_subspace(int n, int m, std::mt19937_64& rng) {
  require(m >= 1 && m <= n, "random_subspace: need 1 <= m <= n");
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat a(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) a(i, j) = normal(rng);
  return Subspace::span(a);
}

Subspace subspace_at_angles(const Subspace& f, const std::vector<double>& angles,
                            std::mt19937_64& rng) {
  const int n = f.ambient_dim();
  const int m = f.dim();
  require(static_cast<int>(angles.size()) == m, "subspace_at_angles: need one angle per frame vector");
  int tilted = 0;
  for (double a : angles) {
    require(a >= 0.0 && a <= M_PI / 2 + 1e-15, "subspace_at_angles: angles must lie in [0, pi/2]");
    if (std::sin(a) != 0.0) ++tilted;
  }
  require(tilted <= n - m, "subspace_at_angles: too many nonzero angles for the codimension");
  Mat w(n, 0);
  if (tilted > 0) {
    const Mat comp = f.complement_frame();
    const Mat rot = random_orthogonal(n - m, rng);
    w = comp * rot.leftCols(tilted);
  }
  Mat g(n, m);
  int used = 0;
  for (int i = 0; i < m; ++i) {
    g.col(i) = std::cos(angles[i]) * f.frame().col(i);
    if (std::sin(angles[i]) != 0.0) g.col(i) += std::sin(angles[i]) * w.col(used++);
  }
  return Subspace::span(g);
}

}  // namespace menergy
