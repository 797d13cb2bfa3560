#pragma once
// Independent reference computations. They use dense textbook formulas
// (eigen-decompositions, determinants, explicit Householder matrices, brute
// force grids) and share no code paths with the library kernels.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Orthonormal basis of the column span via Householder QR.
inline Mat orthonormal(const Mat& a) {
  Eigen::HouseholderQR<Mat> qr(a);
  return qr.householderQ() * Mat::Identity(a.rows(), a.cols());
}

inline Mat projector(const Mat& frame) {
  const Mat q = orthonormal(frame);
  return q * q.transpose();
}

/// ‖Π_F − Π_G‖ as the largest |eigenvalue| of the symmetric difference.
inline double angle_metric(const Mat& f, const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(projector(f) - projector(g));
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Principal angles from the singular values of QᵀQ', ascending.
inline std::vector<double> principal_angles(const Mat& f, const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(orthonormal(f).transpose() * orthonormal(g));
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    out.push_back(std::acos(std::clamp(svd.singularValues()(i), -1.0, 1.0)));
  std::sort(out.begin(), out.end());
  return out;
}

/// Product of principal cosines as |det(QᵀQ')|.
inline double cos_product(const Mat& f, const Mat& g) {
  return std::abs((orthonormal(f).transpose() * orthonormal(g)).determinant());
}

/// Householder matrix of the hyperplane (x − y)⊥.
inline Mat householder(const Vec& x, const Vec& y) {
  const Vec u = (x - y).normalized();
  return Mat::Identity(x.size(), x.size()) - 2.0 * u * u.transpose();
}

inline double conformal_angle(const Vec& x, const Vec& y, const Mat& hx, const Mat& hy) {
  return angle_metric(householder(x, y) * hx, hy);
}

inline double ltau(const Vec& x, const Vec& y, const Mat& hx, const Mat& hy, double tau) {
  const int m = static_cast<int>(hx.cols());
  return std::pow(conformal_angle(x, y, hx, hy), (1.0 + tau) * m);
}

inline double ks(const Vec& x, const Vec& y, const Mat& hx, const Mat& hy) {
  const int m = static_cast<int>(hx.cols());
  return std::pow(1.0 - cos_product(householder(x, y) * hx, hy), m);
}

/// Plain ordered double sum over i ≠ j.
inline double energy(const Mat& pts, const std::vector<Mat>& frames, const std::vector<double>& w, double tau,
                     bool use_ks = false) {
  const int m = static_cast<int>(frames.front().cols());
  double e = 0.0;
  for (Eigen::Index i = 0; i < pts.cols(); ++i)
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      if (i == j) continue;
      const Vec x = pts.col(i), y = pts.col(j);
      const double num = use_ks ? ks(x, y, frames[i], frames[j]) : ltau(x, y, frames[i], frames[j], tau);
      e += w[i] * w[j] * num / std::pow((x - y).squaredNorm(), m);
    }
  return e;
}

/// sup over samples in the closed ball of dist(z, p + F) / r.
inline double beta(const Mat& pts, const Vec& p, const Mat& f, double r) {
  const Mat perp = Mat::Identity(p.size(), p.size()) - projector(f);
  double b = 0.0;
  for (Eigen::Index k = 0; k < pts.cols(); ++k) {
    const Vec z = pts.col(k) - p;
    if (z.norm() <= r) b = std::max(b, (perp * z).norm());
  }
  return b / r;
}

/// Brute-force inf of beta over lines (n = 2) or m-planes in R³ (n = 3, m ∈ {1,2})
/// through p: a 721-step grid per angle followed by nested local zooms.
inline double best_beta(const Mat& pts, const Vec& p, double r, int m) {
  const int n = static_cast<int>(p.size());
  auto plane = [&](double a, double b) -> Mat {
    Vec d(n);
    if (n == 2) d << std::cos(a), std::sin(a);
    else d << std::sin(a) * std::cos(b), std::sin(a) * std::sin(b), std::cos(a);
    if (m == 1) return d;
    // m = 2 in R³: the plane with normal d.
    Eigen::FullPivLU<Mat> lu(d.transpose());
    return lu.kernel();
  };
  auto value = [&](double a, double b) { return beta(pts, p, plane(a, b), r); };
  const int grid = n == 2 ? 721 : 181;
  double best = std::numeric_limits<double>::infinity(), ba = 0, bb = 0;
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < (n == 2 ? 1 : 2 * grid); ++j) {
      const double a = kPi * i / (grid - 1), b = kPi * j / (grid - 1);
      const double v = value(a, b);
      if (v < best) best = v, ba = a, bb = b;
    }
  // Zoom around the several best grid cells to avoid a single-basin lock.
  double wa = kPi / (grid - 1), wb = n == 2 ? 0.0 : kPi / (grid - 1);
  for (int level = 0; level < 40; ++level) {
    double na = ba, nb = bb;
    for (int i = -6; i <= 6; ++i)
      for (int j = (n == 2 ? 0 : -6); j <= (n == 2 ? 0 : 6); ++j) {
        const double a = ba + wa * i / 3.0, b = bb + wb * j / 3.0;
        const double v = value(a, b);
        if (v < best) best = v, na = a, nb = b;
      }
    ba = na, bb = nb;
    wa *= 0.6, wb *= 0.6;
  }
  return best;
}

}  // namespace oracle
