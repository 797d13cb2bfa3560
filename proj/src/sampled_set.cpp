#include "menergy/sampled_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "menergy/errors.hpp"
#include "menergy/reduce.hpp"

namespace menergy {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_distinct(const Mat& pts) {
  const Eigen::Index n = pts.cols();
  if (n < 2) return;
  const Vec lo = pts.rowwise().minCoeff();
  const Vec hi = pts.rowwise().maxCoeff();
  const double scale = (hi - lo).norm();
  if (scale == 0.0) throw PreconditionError("sampled set has coincident points");
  const double tol = 1e-12 * scale;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return pts(0, a) < pts(0, b); });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (pts(0, order[j]) - pts(0, order[i]) > tol) break;
      if ((pts.col(order[i]) - pts.col(order[j])).norm() <= tol)
        throw PreconditionError("sampled set has coincident points (indices " +
                                std::to_string(order[i]) + ", " + std::to_string(order[j]) + ")");
    }
  }
}

double gauss_legendre_8(const std::function<double(double)>& f, double a, double b) {
  static const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                              0.9602898564975363};
  static const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                              0.1012285362903763};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += w[i] * (f(c - h * x[i]) + f(c + h * x[i]));
  return s * h;
}

}  // namespace

SampledSet::SampledSet(int ambient_dim, int intrinsic_dim, Mat points, std::vector<Subspace> frames,
                       std::vector<double> weights, std::vector<std::string> labels)
    : ambient_dim_(ambient_dim),
      intrinsic_dim_(intrinsic_dim),
      points_(std::move(points)),
      frames_(std::move(frames)),
      weights_(std::move(weights)),
      labels_(std::move(labels)) {
  require(ambient_dim_ >= 1 && intrinsic_dim_ >= 1 && intrinsic_dim_ <= ambient_dim_,
          "sampled set needs 1 <= m <= n");
  require(points_.rows() == ambient_dim_, "point dimension differs from ambient_dim");
  const std::size_t n = size();
  require(frames_.empty() || frames_.size() == n, "frame count differs from point count");
  require(weights_.empty() || weights_.size() == n, "weight count differs from point count");
  require(labels_.empty() || labels_.size() == n, "label count differs from point count");
  for (const auto& f : frames_)
    if (f.ambient_dim() != ambient_dim_ || f.dim() != intrinsic_dim_)
      throw DimensionMismatch("frame dimensions differ from the set's (n, m)");
  for (double w : weights_)
    require(std::isfinite(w) && w > 0.0, "weights must be positive and finite");
  require(points_.allFinite(), "points must be finite");
  check_distinct(points_);
}

double SampledSet::total_weight() const {
  if (weights_.empty()) return static_cast<double>(size());
  KahanSum s;
  for (double w : weights_) s.add(w);
  return s.value();
}

std::vector<std::size_t> SampledSet::in_ball(const Vec& center, double r) const {
  require(center.size() == ambient_dim_, "ball center dimension mismatch");
  std::vector<std::size_t> out;
  const double r2 = r * r;
  for (std::size_t i = 0; i < size(); ++i)
    if ((points_.col(static_cast<Eigen::Index>(i)) - center).squaredNorm() < r2) out.push_back(i);
  return out;
}

double SampledSet::mass_in_ball(const Vec& center, double r) const {
  KahanSum s;
  for (std::size_t i : in_ball(center, r)) s.add(weight(i));
  return s.value();
}

SampledSet SampledSet::with_frames(std::vector<Subspace> frames) const {
  return SampledSet(ambient_dim_, intrinsic_dim_, points_, std::move(frames), weights_, labels_);
}

SampledSet SampledSet::subset(const std::vector<std::size_t>& indices) const {
  Mat pts(ambient_dim_, static_cast<Eigen::Index>(indices.size()));
  std::vector<Subspace> fr;
  std::vector<double> w;
  std::vector<std::string> lab;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const std::size_t i = indices[k];
    require(i < size(), "subset index out of range");
    pts.col(static_cast<Eigen::Index>(k)) = points_.col(static_cast<Eigen::Index>(i));
    if (!frames_.empty()) fr.push_back(frames_[i]);
    if (!weights_.empty()) w.push_back(weights_[i]);
    if (!labels_.empty()) lab.push_back(labels_[i]);
  }
  return SampledSet(ambient_dim_, intrinsic_dim_, std::move(pts), std::move(fr), std::move(w),
                    std::move(lab));
}

SampledSet SampledSet::concat(const SampledSet& a, const SampledSet& b) {
  require(a.ambient_dim() == b.ambient_dim() && a.intrinsic_dim() == b.intrinsic_dim(),
          "concat: dimension mismatch");
  require(a.has_frames() == b.has_frames() && a.has_weights() == b.has_weights(),
          "concat: sets carry different fields");
  Mat pts(a.ambient_dim(), static_cast<Eigen::Index>(a.size() + b.size()));
  pts << a.points(), b.points();
  std::vector<Subspace> fr = a.frames();
  fr.insert(fr.end(), b.frames().begin(), b.frames().end());
  std::vector<double> w = a.weights();
  w.insert(w.end(), b.weights().begin(), b.weights().end());
  std::vector<std::string> lab;
  if (!a.labels().empty() || !b.labels().empty()) {
    lab = a.labels();
    lab.resize(a.size());
    lab.insert(lab.end(), b.labels().begin(), b.labels().end());
    lab.resize(a.size() + b.size());
  }
  return SampledSet(a.ambient_dim(), a.intrinsic_dim(), std::move(pts), std::move(fr), std::move(w),
                    std::move(lab));
}

// ---------------------------------------------------------------------------
// Möbius maps

MobiusMap MobiusMap::similarity(Mat orthogonal, double scale, Vec translation) {
  require(scale > 0.0, "similarity scale must be positive");
  require(orthogonal.rows() == orthogonal.cols() && orthogonal.rows() == translation.size(),
          "similarity: dimension mismatch");
  const Mat gram = orthogonal.transpose() * orthogonal;
  require((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-12,
          "similarity: matrix is not orthogonal");
  MobiusMap t;
  t.kind_ = Kind::Similarity;
  t.q_ = std::move(orthogonal);
  t.scale_ = scale;
  t.translation_ = std::move(translation);
  return t;
}

MobiusMap MobiusMap::inversion(Vec center, double radius) {
  require(radius > 0.0, "inversion radius must be positive");
  MobiusMap t;
  t.kind_ = Kind::Inversion;
  t.center_ = std::move(center);
  t.radius_ = radius;
  return t;
}

Vec MobiusMap::apply(const Vec& x) const {
  if (kind_ == Kind::Similarity) {
    require(x.size() == translation_.size(), "mobius: dimension mismatch");
    return scale_ * (q_ * x) + translation_;
  }
  require(x.size() == center_.size(), "mobius: dimension mismatch");
  const Vec u = x - center_;
  const double u2 = u.squaredNorm();
  if (u2 == 0.0 || u2 < 1e-28 * std::max(1.0, center_.squaredNorm()))
    throw PreconditionError("point at the inversion center");
  return center_ + (radius_ * radius_ / u2) * u;
}

Mat MobiusMap::push_frame(const Vec& x, const Mat& frame) const {
  if (kind_ == Kind::Similarity) return q_ * frame;
  const Vec u = (x - center_).normalized();
  return frame - 2.0 * u * (u.transpose() * frame);
}

double MobiusMap::conformal_factor(const Vec& x) const {
  if (kind_ == Kind::Similarity) return scale_;
  return radius_ * radius_ / (x - center_).squaredNorm();
}

MobiusMap MobiusMap::inverse() const {
  if (kind_ == Kind::Inversion) return *this;
  MobiusMap t;
  t.kind_ = Kind::Similarity;
  t.q_ = q_.transpose();
  t.scale_ = 1.0 / scale_;
  t.translation_ = -(q_.transpose() * translation_) / scale_;
  return t;
}

SampledSet apply_mobius(const SampledSet& s, const MobiusMap& t) {
  const int m = s.intrinsic_dim();
  Mat pts(s.ambient_dim(), static_cast<Eigen::Index>(s.size()));
  std::vector<Subspace> fr;
  std::vector<double> w;
  fr.reserve(s.size());
  w.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec x = s.point(i);
    pts.col(static_cast<Eigen::Index>(i)) = t.apply(x);
    if (s.has_frames()) fr.push_back(Subspace::span(t.push_frame(x, s.frame(i).frame())));
    if (s.has_weights()) w.push_back(s.weight(i) * std::pow(t.conformal_factor(x), m));
  }
  return SampledSet(s.ambient_dim(), m, std::move(pts), std::move(fr), std::move(w), s.labels());
}

// ---------------------------------------------------------------------------
// Builder and generators

void SampleBuilder::add(const Vec& point, const Subspace& frame, double weight, std::string label) {
  points_.push_back(point);
  frames_.push_back(frame);
  weights_.push_back(weight);
  labels_.push_back(std::move(label));
}

void SampleBuilder::add_flat_patch(const Vec& center, const Subspace& plane,
                                   const std::vector<double>& ring_radii, const std::string& label) {
  require(plane.dim() == m_ && plane.ambient_dim() == n_ && center.size() == n_,
          "flat patch: dimension mismatch");
  require(m_ == 1 || m_ == 2, "flat patch: only m = 1, 2");
  require(ring_radii.size() >= 2 && ring_radii.front() == 0.0, "flat patch: radii must start at 0");
  for (std::size_t k = 1; k < ring_radii.size(); ++k)
    require(ring_radii[k] > ring_radii[k - 1], "flat patch: radii must increase");
  const Mat& f = plane.frame();
  if (m_ == 1) {
    add(center, plane, 2.0 * ring_radii[1], label);
    for (std::size_t k = 1; k + 1 < ring_radii.size(); ++k) {
      const double mid = 0.5 * (ring_radii[k] + ring_radii[k + 1]);
      const double w = ring_radii[k + 1] - ring_radii[k];
      add(center + mid * f.col(0), plane, w, label);
      add(center - mid * f.col(0), plane, w, label);
    }
    return;
  }
  add(center, plane, kPi * ring_radii[1] * ring_radii[1], label);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 1; k + 1 < ring_radii.size(); ++k) {
    const double r0 = ring_radii[k], r1 = ring_radii[k + 1];
    const double mid = 0.5 * (r0 + r1);
    const int cells = std::max(6, static_cast<int>(std::lround(2.0 * kPi * mid / (r1 - r0))));
    const double rad = std::sqrt(0.5 * (r0 * r0 + r1 * r1));
    const double w = kPi * (r1 * r1 - r0 * r0) / cells;
    const double phase = golden * static_cast<double>(k);
    for (int c = 0; c < cells; ++c) {
      const double phi = phase + 2.0 * kPi * c / cells;
      add(center + rad * (std::cos(phi) * f.col(0) + std::sin(phi) * f.col(1)), plane, w, label);
    }
  }
}

SampledSet SampleBuilder::build() const {
  Mat pts(n_, static_cast<Eigen::Index>(points_.size()));
  for (std::size_t i = 0; i < points_.size(); ++i) pts.col(static_cast<Eigen::Index>(i)) = points_[i];
  const bool any_label =
      std::any_of(labels_.begin(), labels_.end(), [](const std::string& s) { return !s.empty(); });
  return SampledSet(n_, m_, std::move(pts), frames_, weights_,
                    any_label ? labels_ : std::vector<std::string>{});
}

std::vector<double> graded_rings(double inner, int uniform_rings, double outer, double ratio) {
  require(inner > 0.0 && outer >= inner && uniform_rings >= 1 && ratio > 1.0,
          "graded_rings: invalid parameters");
  std::vector<double> r{0.0};
  for (int k = 1; k <= uniform_rings; ++k) r.push_back(inner * k / uniform_rings);
  const double step0 = inner / uniform_rings;
  double step = step0;
  while (r.back() < outer * (1.0 - 1e-12)) {
    step = std::max(step0, r.back() * (ratio - 1.0));
    const double next = r.back() + step;
    // Avoid a sliver ring at the end.
    if (next > outer || outer - next < 0.5 * step) {
      r.push_back(outer);
      break;
    }
    r.push_back(next);
  }
  return r;
}

SampledSet gen_circle(double radius, int n_samples) {
  require(radius > 0.0 && n_samples >= 4, "gen_circle: need radius > 0 and N >= 4");
  SampleBuilder b(2, 1);
  const double w = 2.0 * kPi * radius / n_samples;
  for (int k = 0; k < n_samples; ++k) {
    const double t = 2.0 * kPi * k / n_samples;
    Vec p(2), tan(2);
    p << radius * std::cos(t), radius * std::sin(t);
    tan << -std::sin(t), std::cos(t);
    b.add(p, Subspace::span(tan), w);
  }
  return b.build();
}

SampledSet gen_sphere(double radius, int m, int n_samples) {
  require(m == 1 || m == 2, "gen_sphere: only m = 1, 2");
  if (m == 1) return gen_circle(radius, n_samples);
  require(radius > 0.0 && n_samples >= 8, "gen_sphere: need radius > 0 and N >= 8");
  SampleBuilder b(3, 2);
  const double w = 4.0 * kPi * radius * radius / n_samples;
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n_samples; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n_samples;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * k;
    const double c = std::cos(phi), sn = std::sin(phi);
    Vec p(3);
    p << radius * s * c, radius * s * sn, radius * z;
    Mat f(3, 2);
    f << -sn, z * c, c, z * sn, 0.0, -s;
    b.add(p, Subspace::span(f), w);
  }
  return b.build();
}

SampledSet gen_ellipse(double a, double b, int n_samples) {
  require(a > 0.0 && b > 0.0 && n_samples >= 8, "gen_ellipse: need a, b > 0 and N >= 8");
  SampleBuilder bld(2, 1);
  const auto speed = [&](double t) { return std::hypot(a * std::sin(t), b * std::cos(t)); };
  const double dt = 2.0 * kPi / n_samples;
  for (int k = 0; k < n_samples; ++k) {
    const double t = dt * k;
    Vec p(2), tan(2);
    p << a * std::cos(t), b * std::sin(t);
    tan << -a * std::sin(t), b * std::cos(t);
    const double w = gauss_legendre_8(speed, t - 0.5 * dt, t) + gauss_legendre_8(speed, t, t + 0.5 * dt);
    bld.add(p, Subspace::span(tan), w);
  }
  return bld.build();
}

SampledSet gen_torus(double major, double minor, int n_u, int n_v) {
  require(major > minor && minor > 0.0 && n_u >= 3 && n_v >= 3, "gen_torus: need R > r > 0");
  SampleBuilder b(3, 2);
  const double du = 2.0 * kPi / n_u, dv = 2.0 * kPi / n_v;
  for (int i = 0; i < n_u; ++i) {
    const double u = (i + 0.5) * du;
    for (int j = 0; j < n_v; ++j) {
      const double v0 = j * dv, v1 = (j + 1) * dv, v = 0.5 * (v0 + v1);
      const double rho = major + minor * std::cos(v);
      Vec p(3);
      p << rho * std::cos(u), rho * std::sin(u), minor * std::sin(v);
      Mat f(3, 2);
      f << -std::sin(u), -std::sin(v) * std::cos(u), std::cos(u), -std::sin(v) * std::sin(u), 0.0,
          std::cos(v);
      const double w = minor * du * (major * dv + minor * (std::sin(v1) - std::sin(v0)));
      b.add(p, Subspace::span(f), w);
    }
  }
  return b.build();
}

SampledSet gen_graph(const Subspace& f, const GraphMap& u, const GraphJacobian& du,
                     const GraphRegion& region, double h, const Vec& anchor) {
  const int n = f.ambient_dim(), m = f.dim();
  require(h > 0.0 && region.extent > 0.0, "gen_graph: need h > 0 and a nonempty region");
  require(m <= 3, "gen_graph: grids are limited to m <= 3");
  const Vec base = anchor.size() == 0 ? Vec::Zero(n) : anchor;
  require(base.size() == n, "gen_graph: anchor dimension mismatch");
  const int per_axis = std::max(1, static_cast<int>(std::lround(2.0 * region.extent / h)));
  const double step = 2.0 * region.extent / per_axis;
  const Mat& fr = f.frame();
  SampleBuilder b(n, m);
  std::vector<int> idx(static_cast<std::size_t>(m), 0);
  long total = 1;
  for (int k = 0; k < m; ++k) total *= per_axis;
  for (long c = 0; c < total; ++c) {
    long rem = c;
    Vec xi(m);
    for (int k = 0; k < m; ++k) {
      xi(k) = -region.extent + (static_cast<double>(rem % per_axis) + 0.5) * step;
      rem /= per_axis;
    }
    if (region.shape == GraphRegion::Shape::Disk && xi.norm() >= region.extent) continue;
    const Mat d = du(xi);
    require(d.rows() == n && d.cols() == m, "gen_graph: Du has wrong shape");
    const Mat tangent = fr + d;  // columns e_i + Du(x)e_i
    const Mat g = Mat::Identity(m, m) + d.transpose() * d;
    const double jac = std::sqrt(g.determinant());
    b.add(base + fr * xi + u(xi), Subspace::span(tangent), jac * std::pow(step, m));
  }
  return b.build();
}

double wedge_kappa(double beta) {
  require(beta > 0.0, "wedge: beta must be positive");
  return beta / (4.0 * std::sqrt(1.0 + beta * beta));
}

Vec wedge_point_p(double beta, int level) {
  Vec p(3);
  p << 1.0, beta, 0.0;
  return p / std::ldexp(1.0, level);
}

Vec wedge_point_q(double beta, int level) {
  Vec q(3);
  q << -1.0, beta, 1.0;
  return q / std::ldexp(1.0, level);
}

namespace {

Subspace wedge_sheet(double beta, bool plus) {
  Mat f(3, 2);
  f << (plus ? 1.0 : -1.0), 0.0, beta, 0.0, 0.0, 1.0;
  f.col(0) /= std::sqrt(1.0 + beta * beta);
  return Subspace::from_frame(f);
}

}  // namespace

SampledSet gen_wedge(double beta, int levels, int rings) {
  require(beta > 0.0 && levels >= 1 && levels <= 30 && rings >= 2, "gen_wedge: invalid parameters");
  const Subspace plus = wedge_sheet(beta, true), minus = wedge_sheet(beta, false);
  const double kappa = wedge_kappa(beta);
  SampleBuilder b(3, 2);
  for (int i = 1; i <= levels; ++i) {
    const double e = kappa / std::ldexp(1.0, i);
    std::vector<double> radii;
    for (int k = 0; k <= 2 * rings; ++k) radii.push_back(e * k / rings);
    const std::string tag = "L" + std::to_string(i);
    b.add_flat_patch(wedge_point_p(beta, i), plus, radii, tag + "+");
    b.add_flat_patch(wedge_point_q(beta, i), minus, radii, tag + "-");
  }
  return b.build();
}

SampledSet gen_wedge_grid(double beta, double half_width, double h, double band) {
  require(beta > 0.0 && half_width > 0.0 && h > 0.0 && band >= 0.0, "gen_wedge_grid: invalid parameters");
  const Subspace plus = wedge_sheet(beta, true), minus = wedge_sheet(beta, false);
  const int per_axis = std::max(2, static_cast<int>(std::lround(2.0 * half_width / h)));
  const double step = 2.0 * half_width / per_axis;
  const double w = std::sqrt(1.0 + beta * beta) * step * step;
  SampleBuilder b(3, 2);
  for (int i = 0; i < per_axis; ++i) {
    const double x = -half_width + (i + 0.5) * step;
    if (std::abs(x) < band) continue;
    for (int j = 0; j < per_axis; ++j) {
      const double y = -half_width + (j + 0.5) * step;
      Vec p(3);
      p << x, beta * std::abs(x), y;
      b.add(p, x > 0 ? plus : minus, w, x > 0 ? "+" : "-");
    }
  }
  return b.build();
}

// ---------------------------------------------------------------------------
// Strand witnesses

namespace {

StrandWitness make_sheets(StrandParams prm, bool parallel) {
  require(prm.delta > 0.0 && prm.delta < 1.0, "strands: delta must lie in (0,1)");
  require(prm.eps > 0.0 && prm.eps <= prm.delta / 500.0 * (1.0 + 1e-12),
          "strands: eps must lie in (0, delta/500]");
  require(prm.R > 0.0 && prm.M > 0.0, "strands: R and M must be positive");
  require(prm.m == 1 || prm.m == 2, "strands: only m = 1, 2");
  if (!parallel) require(prm.m >= 2, "transversal strands need m >= 2");
  if (prm.alpha <= 0.0) prm.alpha = prm.delta / 200.0;
  require(prm.alpha * (prm.M + 1.0) < prm.delta / 50.0 + 1e-15,
          "strands: alpha (M+1) must stay below delta/50");

  const int m = prm.m, n = m + 1;
  const double omega = 153.0 * prm.delta / (50.0 * 50.0 * 50.0);
  const double threshold = omega + 2.0 * prm.M * prm.alpha;
  const double chi = prm.plane_angle;
  require(chi >= 0.0 && chi <= 1.0, "strands: plane angle must lie in [0,1]");
  if (parallel)
    require(chi < threshold, "parallel strands: plane angle must stay below omega + 2 M alpha");
  else
    require(chi >= threshold, "transversal strands: plane angle must reach omega + 2 M alpha");

  const double er = prm.eps * prm.R;
  const double offset = 0.5 * er * (1.0 + prm.delta);
  const double inner = prm.eps * er;
  const double outer = parallel ? 2.0 * er : prm.R;
  const Vec p = Vec::Zero(n);
  Vec q = Vec::Zero(n);
  q(n - 1) = offset;

  Mat f1 = Mat::Zero(n, m);
  for (int k = 0; k < m; ++k) f1(k, k) = 1.0;
  const Subspace hp = Subspace::from_frame(f1);
  const double theta = std::asin(chi);
  Mat f2 = f1;
  f2.col(m - 1).setZero();
  f2(m - 1, m - 1) = std::cos(theta);
  f2(n - 1, m - 1) = std::sin(theta);
  const Subspace hq = Subspace::span(f2);

  const double reach = 1.2 * outer;
  SampleBuilder b(n, m);
  b.add_flat_patch(p, hp, graded_rings(offset, 8, reach, 1.12), "sheet1");
  const double reach2 = parallel ? reach : 4.0 * er;
  b.add_flat_patch(q, hq, graded_rings(inner, 8, reach2, 1.12), "sheet2");
  SampledSet set = b.build();

  std::vector<std::pair<Vec, double>> balls;
  for (double r : {0.5 * offset, offset, er, 2.0 * er}) balls.emplace_back(p, r);
  for (double r : {0.5 * inner, inner, er}) balls.emplace_back(q, r);
  const double c_k = measured_mass_constant(set, balls);
  return StrandWitness{std::move(set), p, q, hp, hq, prm, omega, threshold, offset, inner, outer, c_k};
}

}  // namespace

StrandWitness gen_parallel_sheets(StrandParams params) { return make_sheets(params, true); }

StrandWitness gen_transversal_sheets(StrandParams params) {
  if (params.plane_angle == 0.0) params.plane_angle = 0.5;
  return make_sheets(params, false);
}

double measured_mass_constant(const SampledSet& s, const std::vector<std::pair<Vec, double>>& balls) {
  require(!balls.empty(), "mass constant: no balls given");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [c, r] : balls)
    best = std::min(best, s.mass_in_ball(c, r) / std::pow(r, s.intrinsic_dim()));
  return best;
}

}  // namespace menergy
