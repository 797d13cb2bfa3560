#include "menergy/flatness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace menergy {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Offsets of the samples in B_r(p), as columns.
Mat ball_offsets(const SampledSet& s, const Vec& p, double r, std::vector<std::size_t>* idx_out = nullptr) {
  const auto idx = s.in_ball(p, r);
  Mat z(s.ambient_dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) z.col(static_cast<Eigen::Index>(k)) = s.point(idx[k]) - p;
  if (idx_out) *idx_out = idx;
  return z;
}

/// Distance of offset z to the disk F ∩ B_r(0).
double clipped_distance(const Mat& frame, const Vec& z, double r) {
  const Vec a = frame.transpose() * z;
  const double perp2 = std::max(0.0, z.squaredNorm() - a.squaredNorm());
  const double an = a.norm();
  if (an <= r) return std::sqrt(perp2);
  return std::sqrt((an - r) * (an - r) + perp2);
}

double beta_of_frame(const Mat& frame, const Mat& z, double r) {
  double best = 0.0;
  for (Eigen::Index k = 0; k < z.cols(); ++k) best = std::max(best, clipped_distance(frame, z.col(k), r));
  return best / r;
}

/// Lattice points step·Z^m inside the closed (or open) ball of radius r.
std::vector<Vec> disk_grid(int m, double r, double step, bool closed) {
  const int k = static_cast<int>(std::floor(r / step + 1e-12));
  std::vector<Vec> out;
  std::vector<int> c(static_cast<std::size_t>(m), -k);
  while (true) {
    Vec v(m);
    for (int i = 0; i < m; ++i) v(i) = c[static_cast<std::size_t>(i)] * step;
    const double nv = v.norm();
    if (closed ? nv <= r * (1.0 + 1e-12) : nv < r) out.push_back(v);
    int i = 0;
    while (i < m && ++c[static_cast<std::size_t>(i)] > k) c[static_cast<std::size_t>(i++)] = -k;
    if (i == m) break;
  }
  return out;
}

Mat orthonormal(const Mat& a) { return Subspace::span(a).frame(); }

Mat complement(const Mat& frame) { return Subspace::from_frame(frame).complement_frame(); }

/// Pattern search on the chart A -> span(E + Q A), re-centred after each move.
Mat refine_plane(Mat e, const Mat& z, double r, double& value) {
  const Eigen::Index n = e.rows(), m = e.cols();
  if (m == n) {
    value = 0.0;
    return e;
  }
  const Eigen::Index k = (n - m) * m;
  std::vector<Vec> dirs;
  for (Eigen::Index a = 0; a < k; ++a) {
    Vec d = Vec::Zero(k);
    d(a) = 1.0;
    dirs.push_back(d);
    dirs.push_back(-d);
  }
  if (k == 2) {
    for (int t = 0; t < 32; ++t) {
      if (t % 8 == 0) continue;  // axis directions already present
      Vec d(2);
      d << std::cos(2 * kPi * t / 32), std::sin(2 * kPi * t / 32);
      dirs.push_back(d);
    }
  } else if (k <= 6) {
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = a + 1; b < k; ++b)
        for (double sa : {1.0, -1.0})
          for (double sb : {1.0, -1.0}) {
            Vec d = Vec::Zero(k);
            d(a) = sa / std::sqrt(2.0);
            d(b) = sb / std::sqrt(2.0);
            dirs.push_back(d);
          }
  }
  value = beta_of_frame(e, z, r);
  Mat q = complement(e);
  double step = 0.05;
  while (step >= 1e-5) {
    bool moved = false;
    for (const Vec& d : dirs) {
      Mat a(n - m, m);
      for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index i = 0; i < n - m; ++i) a(i, j) = step * d(j * (n - m) + i);
      const Mat cand = orthonormal(e + q * a);
      const double v = beta_of_frame(cand, z, r);
      if (v < value - 1e-15) {
        value = v;
        e = cand;
        q = complement(e);
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return e;
}

/// Coarse candidate planes on a direction grid for n <= 3.
std::vector<Mat> grid_seeds(int n, int m, const Mat& z, double r, std::size_t keep) {
  std::vector<std::pair<double, Mat>> cands;
  auto consider = [&](const Vec& dir) {
    Mat frame;
    if (m == 1) {
      frame = dir;
    } else {
      frame = complement(dir);
    }
    cands.emplace_back(beta_of_frame(frame, z, r), frame);
  };
  if (n == 2) {
    for (int t = 0; t < 360; ++t) {
      Vec d(2);
      d << std::cos(kPi * t / 360), std::sin(kPi * t / 360);
      consider(d);
    }
  } else if (n == 3) {
    for (int a = 0; a <= 45; ++a) {
      const double th = 0.5 * kPi * a / 45;
      const int nphi = a == 0 ? 1 : 180;
      for (int b = 0; b < nphi; ++b) {
        const double ph = 2 * kPi * b / nphi;
        Vec d(3);
        d << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
        consider(d);
      }
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Mat> out;
  for (std::size_t i = 0; i < std::min(keep, cands.size()); ++i) out.push_back(cands[i].second);
  return out;
}

}  // namespace

double beta_wrt_plane(const SampledSet& s, const Vec& p, const Subspace& f, double r) {
  require(r > 0.0, "beta: radius must be positive");
  require(f.ambient_dim() == s.ambient_dim() && p.size() == s.ambient_dim(), "beta: dimension mismatch");
  const Mat z = ball_offsets(s, p, r);
  require(z.cols() > 0, "beta: no samples in the ball");
  return beta_of_frame(f.frame(), z, r);
}

double coverage_defect(const SampledSet& s, const Vec& p, const Subspace& f, double r, double grid_step) {
  require(r > 0.0 && grid_step > 0.0, "coverage: radius and grid step must be positive");
  require(grid_step <= r / 16.0 * (1.0 + 1e-12), "coverage: grid step must not exceed r/16");
  require(f.ambient_dim() == s.ambient_dim() && p.size() == s.ambient_dim(), "coverage: dimension mismatch");
  const Mat z = ball_offsets(s, p, r);
  if (z.cols() == 0) return 1.0;
  double worst = 0.0;
  for (const Vec& c : disk_grid(f.dim(), r, grid_step, true)) {
    const Vec xi = f.frame() * c;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < z.cols(); ++k) best = std::min(best, (z.col(k) - xi).squaredNorm());
    worst = std::max(worst, std::sqrt(best));
  }
  return worst / r;
}

double theta(const SampledSet& s, const Vec& p, const Subspace& f, double r, double grid_step) {
  const double cov = coverage_defect(s, p, f, r, grid_step);
  const Mat z = ball_offsets(s, p, r);
  const double beta = z.cols() == 0 ? 0.0 : beta_of_frame(f.frame(), z, r);
  return std::max(beta, cov);
}

BestPlane best_plane(const SampledSet& s, const Vec& p, double r, int m) {
  const int n = s.ambient_dim();
  require(r > 0.0 && m >= 1 && m <= n, "best_plane: invalid radius or dimension");
  require(p.size() == n, "best_plane: dimension mismatch");
  std::vector<std::size_t> idx;
  const Mat z = ball_offsets(s, p, r, &idx);
  require(z.cols() >= m + 1, "best_plane: insufficient samples in the ball");
  if (m == n) return BestPlane{Subspace::full(n), 0.0, idx.size()};

  Mat cov = Mat::Zero(n, n);
  for (Eigen::Index k = 0; k < z.cols(); ++k) cov += s.weight(idx[static_cast<std::size_t>(k)]) * z.col(k) * z.col(k).transpose();
  Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
  const Mat v = eig.eigenvectors();  // ascending eigenvalues

  std::vector<Mat> seeds;
  seeds.push_back(v.rightCols(m));
  // Other coordinate subsets of the eigenbasis, when there are few.
  std::vector<int> pick(static_cast<std::size_t>(n), 0);
  std::fill(pick.end() - m, pick.end(), 1);
  int subsets = 0;
  do {
    if (++subsets > 20) break;
    Mat f(n, m);
    int c = 0;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)]) f.col(c++) = v.col(i);
    seeds.push_back(f);
  } while (std::next_permutation(pick.begin(), pick.end()));
  for (Mat& g : grid_seeds(n, m, z, r, 4)) seeds.push_back(std::move(g));

  double best = std::numeric_limits<double>::infinity();
  Mat best_frame;
  for (const Mat& seed : seeds) {
    double val = 0.0;
    Mat f = refine_plane(orthonormal(seed), z, r, val);
    if (val < best) {
      best = val;
      best_frame = std::move(f);
    }
  }
  return BestPlane{Subspace::from_frame(best_frame), best, idx.size()};
}

FlatnessReport reifenberg_report(const SampledSet& s, const std::vector<std::size_t>& points,
                                 const std::vector<double>& radii, double delta, double grid_fraction) {
  require(!radii.empty() && delta > 0.0, "reifenberg: need radii and delta > 0");
  for (std::size_t k = 1; k < radii.size(); ++k)
    require(radii[k] < radii[k - 1], "reifenberg: radii must be decreasing");
  require(grid_fraction > 0.0 && grid_fraction <= 1.0 / 16.0, "reifenberg: grid fraction must be in (0, 1/16]");
  std::vector<std::size_t> pts = points;
  if (pts.empty()) {
    pts.resize(s.size());
    std::iota(pts.begin(), pts.end(), 0);
  }
  FlatnessReport rep;
  rep.delta = delta;
  rep.verdict = true;
  for (std::size_t i : pts) {
    require(i < s.size(), "reifenberg: point index out of range");
    const Vec x = s.point(i);
    for (double r : radii) {
      const BestPlane bp = best_plane(s, x, r, s.intrinsic_dim());
      const double step = r * grid_fraction;
      const double cov = coverage_defect(s, x, bp.plane, r, step);
      const double th = std::max(bp.beta, cov);
      rep.entries.push_back(FlatnessEntry{i, r, bp.beta, cov, th, step, bp.plane, th <= delta});
      rep.verdict = rep.verdict && th <= delta;
    }
  }
  return rep;
}

ProbeReport admissibility_probe(const SampledSet& s, const Vec& p, const Subspace& h, double alpha, double m_const,
                                double big_r, double c, const ProbeOptions& opt) {
  require(s.has_frames(), "admissibility: the set carries no frames");
  require(alpha > 0.0 && m_const > 0.0 && big_r > 0.0 && c > 0.0, "admissibility: parameters must be positive");
  require(h.ambient_dim() == s.ambient_dim() && h.dim() == s.intrinsic_dim() && p.size() == s.ambient_dim(),
          "admissibility: dimension mismatch");
  require(opt.dyadic_levels >= 1 && opt.radius_scale > 0.0, "admissibility: invalid dyadic radii");
  const int m = s.intrinsic_dim();
  ProbeReport rep;
  rep.grid_step = opt.grid_step > 0.0 ? opt.grid_step : big_r / 16.0;
  const double tol = opt.match_tol > 0.0 ? opt.match_tol : rep.grid_step;
  for (int k = 0; k < opt.dyadic_levels; ++k) rep.radii.push_back(big_r * opt.radius_scale / std::ldexp(1.0, k));

  std::vector<std::size_t> cone;
  std::vector<Vec> proj;
  std::vector<char> in_e(s.size(), 0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const Vec y = s.point(i);
    if (cone_contains(p, alpha, h, y)) {
      cone.push_back(i);
      proj.push_back(h.coords(y - p));
    }
    in_e[i] = angle_metric(s.frame(i), h) < m_const * alpha;
  }

  rep.coverage_pass = true;
  rep.mass_pass = true;
  rep.worst_mass_ratio = std::numeric_limits<double>::infinity();
  const auto grid = disk_grid(m, big_r, rep.grid_step, false);
  rep.grid_points = grid.size();
  for (const Vec& x : grid) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t eta = 0;
    for (std::size_t k = 0; k < cone.size(); ++k) {
      const double d = (proj[k] - x).norm();
      if (d < best) {
        best = d;
        eta = cone[k];
      }
    }
    rep.worst_match = std::max(rep.worst_match, best);
    if (!(best <= tol)) {
      ++rep.uncovered;
      rep.coverage_pass = false;
      continue;
    }
    const Vec ex = s.point(eta);
    for (double r : rep.radii) {
      double mass = 0.0;
      for (std::size_t i : s.in_ball(ex, r))
        if (in_e[i]) mass += s.weight(i);
      const double ratio = mass / (c * std::pow(r, m));
      rep.worst_mass_ratio = std::min(rep.worst_mass_ratio, ratio);
      if (ratio < 1.0) rep.mass_pass = false;
    }
  }
  if (rep.grid_points == 0 || rep.uncovered == rep.grid_points) rep.worst_mass_ratio = 0.0;
  return rep;
}

InjectivityReport injectivity_check(const SampledSet& s, const Vec& p, const Subspace& f, double r,
                                    double delta, double collision_tol) {
  require(r > 0.0 && delta >= 0.0, "injectivity: invalid radius or delta");
  require(f.ambient_dim() == s.ambient_dim() && p.size() == s.ambient_dim(), "injectivity: dimension mismatch");
  const double tol = collision_tol > 0.0 ? collision_tol : 1e-9 * r;
  const auto idx = s.in_ball(p, r);
  InjectivityReport rep;
  rep.samples = idx.size();
  std::vector<Vec> xi;
  for (std::size_t i : idx) xi.push_back(f.coords(s.point(i) - p));
  std::vector<std::size_t> order(idx.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xi[a](0) < xi[b](0); });
  for (std::size_t a = 0; a < order.size() && rep.injective; ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      if (xi[order[b]](0) - xi[order[a]](0) > tol) break;
      if ((xi[order[b]] - xi[order[a]]).norm() <= tol) {
        rep.injective = false;
        rep.witness = std::make_pair(idx[std::min(order[a], order[b])], idx[std::max(order[a], order[b])]);
        break;
      }
    }
  if (s.has_frames()) {
    for (std::size_t i : idx) rep.max_angle = std::max(rep.max_angle, angle_metric(s.frame(i), f));
    rep.hypothesis_held = rep.max_angle + delta < 1.0;
  }
  return rep;
}

LocalGraph extract_local_graph(const SampledSet& s, const Vec& p, double r, double delta,
                               const std::optional<Subspace>& pinned) {
  const Subspace plane = pinned ? *pinned : best_plane(s, p, r, s.intrinsic_dim()).plane;
  require(plane.dim() == s.intrinsic_dim(), "local graph: plane has the wrong dimension");
  const InjectivityReport inj = injectivity_check(s, p, plane, 0.5 * r, delta);
  if (!inj.injective)
    throw NotAGraphError("samples " + std::to_string(inj.witness->first) + " and " +
                             std::to_string(inj.witness->second) + " project to the same point",
                         inj.witness->first, inj.witness->second);
  LocalGraph g{plane, p, s.in_ball(p, 0.5 * r), {}, {}, 0.0};
  for (std::size_t i : g.samples) {
    const Vec z = s.point(i) - p;
    g.sites.push_back(plane.coords(z));
    g.values.push_back(plane.project_perp(z));
  }
  for (std::size_t a = 0; a < g.sites.size(); ++a)
    for (std::size_t b = a + 1; b < g.sites.size(); ++b)
      g.lip = std::max(g.lip, (g.values[a] - g.values[b]).norm() / (g.sites[a] - g.sites[b]).norm());
  return g;
}

SampledSet fill_frames(const SampledSet& s, double r, int m) {
  require(m == s.intrinsic_dim(), "fill_frames: dimension differs from the set's");
  std::vector<Subspace> frames;
  frames.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) frames.push_back(best_plane(s, s.point(i), r, m).plane);
  return s.with_frames(std::move(frames));
}

}  // namespace menergy
