#include "menergy/lipgraph.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "menergy/errors.hpp"
#include "menergy/reduce.hpp"

namespace menergy {

Subspace GraphDescriptor::tangent(const Vec& xi) const {
  require(static_cast<bool>(du), "graph: derivative evaluator required");
  return Subspace::span(base.frame() + du(xi));
}

namespace fixtures {

namespace {

Subspace leading_plane(int n, int m) {
  Mat f = Mat::Zero(n, m);
  for (int k = 0; k < m; ++k) f(k, k) = 1.0;
  return Subspace::from_frame(f);
}

}  // namespace

GraphDescriptor paraboloid(int m, double a, double radius) {
  require(m >= 1 && radius > 0.0, "paraboloid: invalid parameters");
  const int n = m + 1;
  GraphDescriptor g{leading_plane(n, m), nullptr, nullptr, std::abs(a) * radius, Vec::Zero(n), std::abs(a)};
  g.u = [=](const Vec& xi) {
    Vec v = Vec::Zero(n);
    v(m) = 0.5 * a * xi.squaredNorm();
    return v;
  };
  g.du = [=](const Vec& xi) {
    Mat d = Mat::Zero(n, m);
    d.row(m) = a * xi.transpose();
    return d;
  };
  return g;
}

GraphDescriptor cone_abs(int m, double s) {
  require(m >= 1, "cone_abs: invalid dimension");
  const int n = m + 1;
  GraphDescriptor g{leading_plane(n, m), nullptr, nullptr, std::abs(s), Vec::Zero(n), std::nullopt};
  g.u = [=](const Vec& xi) {
    Vec v = Vec::Zero(n);
    v(m) = s * xi.norm();
    return v;
  };
  g.du = [=](const Vec& xi) {
    Mat d = Mat::Zero(n, m);
    const double r = xi.norm();
    if (r > 0.0) d.row(m) = s * xi.transpose() / r;
    return d;
  };
  return g;
}

GraphDescriptor sin_wave(int m, double amplitude, double frequency) {
  require(m >= 1, "sin_wave: invalid dimension");
  const int n = m + 1;
  GraphDescriptor g{leading_plane(n, m), nullptr, nullptr, std::abs(amplitude * frequency), Vec::Zero(n),
                    std::abs(amplitude * frequency * frequency)};
  g.u = [=](const Vec& xi) {
    Vec v = Vec::Zero(n);
    v(m) = amplitude * std::sin(frequency * xi(0));
    return v;
  };
  g.du = [=](const Vec& xi) {
    Mat d = Mat::Zero(n, m);
    d(m, 0) = amplitude * frequency * std::cos(frequency * xi(0));
    return d;
  };
  return g;
}

GraphDescriptor polynomial(const std::vector<double>& coeffs, double radius) {
  require(!coeffs.empty() && radius > 0.0, "polynomial: invalid parameters");
  double lip = 0.0, hess = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) lip += k * std::abs(coeffs[k]) * std::pow(radius, k - 1.0);
  for (std::size_t k = 2; k < coeffs.size(); ++k)
    hess += k * (k - 1.0) * std::abs(coeffs[k]) * std::pow(radius, k - 2.0);
  // Anchored: the constant term is dropped so that u(0) = 0.
  GraphDescriptor g{leading_plane(2, 1), nullptr, nullptr, lip, Vec::Zero(2), hess};
  g.u = [=](const Vec& xi) {
    double v = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) v = v * xi(0) + coeffs[k];
    Vec out = Vec::Zero(2);
    out(1) = v * xi(0);
    return out;
  };
  g.du = [=](const Vec& xi) {
    double d = 0.0;
    for (std::size_t k = coeffs.size(); k-- > 1;) d = d * xi(0) + k * coeffs[k];
    Mat out = Mat::Zero(2, 1);
    out(1, 0) = d;
    return out;
  };
  return g;
}

GraphDescriptor linear(const Subspace& f, const Mat& l) {
  const int n = f.ambient_dim(), m = f.dim();
  require(l.rows() == n - m && l.cols() == m, "linear graph: L must be (n-m) x m");
  const Mat q = f.complement_frame();
  const Mat a = q * l;
  GraphDescriptor g{f, nullptr, nullptr, operator_norm(l), Vec::Zero(n), 0.0};
  g.u = [=](const Vec& xi) -> Vec { return a * xi; };
  g.du = [=](const Vec&) -> Mat { return a; };
  return g;
}

GraphDescriptor sine_bump(const Subspace& f, double sigma, const Vec& w, double phase, const Vec& nu) {
  const int n = f.ambient_dim(), m = f.dim();
  require(w.size() == m && nu.size() == n, "sine_bump: dimension mismatch");
  const Vec wn = w.normalized();
  const Vec nn = f.project_perp(nu).normalized();
  GraphDescriptor g{f, nullptr, nullptr, std::abs(sigma), Vec::Zero(n), std::abs(sigma)};
  g.u = [=](const Vec& xi) -> Vec { return sigma * (std::sin(wn.dot(xi) + phase) - std::sin(phase)) * nn; };
  g.du = [=](const Vec& xi) -> Mat { return sigma * std::cos(wn.dot(xi) + phase) * nn * wn.transpose(); };
  return g;
}

}  // namespace fixtures

GraphDescriptor shift_graph(const GraphDescriptor& g, const Vec& x) {
  require(x.size() == g.n(), "shift_graph: dimension mismatch");
  const Vec xi = g.base.coords(x - g.anchor);
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
  require((g.point(xi) - x).norm() <= 1e-10 * scale, "shift_graph: point is not on the graph");
  const Vec u0 = g.u(xi);
  GraphDescriptor out{g.base, nullptr, nullptr, g.lip_bound, x, g.hessian_bound};
  const GraphMap u = g.u;
  out.u = [u, xi, u0](const Vec& y) -> Vec { return u(y + xi) - u0; };
  if (g.du) {
    const GraphJacobian du = g.du;
    out.du = [du, xi](const Vec& y) -> Mat { return du(y + xi); };
  }
  return out;
}

TiltReport tilting_coverage_check(const GraphDescriptor& g, const Subspace& gp, double chi, double rho,
                                  int grid_per_radius) {
  require(gp.ambient_dim() == g.n() && gp.dim() == g.m(), "tilting: dimension mismatch");
  require(rho > 0.0 && chi >= 0.0 && chi < 1.0 && grid_per_radius >= 1, "tilting: invalid parameters");
  require(angle_metric(g.base, gp) <= chi + 1e-12, "tilting: planes are further apart than chi");
  require(g.anchor.isZero(0.0), "tilting: the graph must be anchored at the origin");
  TiltReport rep;
  rep.sigma = chi * (1.0 + g.lip_bound);
  if (rep.sigma >= 1.0) throw PreconditionError("tilting: sigma = chi (1 + lip) must stay below 1");
  rep.target_radius = (1.0 - rep.sigma) * rho / std::sqrt(1.0 + g.lip_bound * g.lip_bound);

  const int m = g.m();
  const Mat& f = g.base.frame();
  const Mat& gf = gp.frame();
  const Mat a = gf.transpose() * f;  // Π_G restricted to F, in frame coordinates
  const Eigen::PartialPivLU<Mat> lu(a);
  const double step = rep.target_radius / grid_per_radius;
  const int k = grid_per_radius;
  std::vector<int> c(static_cast<std::size_t>(m), -k);
  while (true) {
    Vec y(m);
    for (int i = 0; i < m; ++i) y(i) = c[static_cast<std::size_t>(i)] * step;
    if (y.norm() <= rep.target_radius * (1.0 + 1e-12)) {
      ++rep.grid_points;
      // ξ <- A⁻¹(y - Gᵀu(ξ)) contracts with factor ≤ χ lip / √(1-χ²) < 1.
      Vec xi = lu.solve(y);
      double res = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 500 && res > 1e-15 * rho; ++it) {
        xi = lu.solve(y - gf.transpose() * g.u(xi));
        res = (gf.transpose() * (f * xi + g.u(xi)) - y).norm();
      }
      const double pre = (f * xi + g.u(xi)).norm();
      rep.worst_residual = std::max(rep.worst_residual, res);
      rep.worst_preimage = std::max(rep.worst_preimage, pre / rho);
      if (!(res <= 1e-6 * rho) || pre > rho * (1.0 + 1e-12)) ++rep.failures;
    }
    int i = 0;
    while (i < m && ++c[static_cast<std::size_t>(i)] > k) c[static_cast<std::size_t>(i++)] = -k;
    if (i == m) break;
  }
  rep.covered = rep.failures == 0;
  return rep;
}

AngleBounds graph_angle_bounds(const GraphDescriptor& g, const Vec& x, const Vec& y, double beta) {
  require(static_cast<bool>(g.du), "graph_angle_bounds: derivative evaluator required");
  require(beta >= 0.0 && beta < 1.0 && g.lip_bound <= beta * (1.0 + 1e-12),
          "graph_angle_bounds: need lip u <= beta < 1");
  AngleBounds b;
  b.angle = angle_metric(g.tangent(x), g.tangent(y));
  b.du_diff = operator_norm(g.du(x) - g.du(y));
  b.upper = std::sqrt((1.0 + beta * beta) / (1.0 - beta * beta)) * b.angle;
  b.ok = b.angle <= b.du_diff + 1e-12 && b.du_diff <= b.upper + 1e-12;
  return b;
}

namespace {

/// Levenberg-Marquardt with a forward-difference Jacobian.
bool solve_lm(const std::function<Vec(const Vec&)>& resid, Vec& z, double tol) {
  double lambda = 1e-3;
  Vec r = resid(z);
  for (int it = 0; it < 200; ++it) {
    if (r.norm() < tol) return true;
    const Eigen::Index k = z.size();
    Mat j(r.size(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double h = 1e-7 * std::max(1.0, std::abs(z(i)));
      Vec zp = z;
      zp(i) += h;
      j.col(i) = (resid(zp) - r) / h;
    }
    const Mat jtj = j.transpose() * j;
    const Vec g = j.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 20 && !improved; ++tries) {
      Mat sys = jtj;
      sys.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
      const Vec step = sys.ldlt().solve(-g);
      const Vec zn = z + step;
      const Vec rn = resid(zn);
      if (rn.norm() < r.norm()) {
        z = zn;
        r = rn;
        lambda = std::max(1e-12, lambda * 0.3);
        improved = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) break;
  }
  return r.norm() < tol;
}

}  // namespace

IntersectionReport intersect_graphs(const GraphDescriptor& ga, const GraphDescriptor& gb, double chi,
                                    double sigma, const IntersectOptions& opt) {
  const int n = ga.n(), m = ga.m();
  require(gb.n() == n && gb.m() == m, "intersect: dimension mismatch");
  if (!(sigma >= 0.0 && sigma < chi / 8.0 && chi / 8.0 < 1.0 / 8.0))
    throw PreconditionError("intersect: need 0 <= sigma < chi/8 < 1/8");
  require(ga.lip_bound <= sigma * (1.0 + 1e-12) && gb.lip_bound <= sigma * (1.0 + 1e-12),
          "intersect: Lipschitz bounds exceed sigma");
  require(ga.anchor.isZero(0.0) && gb.anchor.isZero(0.0), "intersect: graphs must be anchored at the origin");
  require(ga.u(Vec::Zero(m)).norm() <= 1e-12 && gb.u(Vec::Zero(m)).norm() <= 1e-12,
          "intersect: graphs must vanish at the origin");
  require(angle_metric(ga.base, gb.base) >= chi - 1e-12, "intersect: planes are closer than chi");

  const PrincipalDecomposition pd = principal_angles(ga.base, gb.base);
  int j = 0;
  while (j < m && std::sin(pd.angles[static_cast<std::size_t>(j)]) < chi - 1e-12) ++j;
  IntersectionReport rep;
  rep.j = j;
  rep.c = 5.0 / (chi - 8.0 * sigma);
  rep.x_frame = pd.left.leftCols(j);
  rep.y_frame = pd.left.rightCols(m - j);

  const Mat& fa = ga.base.frame();
  const Mat& fb = gb.base.frame();
  const double scale = std::max(1.0, opt.extent);
  auto split = [m](const Vec& z) { return std::make_pair(Vec(z.head(m)), Vec(z.tail(m))); };
  auto qa = [&](const Vec& a) -> Vec { return fa * a + ga.u(a); };
  auto qb = [&](const Vec& b) -> Vec { return fb * b + gb.u(b); };

  std::vector<Vec> targets;
  if (j == 0) {
    std::mt19937_64 rng(opt.random_seed);
    std::uniform_real_distribution<double> uni(-opt.extent, opt.extent);
    targets.emplace_back();  // the origin itself
    for (int s = 0; s < opt.seeds_per_axis * 2; ++s) {
      Vec t(2 * m);
      for (int i = 0; i < 2 * m; ++i) t(i) = uni(rng);
      targets.push_back(t);
    }
  } else {
    const int k = opt.seeds_per_axis;
    std::vector<int> c(static_cast<std::size_t>(j), 0);
    while (true) {
      Vec t(j);
      for (int i = 0; i < j; ++i)
        t(i) = k == 1 ? 0.0 : -opt.extent + 2.0 * opt.extent * c[static_cast<std::size_t>(i)] / (k - 1);
      targets.push_back(t);
      int i = 0;
      while (i < j && ++c[static_cast<std::size_t>(i)] >= k) c[static_cast<std::size_t>(i++)] = 0;
      if (i == j) break;
    }
  }

  for (const Vec& t : targets) {
    Vec z(2 * m);
    std::function<Vec(const Vec&)> resid;
    if (j == 0) {
      if (t.size() == 0) {
        rep.points.push_back(Vec::Zero(n));
        continue;
      }
      z = t;
      resid = [&](const Vec& zz) -> Vec {
        auto [a, b] = split(zz);
        return qa(a) - qb(b);
      };
    } else {
      const Vec x0 = rep.x_frame * t;
      z << fa.transpose() * x0, fb.transpose() * x0;
      resid = [&, t](const Vec& zz) -> Vec {
        auto [a, b] = split(zz);
        const Vec pa = qa(a);
        Vec r(n + j);
        r << pa - qb(b), rep.x_frame.transpose() * pa - t;
        return r;
      };
    }
    if (!solve_lm(resid, z, 1e-9 * scale)) continue;
    const Vec pt = qa(z.head(m));
    bool dup = false;
    for (const Vec& q : rep.points)
      if ((q - pt).norm() < 1e-9 * scale) dup = true;
    if (!dup) rep.points.push_back(pt);
  }

  rep.verified = true;
  for (std::size_t a = 0; a < rep.points.size(); ++a)
    for (std::size_t b = a + 1; b < rep.points.size(); ++b) {
      const Vec d = rep.points[b] - rep.points[a];
      const double py = (rep.y_frame.transpose() * d).norm();
      const double px = j == 0 ? 0.0 : (rep.x_frame.transpose() * d).norm();
      ++rep.pairs_checked;
      const double slack = 1e-8 * scale;
      if (py > rep.c * px + slack) rep.verified = false;
      if (px > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, py / (rep.c * px));
      else if (py > slack) rep.worst_ratio = std::numeric_limits<double>::infinity();
    }
  rep.verified = rep.verified && j <= m - 1;
  return rep;
}

namespace {

double small_operator_norm(const Mat& a) {
  if (a.cols() == 1 || a.rows() == 1) return a.norm();
  if (a.cols() == 2) {
    const double p = a.col(0).squaredNorm(), q = a.col(1).squaredNorm(), r = a.col(0).dot(a.col(1));
    const double half = 0.5 * (p + q);
    return std::sqrt(half + std::sqrt(0.25 * (p - q) * (p - q) + r * r));
  }
  return operator_norm(a);
}

}  // namespace

double c2_bound_constant(double tau, int m) {
  const double e = (1.0 + tau) * m;
  return std::pow(2.0, e - 1.0) * (1.0 + std::pow(2.0, e));
}

C2Check c2_integrand_bound(const GraphDescriptor& g, const Vec& x, const Vec& y, double tau) {
  const int m = g.m();
  require(tau >= 1.0 / m - 1.0 - 1e-15, "c2 bound: need tau >= 1/m - 1");
  require(g.hessian_bound.has_value(), "c2 bound: graph carries no Hessian bound");
  const PointPlanePair pr{g.point(x), g.point(y), g.tangent(x), g.tangent(y)};
  const double d = (pr.x - pr.y).norm();
  C2Check c;
  c.lhs = numerator_ltau(pr, tau) / std::pow(d, 2 * m);
  c.rhs = c2_bound_constant(tau, m) * std::pow(*g.hessian_bound, (1.0 + tau) * m) * std::pow(d, (tau - 1.0) * m);
  // Angles carry a rounding floor of a few ulps; its power bounds the noise in lhs.
  const double noise = std::pow(64.0 * std::numeric_limits<double>::epsilon(), (1.0 + tau) * m) / std::pow(d, 2 * m);
  c.ok = c.lhs <= c.rhs * (1.0 + 1e-12) + noise;
  return c;
}

SobolevValue sobolev_seminorm(const GraphJacobian& du, int m, const SobolevRegion& region, double s, double rho,
                              int cells_per_axis, unsigned threads) {
  require(s > 0.0 && s < 1.0 && rho >= 1.0, "sobolev: need s in (0,1) and rho >= 1");
  require(m >= 1 && m <= 3 && cells_per_axis >= 2, "sobolev: invalid grid");
  Vec lo(m), hi(m);
  if (region.shape == SobolevRegion::Shape::Box) {
    require(region.lower.size() == m && region.upper.size() == m, "sobolev: box corners have wrong size");
    lo = region.lower;
    hi = region.upper;
  } else {
    require(region.lower.size() == m && region.radius > 0.0, "sobolev: disk needs a center and radius");
    lo = region.lower.array() - region.radius;
    hi = region.lower.array() + region.radius;
  }
  const Vec h = (hi - lo) / cells_per_axis;
  const double cell_vol = h.prod();
  std::vector<Vec> pts;
  std::vector<Mat> ds;
  long total = 1;
  for (int k = 0; k < m; ++k) total *= cells_per_axis;
  for (long c = 0; c < total; ++c) {
    long rem = c;
    Vec x(m);
    for (int k = 0; k < m; ++k) {
      x(k) = lo(k) + (static_cast<double>(rem % cells_per_axis) + 0.5) * h(k);
      rem /= cells_per_axis;
    }
    if (region.shape == SobolevRegion::Shape::Disk && (x - region.lower).norm() >= region.radius) continue;
    pts.push_back(x);
    ds.push_back(du(x));
  }
  const double expo = m + s * rho;
  auto body = [&](std::size_t i, KahanSum& acc) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == i) continue;
      const Mat diff = ds[i] - ds[k];
      const double nd = small_operator_norm(diff);
      if (nd == 0.0) continue;
      acc.add(std::pow(nd, rho) / std::pow((pts[i] - pts[k]).norm(), expo));
    }
  };
  const KahanSum sum = chunked_reduce<KahanSum>(pts.size(), resolve_threads(threads), body,
                                                [](KahanSum& a, const KahanSum& b) { a.add(b); });
  SobolevValue v;
  v.integral = sum.value() * cell_vol * cell_vol;
  v.seminorm = std::pow(v.integral, 1.0 / rho);
  v.cells = pts.size();
  return v;
}

std::vector<SufficiencyLevel> sobolev_sufficiency_check(const GraphDescriptor& g, double tau, double r,
                                                        const std::vector<double>& steps, unsigned threads) {
  require(tau > 0.0 && r > 0.0 && !steps.empty(), "sufficiency: need tau > 0, r > 0 and grid steps");
  require(static_cast<bool>(g.du), "sufficiency: derivative evaluator required");
  const int m = g.m();
  std::vector<SufficiencyLevel> out;
  for (double h : steps) {
    const SampledSet s = gen_graph(g.base, g.u, g.du, GraphRegion{GraphRegion::Shape::Disk, r}, h, g.anchor);
    EnergyConfig cfg;
    cfg.tau = tau;
    cfg.parallel_blocks = threads;
    const double e = local_energy(s, g.point(Vec::Zero(m)), r, cfg).value;
    const int cells = std::max(2, static_cast<int>(std::lround(2.0 * r / h)));
    SobolevRegion reg{SobolevRegion::Shape::Disk, Vec::Zero(m), Vec(), r};
    const double rho = (1.0 + tau) * m;
    const SobolevValue sv = sobolev_seminorm(g.du, m, reg, 1.0 / (1.0 + tau), rho, cells, threads);
    out.push_back(SufficiencyLevel{h, e, sv.integral, sv.integral > 0.0 ? e / sv.integral : 0.0});
  }
  return out;
}

}  // namespace menergy
