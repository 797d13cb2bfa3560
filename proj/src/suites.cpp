#include "menergy/suites.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>

#include "menergy/energy.hpp"
#include "menergy/errors.hpp"
#include "menergy/flatness.hpp"
#include "menergy/lipgraph.hpp"

namespace menergy {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Accumulates one property: each observation is a violation measure that
/// must not exceed the tolerance.
class Check {
 public:
  Check(std::string suite, std::string property, double tolerance, const std::string& tamper) {
    r_.suite = std::move(suite);
    r_.property = std::move(property);
    r_.tolerance = r_.property == tamper ? -1.0 : tolerance;
  }
  void observe(double measure) {
    ++r_.checked;
    if (!(measure <= r_.tolerance)) ++r_.failures;
    if (std::isnan(measure)) measure = std::numeric_limits<double>::infinity();
    r_.worst = std::max(r_.worst, measure);
  }
  /// Boolean check: 0 when it holds, 1 otherwise.
  void expect(bool ok) { observe(ok ? 0.0 : 1.0); }
  PropertyResult result() const { return r_; }

 private:
  PropertyResult r_;
};

struct Ctx {
  std::mt19937_64 rng;
  unsigned threads;
  std::string tamper;
  std::vector<PropertyResult> out;

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  Vec gaussian(int n) {
    std::normal_distribution<double> g;
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = g(rng);
    return v;
  }
  Check check(const std::string& suite, const std::string& prop, double tol) { return Check(suite, prop, tol, tamper); }
  void push(const Check& c) { out.push_back(c.result()); }
};

/// A random pair with a spread of principal angles, half of them near zero.
std::pair<Subspace, Subspace> random_pair(Ctx& c, int n, int m) {
  Subspace f = random_subspace(n, m, c.rng);
  if (c.integer(0, 1) == 0) return {f, random_subspace(n, m, c.rng)};
  std::vector<double> ang(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < std::min(m, n - m); ++i) ang[static_cast<std::size_t>(i)] = std::min(0.5 * kPi, std::pow(10.0, c.uniform(-8.0, 0.2)));
  return {f, subspace_at_angles(f, ang, c.rng)};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

// ---------------------------------------------------------------------------

void suite_grassmann(Ctx& c) {
  const std::string s = "grassmann";
  auto metric = c.check(s, "angle_metric_equals_sin_max_angle", 1e-10);
  auto ident = c.check(s, "projector_norm_identities", 1e-10);
  auto pvec = c.check(s, "principal_vector_relations", 1e-10);
  auto chain = c.check(s, "combined_angle_chain", 1e-12);
  for (int k = 0; k < 1000; ++k) {
    const int n = c.integer(1, 8), m = c.integer(1, std::min(4, n));
    auto [f, g] = random_pair(c, n, m);
    const auto pd = principal_angles(f, g);
    metric.observe(std::abs(angle_metric(f, g) - std::sin(pd.angles.back())));
    if (k < 300) {
      const auto six = projector_norm_identities(f, g);
      const auto [lo, hi] = std::minmax_element(six.begin(), six.end());
      ident.observe(*hi - *lo);
    }
    const Mat cross = pd.left.transpose() * pd.right;
    Mat expect = Mat::Zero(m, m);
    for (int i = 0; i < m; ++i) expect(i, i) = std::cos(pd.angles[static_cast<std::size_t>(i)]);
    double dev = (cross - expect).cwiseAbs().maxCoeff();
    dev = std::max(dev, (pd.left.transpose() * pd.left - Mat::Identity(m, m)).cwiseAbs().maxCoeff());
    dev = std::max(dev, (pd.right.transpose() * pd.right - Mat::Identity(m, m)).cwiseAbs().maxCoeff());
    pvec.observe(dev);

    // sinϑ_m <= sinϑ <= √m sinϑ_m and the three power comparisons.
    // sin²ϑ = 1 - Π(1 - sin²ϑ_i), kept accurate for tiny angles.
    const SineSpectrum spec = sine_spectrum(f, g);
    double log_cos2 = 0.0;
    for (int i = 0; i < m; ++i) log_cos2 += std::log1p(-spec.sin2[static_cast<std::size_t>(i)]);
    const double sm = std::sqrt(spec.max_sin2());
    const double sth = std::sqrt(-std::expm1(log_cos2));
    const double omc = spec.one_minus_cos_product();
    double v = std::max(sm - sth, sth - std::sqrt(double(m)) * sm);
    for (double tau : {0.0, 0.5, 0.9}) v = std::max(v, std::pow(omc, m) - std::pow(sth, (1.0 + tau) * m));
    v = std::max(v, std::pow(2.0, -m) * std::pow(sth, 2 * m) - std::pow(omc, m));
    v = std::max(v, std::pow(omc, m) - std::pow(sth, 2 * m));
    for (double tau : {1.5, 2.0, 4.0})
      v = std::max(v, combined_angle_constant(tau, m) * std::pow(sth, (1.0 + tau) * m) - std::pow(omc, m));
    chain.observe(v);
  }
  c.push(metric);
  c.push(ident);
  c.push(pvec);
  c.push(chain);

  auto cone = c.check(s, "cone_lemma_containment", 0.0);
  for (int k = 0; k < 10000; ++k) {
    const int n = c.integer(2, 5), m = c.integer(1, n - 1);
    const Subspace f = random_subspace(n, m, c.rng);
    const double sigma = c.uniform(0.0, 2.0);
    const double chi = c.uniform(0.0, 0.999 / (1.0 + sigma));
    // G within angle chi of F.
    std::vector<double> ang(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < std::min(m, n - m); ++i) ang[static_cast<std::size_t>(i)] = std::asin(chi * c.uniform(0.0, 1.0));
    if (!ang.empty()) ang[0] = std::asin(chi);
    const Subspace g = subspace_at_angles(f, ang, c.rng);
    const double kappa = cone_lemma_bound(chi, sigma);
    const Vec p = c.gaussian(n);
    // A point of C_p(σ, F): tangential part a, normal part of length <= σ|a|.
    const Vec a = f.project(c.gaussian(n));
    Vec b = f.project_perp(c.gaussian(n));
    if (b.norm() > 0.0) b *= sigma * a.norm() * c.uniform(0.0, 1.0) / b.norm();
    const Vec z = p + a + b;
    cone.expect(cone_contains(p, kappa, g, z));
  }
  c.push(cone);

  auto tri = c.check(s, "angle_metric_triangle_inequality", 1e-10);
  for (int k = 0; k < 500; ++k) {
    const int n = c.integer(2, 6), m = c.integer(1, n - 1);
    const Subspace a = random_subspace(n, m, c.rng), b = random_subspace(n, m, c.rng),
                   d = random_subspace(n, m, c.rng);
    tri.observe(angle_metric(a, d) - angle_metric(a, b) - angle_metric(b, d));
  }
  c.push(tri);

  auto frames = c.check(s, "subspace_projector_invariants", 1e-10);
  for (int k = 0; k < 300; ++k) {
    const int n = c.integer(1, 8), m = c.integer(1, n);
    const Subspace f = random_subspace(n, m, c.rng);
    const Mat p = f.projector();
    frames.observe(std::max((p * p - p).cwiseAbs().maxCoeff(), (p - p.transpose()).cwiseAbs().maxCoeff()));
  }
  c.push(frames);
}

// ---------------------------------------------------------------------------

PointPlanePair random_point_pair(Ctx& c, int n, int m) {
  return PointPlanePair{c.gaussian(n), c.gaussian(n), random_subspace(n, m, c.rng), random_subspace(n, m, c.rng)};
}

void suite_conformal(Ctx& c) {
  const std::string s = "conformal";
  auto inv = c.check(s, "reflection_involution_isometry", 1e-12);
  for (int k = 0; k < 1000; ++k) {
    const int n = c.integer(1, 8);
    const Vec x = c.gaussian(n), y = c.gaussian(n), z = c.gaussian(n);
    const Vec rz = reflect(x, y, z);
    inv.observe(std::max((reflect(x, y, rz) - z).norm(), std::abs(rz.norm() - z.norm())) / std::max(1.0, z.norm()));
  }
  c.push(inv);

  auto sym = c.check(s, "conformal_angle_symmetry", 1e-10);
  for (int k = 0; k < 1000; ++k) {
    const int n = c.integer(2, 8), m = c.integer(1, std::min(4, n));
    const PointPlanePair p = random_point_pair(c, n, m);
    const PointPlanePair q{p.y, p.x, p.hy, p.hx};
    sym.observe(std::abs(conformal_angle(p) - conformal_angle(q)));
  }
  c.push(sym);

  auto sup = c.check(s, "sup_formulation", 1e-10);
  auto supgap = c.check(s, "sup_formulation_grid_gap", 1e-3);
  for (int k = 0; k < 100; ++k) {
    const int m = c.integer(1, 2), n = c.integer(m + 1, 4);
    const PointPlanePair p = random_point_pair(c, n, m);
    const double tau = 1.0;
    const double l = numerator_ltau(p, tau);
    double best = 0.0, over = -std::numeric_limits<double>::infinity();
    const int steps = m == 1 ? 2 : 1440;
    for (int t = 0; t < steps; ++t) {
      Vec e;
      if (m == 1) e = (t == 0 ? 1.0 : -1.0) * p.hx.frame().col(0);
      else e = std::cos(kPi * t / steps) * p.hx.frame().col(0) + std::sin(kPi * t / steps) * p.hx.frame().col(1);
      const double fv = pointwise_ftau(p.x, p.y, p.hy, e.normalized(), tau);
      best = std::max(best, fv);
      over = std::max(over, fv - l);
    }
    sup.observe(over);
    supgap.observe(l > 0.0 ? (l - best) / l : 0.0);
  }
  c.push(sup);
  c.push(supgap);

  auto cmp = c.check(s, "pointwise_kernel_comparison", 1e-12);
  for (int k = 0; k < 1000; ++k) {
    const int n = c.integer(2, 7), m = c.integer(1, std::min(4, n));
    const PointPlanePair p = random_point_pair(c, n, m);
    const double l1 = numerator_ltau(p, 1.0), ks = numerator_ks(p);
    cmp.observe(std::max(std::pow(2.0, -m) * l1 - ks, ks - std::pow(double(m), m) * l1));
  }
  c.push(cmp);

  auto simil = c.check(s, "mobius_similarity_pair_invariance", 1e-10);
  auto inver = c.check(s, "mobius_inversion_pair_invariance", 1e-8);
  for (int k = 0; k < 500; ++k) {
    const int n = c.integer(2, 5), m = c.integer(1, n - 1);
    const PointPlanePair p = random_point_pair(c, n, m);
    const MobiusMap sim = MobiusMap::similarity(random_orthogonal(n, c.rng), c.uniform(0.3, 3.0), c.gaussian(n));
    Vec center = c.gaussian(n) * 2.0;
    while ((center - p.x).norm() < 0.3 || (center - p.y).norm() < 0.3) center = c.gaussian(n) * 2.0;
    const MobiusMap iv = MobiusMap::inversion(center, c.uniform(0.5, 2.0));
    for (int which = 0; which < 2; ++which) {
      const MobiusMap& t = which == 0 ? sim : iv;
      const PointPlanePair q{t.apply(p.x), t.apply(p.y), Subspace::span(t.push_frame(p.x, p.hx.frame())),
                             Subspace::span(t.push_frame(p.y, p.hy.frame()))};
      const double d = std::max(std::abs(numerator_ltau(p, 1.0) - numerator_ltau(q, 1.0)),
                                std::abs(numerator_ks(p) - numerator_ks(q)));
      (which == 0 ? simil : inver).observe(d);
    }
  }
  c.push(simil);
  c.push(inver);
}

// ---------------------------------------------------------------------------

double ellipse_perimeter(double a, double b) {
  // Composite Simpson on a quarter, far beyond the generator's accuracy.
  const int n = 200000;
  const double h = 0.5 * kPi / n;
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h;
    const double f = std::hypot(a * std::sin(t), b * std::cos(t));
    sum += f * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return 4.0 * sum * h / 3.0;
}

void suite_sampled_sets(Ctx& c) {
  const std::string s = "sampled_sets";
  auto mass = c.check(s, "generator_total_mass", 1e-6);
  mass.observe(rel(gen_circle(1.5, 64).total_weight(), 2 * kPi * 1.5));
  mass.observe(rel(gen_sphere(1.0, 2, 2000).total_weight(), 4 * kPi));
  mass.observe(rel(gen_torus(2.0, 0.5, 50, 40).total_weight(), 4 * kPi * kPi * 2.0 * 0.5));
  mass.observe(rel(gen_ellipse(2.0, 1.0, 256).total_weight(), ellipse_perimeter(2.0, 1.0)));
  {
    const SampledSet w = gen_wedge(1.0, 4, 6);
    double expect = 0.0;
    for (int i = 1; i <= 4; ++i) expect += 2.0 * kPi * std::pow(2.0 * wedge_kappa(1.0) / std::ldexp(1.0, i), 2);
    mass.observe(rel(w.total_weight(), expect));
  }
  c.push(mass);

  auto graph_mass = c.check(s, "graph_area_quadrature", 0.02);
  {
    const GraphDescriptor g = fixtures::paraboloid(2, 1.0, 1.0);
    const SampledSet gs = gen_graph(g.base, g.u, g.du, GraphRegion{GraphRegion::Shape::Disk, 1.0}, 0.02);
    graph_mass.observe(rel(gs.total_weight(), 2.0 * kPi / 3.0 * (std::pow(2.0, 1.5) - 1.0)));
  }
  c.push(graph_mass);

  auto round = c.check(s, "mobius_roundtrip", 1e-8);
  for (int k = 0; k < 6; ++k) {
    const SampledSet base = k % 2 ? gen_torus(2.0, 0.7, 12, 10) : gen_ellipse(2.0, 1.0, 64);
    const int n = base.ambient_dim();
    Vec center = Vec::Constant(n, 5.0) + c.gaussian(n) * 0.1;
    const MobiusMap t = k < 3 ? MobiusMap::similarity(random_orthogonal(n, c.rng), c.uniform(0.5, 2), c.gaussian(n))
                              : MobiusMap::inversion(center, c.uniform(0.5, 2.0));
    const SampledSet back = apply_mobius(apply_mobius(base, t), t.inverse());
    double d = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      d = std::max(d, (back.point(i) - base.point(i)).norm());
      d = std::max(d, angle_metric(back.frame(i), base.frame(i)));
      d = std::max(d, rel(back.weight(i), base.weight(i)));
    }
    round.observe(d);
  }
  c.push(round);

  auto gframes = c.check(s, "graph_frame_angle_bound", 1e-8);
  for (int k = 0; k < 4; ++k) {
    const GraphDescriptor g = k % 2 ? fixtures::sin_wave(2, 0.2, 2.0) : fixtures::paraboloid(1 + k / 2, 0.8, 1.0);
    const GraphRegion region{GraphRegion::Shape::Box, 1.0};
    const SampledSet gs = gen_graph(g.base, g.u, g.du, region, 0.1);
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const Vec xi = g.base.coords(gs.point(i));
      gframes.observe(angle_metric(gs.frame(i), g.base) - operator_norm(g.du(xi)));
    }
  }
  c.push(gframes);

  auto io = c.check(s, "json_roundtrip", 1e-15);
  {
    const SampledSet a = gen_torus(2.0, 0.5, 9, 7);
    const SampledSet b = from_json(to_json(a));
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      d = std::max(d, (a.point(i) - b.point(i)).cwiseAbs().maxCoeff());
      d = std::max(d, (a.frame(i).frame() - b.frame(i).frame()).cwiseAbs().maxCoeff());
      d = std::max(d, std::abs(a.weight(i) - b.weight(i)));
    }
    io.observe(d);
  }
  c.push(io);
}

// ---------------------------------------------------------------------------

void suite_energy(Ctx& c) {
  const std::string s = "energy";
  EnergyConfig cfg;
  cfg.tau = 1.0;
  cfg.parallel_blocks = c.threads;
  const SampledSet torus = gen_torus(2.0, 0.8, 20, 16);
  const SampledSet ellipse = gen_ellipse(2.0, 1.0, 512);

  auto nonneg = c.check(s, "nonnegativity", 0.0);
  auto count = c.check(s, "pair_accounting", 0.0);
  for (double tau : {-0.5, 0.0, 1.0, 2.0})
    for (Kernel kern : {Kernel::Ltau, Kernel::KS}) {
      EnergyConfig cc = cfg;
      cc.tau = tau;
      cc.kernel = kern;
      const EnergyReport r = energy(torus, cc);
      nonneg.observe(-r.value);
      const double n = static_cast<double>(torus.size());
      count.observe(std::abs(double(r.pairs_used + r.pairs_skipped) - n * (n - 1.0)));
    }
  c.push(nonneg);
  c.push(count);

  auto split = c.check(s, "symmetrized_consistency", 1e-12);
  {
    const EnergyReport full = energy(torus, cfg);
    Vec center(3);
    center << 2.0, 0.0, 0.0;
    const std::vector<std::size_t> a = torus.in_ball(center, 1.5);
    std::vector<std::size_t> b;
    std::vector<char> in(torus.size(), 0);
    for (std::size_t i : a) in[i] = 1;
    for (std::size_t i = 0; i < torus.size(); ++i)
      if (!in[i]) b.push_back(i);
    double sum = 0.0;
    const std::vector<const std::vector<std::size_t>*> parts{&a, &b};
    for (const auto* r : parts)
      for (const auto* q : parts) sum += cross_energy_indices(torus, *r, *q, cfg).value;
    split.observe(rel(full.value, sum));
  }
  c.push(split);

  auto cmp = c.check(s, "kernel_comparison", 1e-12);
  {
    const double e1 = energy(torus, cfg).value;
    EnergyConfig ks = cfg;
    ks.kernel = Kernel::KS;
    const double eks = energy(torus, ks).value;
    cmp.observe(std::max(0.25 * e1 - eks, eks - 4.0 * e1) / e1);
  }
  c.push(cmp);

  auto sim = c.check(s, "mobius_similarity_invariance", 1e-12);
  auto inv = c.check(s, "mobius_inversion_invariance", 0.02);
  {
    const double e0 = energy(ellipse, cfg).value;
    const MobiusMap t = MobiusMap::similarity(random_orthogonal(2, c.rng), c.uniform(0.5, 2.0), c.gaussian(2));
    sim.observe(rel(e0, energy(apply_mobius(ellipse, t), cfg).value));
    Vec center(2);
    center << 0.0, 5.0;
    inv.observe(rel(e0, energy(apply_mobius(ellipse, MobiusMap::inversion(center, 1.0)), cfg).value));
  }
  c.push(sim);
  c.push(inv);

  auto refine = c.check(s, "refinement_stability", 0.0);
  {
    const RefinementStudy st =
        refinement_study([](int n) { return gen_ellipse(2.0, 1.0, n); }, {64, 128, 256, 512}, cfg);
    refine.expect(st.stable);
  }
  c.push(refine);

  auto det = c.check(s, "parallel_determinism", 0.0);
  {
    EnergyConfig one = cfg, four = cfg;
    one.parallel_blocks = 1;
    four.parallel_blocks = 4;
    det.observe(std::abs(energy(torus, one).value - energy(torus, four).value));
  }
  c.push(det);

  auto round = c.check(s, "round_sphere_nullity", 1e-10);
  round.observe(energy(gen_circle(1.0, 256), cfg).value);
  round.observe(energy(gen_sphere(1.0, 2, 400), cfg).value);
  c.push(round);
}

// ---------------------------------------------------------------------------

/// Brute-force minimax line through p for planar clouds.
double line_oracle(const Mat& z, double r) {
  auto beta = [&](double t) {
    const double cs = std::cos(t), sn = std::sin(t);
    double b = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) b = std::max(b, std::abs(-sn * z(0, k) + cs * z(1, k)));
    return b / r;
  };
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int i = 0; i < 721; ++i) {
    const double t = kPi * i / 720;
    const double v = beta(t);
    if (v < best) best = v, arg = t;
  }
  double width = kPi / 720;
  for (int level = 0; level < 30; ++level) {
    double a2 = arg;
    for (int i = -10; i <= 10; ++i) {
      const double t = arg + width * i / 10;
      const double v = beta(t);
      if (v < best) best = v, a2 = t;
    }
    arg = a2;
    width /= 5;
  }
  return best;
}

void suite_flatness(Ctx& c) {
  const std::string s = "flatness";
  auto order = c.check(s, "theta_dominates_beta", 1e-12);
  auto inf = c.check(s, "best_plane_inf_property", 1e-9);
  auto oracle = c.check(s, "best_plane_oracle_agreement", 1e-3);
  for (int k = 0; k < 6; ++k) {
    const int npts = c.integer(6, 40);
    Mat pts(2, npts);
    const double slope = c.uniform(-1, 1), noise = c.uniform(0.01, 0.4);
    for (int i = 0; i < npts; ++i) {
      const double t = c.uniform(-0.9, 0.9);
      pts(0, i) = t;
      pts(1, i) = slope * t + noise * c.uniform(-1, 1);
    }
    const SampledSet cloud(2, 1, pts, {}, {});
    const Vec p = Vec::Zero(2);
    const double r = 1.5;
    const BestPlane bp = best_plane(cloud, p, r, 1);
    Mat z(2, 0);
    std::vector<std::size_t> idx = cloud.in_ball(p, r);
    z.resize(2, static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) z.col(static_cast<Eigen::Index>(i)) = cloud.point(idx[i]);
    oracle.observe(std::abs(bp.beta - line_oracle(z, r)));
    for (int t = 0; t < 20; ++t) {
      const Subspace f = random_subspace(2, 1, c.rng);
      inf.observe(bp.beta - beta_wrt_plane(cloud, p, f, r));
      const double step = r / 16.0;
      const double th = theta(cloud, p, f, r, step);
      const double b = beta_wrt_plane(cloud, p, f, r);
      const double cov = coverage_defect(cloud, p, f, r, step);
      order.observe(std::max(b - th, std::abs(th - std::max(b, cov))));
    }
  }
  c.push(order);
  c.push(inf);
  c.push(oracle);

  auto flat = c.check(s, "flat_patch_zero_beta", 0.0);
  {
    const Subspace f = Subspace::coordinate(3, {0, 1});
    const SampledSet patch =
        gen_graph(f, [](const Vec&) { return Vec(Vec::Zero(3)); }, [](const Vec&) { return Mat(Mat::Zero(3, 2)); },
                  GraphRegion{GraphRegion::Shape::Box, 1.0}, 1.0 / 16);
    const Vec p = patch.point(patch.size() / 2);
    for (double r : {0.8, 0.4, 0.2}) flat.observe(best_plane(patch, p, r, 2).beta);
  }
  c.push(flat);

  auto l32 = c.check(s, "coverage_bound_on_admissible_fixture", 0.0);
  {
    const double h = 1.0 / 32, alpha = 0.1, big_r = 0.5;
    const Subspace f = Subspace::coordinate(3, {0, 1});
    auto zero_u = [](const Vec&) { return Vec(Vec::Zero(3)); };
    auto zero_du = [](const Vec&) { return Mat(Mat::Zero(3, 2)); };
    const GraphRegion box{GraphRegion::Shape::Box, 1.0};
    Vec lift = Vec::Zero(3);
    lift(2) = 0.3;
    const SampledSet two = SampledSet::concat(gen_graph(f, zero_u, zero_du, box, h),
                                              gen_graph(f, zero_u, zero_du, box, h, lift));
    const Vec p = two.point(0) * 0.0 + Vec::Zero(3);
    const ProbeReport pr = admissibility_probe(two, p, f, alpha, 1.0, big_r, 0.5 * kPi, ProbeOptions{0.0, h, 0.25, 2});
    const double step = big_r / 16;
    const double cov = coverage_defect(two, p, f, big_r, step);
    l32.expect(pr.coverage_pass && pr.mass_pass);
    l32.observe(cov - (2 * alpha / std::sqrt(1 + alpha * alpha) + 2 * step / big_r));
  }
  c.push(l32);
}

// ---------------------------------------------------------------------------

void suite_lipgraph(Ctx& c) {
  const std::string s = "lipgraph";
  auto shift = c.check(s, "shift_preserves_trace", 1e-10);
  for (int k = 0; k < 20; ++k) {
    const GraphDescriptor g =
        k % 2 ? fixtures::sin_wave(2, c.uniform(0.05, 0.3), c.uniform(0.5, 3)) : fixtures::polynomial({0, 0.3, -0.5, 0.2}, 1.0);
    const int m = g.m();
    Vec xi(m);
    for (int i = 0; i < m; ++i) xi(i) = c.uniform(-0.8, 0.8);
    const GraphDescriptor h = shift_graph(g, g.point(xi));
    for (int t = 0; t < 20; ++t) {
      Vec eta(m);
      for (int i = 0; i < m; ++i) eta(i) = c.uniform(-1, 1);
      shift.observe((g.point(eta) - h.point(eta - xi)).norm());
    }
  }
  c.push(shift);

  auto tilt = c.check(s, "tilting_coverage", 0.0);
  for (int k = 0; k < 100; ++k) {
    const int m = c.integer(1, 2), n = m + c.integer(1, 2);
    const Subspace f = random_subspace(n, m, c.rng);
    const double lip = c.uniform(0.0, 0.8);
    Vec w(m);
    for (int i = 0; i < m; ++i) w(i) = c.uniform(-1, 1);
    if (w.norm() < 1e-3) w(0) = 1.0;
    const GraphDescriptor g = fixtures::sine_bump(f, lip, w, c.uniform(0, 2 * kPi), c.gaussian(n));
    const double chi = c.uniform(0.0, 0.95 / (1.0 + lip));
    std::vector<double> ang(static_cast<std::size_t>(m), 0.0);
    for (int i = 0; i < std::min(m, n - m); ++i) ang[static_cast<std::size_t>(i)] = std::asin(chi * c.uniform(0.0, 1.0));
    const Subspace gp = subspace_at_angles(f, ang, c.rng);
    const double rho = c.uniform(0.2, 2.0);
    const TiltReport tr = tilting_coverage_check(g, gp, chi, rho, 6);
    tilt.observe(static_cast<double>(tr.failures));
  }
  c.push(tilt);

  auto inter = c.check(s, "intersecting_graphs_inequality", 0.0);
  for (int k = 0; k < 8; ++k) {
    const int n = 3, m = 2;
    const Subspace f = random_subspace(n, m, c.rng);
    const double a = c.uniform(0.3, 1.2);
    const Subspace g = subspace_at_angles(f, {0.0, a}, c.rng);
    const double chi = angle_metric(f, g);
    const double sigma = chi / 8.0 * c.uniform(0.1, 0.9);
    Vec w1(m), w2(m);
    w1 << c.uniform(-1, 1), c.uniform(-1, 1);
    w2 << c.uniform(-1, 1), c.uniform(-1, 1);
    const GraphDescriptor ga = fixtures::sine_bump(f, sigma, w1, c.uniform(0, 6), c.gaussian(n));
    const GraphDescriptor gb = fixtures::sine_bump(g, sigma, w2, c.uniform(0, 6), c.gaussian(n));
    const IntersectionReport rep = intersect_graphs(ga, gb, chi, sigma);
    inter.expect(rep.verified && rep.j <= m - 1 && rep.points.size() >= 2);
  }
  c.push(inter);

  auto c2 = c.check(s, "c2_integrand_bound", 0.0);
  for (int m : {1, 2})
    for (double tau : {1.0, 2.0}) {
      const GraphDescriptor g = fixtures::paraboloid(m, 0.8, 1.0);
      for (int k = 0; k < 1000; ++k) {
        Vec x(m), y(m);
        do {
          for (int i = 0; i < m; ++i) x(i) = c.uniform(-1, 1), y(i) = c.uniform(-1, 1);
        } while (x.norm() >= 1 || y.norm() >= 1 || (x - y).norm() < 1e-6);
        c2.expect(c2_integrand_bound(g, x, y, tau).ok);
      }
    }
  c.push(c2);

  auto sand = c.check(s, "graph_angle_sandwich", 0.0);
  for (double beta : {0.1, 0.3, 0.6})
    for (int k = 0; k < 1000; ++k) {
      const int m = c.integer(1, 2), n = m + c.integer(1, 2);
      const Subspace f = Subspace::coordinate(n, m == 1 ? std::initializer_list<int>{0} : std::initializer_list<int>{0, 1});
      Vec w(m);
      for (int i = 0; i < m; ++i) w(i) = c.uniform(-1, 1);
      if (w.norm() < 1e-3) w(0) = 1.0;
      const GraphDescriptor g = fixtures::sine_bump(f, beta, w, c.uniform(0, 6), c.gaussian(n));
      Vec x(m), y(m);
      for (int i = 0; i < m; ++i) x(i) = c.uniform(-2, 2), y(i) = c.uniform(-2, 2);
      sand.expect(graph_angle_bounds(g, x, y, beta).ok);
    }
  c.push(sand);
}

const std::map<std::string, std::function<void(Ctx&)>>& registry() {
  static const std::map<std::string, std::function<void(Ctx&)>> r{
      {"grassmann", suite_grassmann}, {"conformal", suite_conformal}, {"sampled_sets", suite_sampled_sets},
      {"energy", suite_energy},       {"flatness", suite_flatness},   {"lipgraph", suite_lipgraph}};
  return r;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"grassmann", "conformal", "sampled_sets", "energy", "flatness", "lipgraph"};
  return names;
}

std::vector<PropertyResult> run_check_suite(const std::string& name, std::uint64_t seed, unsigned threads,
                                            const std::string& tamper) {
  std::vector<std::string> todo;
  if (name == "all") {
    todo = suite_names();
  } else {
    require(registry().count(name) > 0, "unknown suite '" + name + "'");
    todo = {name};
  }
  std::vector<PropertyResult> out;
  for (std::size_t k = 0; k < todo.size(); ++k) {
    // Each suite draws from its own stream so that suites are reproducible alone.
    Ctx ctx{std::mt19937_64(seed * 1000003ULL + k + 1), threads, tamper, {}};
    if (name != "all") {
      const auto& names = suite_names();
      ctx.rng.seed(seed * 1000003ULL + static_cast<std::uint64_t>(std::find(names.begin(), names.end(), name) - names.begin()) + 1);
    }
    registry().at(todo[k])(ctx);
    out.insert(out.end(), ctx.out.begin(), ctx.out.end());
  }
  return out;
}

nlohmann::json to_json(const PropertyResult& r) {
  return nlohmann::json{{"suite", r.suite},         {"property", r.property}, {"pass", r.pass()},
                        {"checked", r.checked},     {"failures", r.failures}, {"worst", r.worst},
                        {"tolerance", r.tolerance}};
}

}  // namespace menergy
