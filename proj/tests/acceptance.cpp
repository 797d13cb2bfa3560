// Acceptance run: one PASS/FAIL line per criterion with the measured margin.
// Tolerances are fixed here; nothing is read from the environment.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <sys/wait.h>

#include "menergy/energy.hpp"
#include "menergy/flatness.hpp"
#include "menergy/lipgraph.hpp"
#include "menergy/suites.hpp"
#include "oracles.hpp"

using namespace menergy;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Vec gaussian(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

double uniform(std::mt19937_64& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

std::vector<double> angles_up_to(std::mt19937_64& rng, int n, int m, double max_sin) {
  std::vector<double> a(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < std::min(m, n - m); ++i) a[static_cast<std::size_t>(i)] = std::asin(max_sin * uniform(rng, 0, 1));
  return a;
}

constexpr unsigned kThreads = 1;

// 1 -------------------------------------------------------------------------
Outcome angle_metric_equivalence() {
  const double tol = 1e-10;
  std::mt19937_64 rng(101);
  double worst = 0.0, worst_oracle = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + static_cast<int>(rng() % 8), m = 1 + static_cast<int>(rng() % std::min(4, n));
    const Subspace f = random_subspace(n, m, rng), g = random_subspace(n, m, rng);
    const double am = angle_metric(f, g);
    worst = std::max(worst, std::abs(am - std::sin(principal_angles(f, g).angles.back())));
    worst_oracle = std::max(worst_oracle, std::abs(am - oracle::angle_metric(f.frame(), g.frame())));
  }
  return {worst <= tol && worst_oracle <= tol,
          fmt("max|metric-sin(max angle)|=%.2e, vs eigen oracle %.2e, tol %.0e", worst, worst_oracle, tol)};
}

// 2, 3, 4, 5, 6, 11 ---------------------------------------------------------
Outcome experiment(const std::string& name, const std::function<std::string(const nlohmann::json&)>& describe) {
  const ExperimentResult r = run_experiment(name, nlohmann::json::object(), kThreads);
  return {r.pass, describe(r.report)};
}

// 7 -------------------------------------------------------------------------
Outcome cone_lemma() {
  std::mt19937_64 rng(107);
  int failures = 0;
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + static_cast<int>(rng() % 5), m = 1 + static_cast<int>(rng() % (n - 1));
    const Subspace f = random_subspace(n, m, rng);
    const double sigma = uniform(rng, 0.0, 3.0);
    // Condition (1 + σ)χ < 1.
    const double chi = uniform(rng, 0.0, 0.999 / (1.0 + sigma));
    std::vector<double> ang = angles_up_to(rng, n, m, chi);
    ang[0] = std::asin(chi);
    const Subspace g = subspace_at_angles(f, ang, rng);
    const Vec p = gaussian(rng, n);
    const Vec a = f.project(gaussian(rng, n));
    Vec b = f.project_perp(gaussian(rng, n));
    if (b.norm() > 0) b *= sigma * a.norm() * uniform(rng, 0.0, 1.0) / b.norm();
    if (!cone_contains(p, cone_lemma_bound(chi, sigma), g, p + a + b)) ++failures;
  }
  return {failures == 0, fmt("%.0f containment failures over 10000 draws", failures)};
}

// 8 -------------------------------------------------------------------------
Outcome tilting() {
  std::mt19937_64 rng(108);
  std::size_t failures = 0;
  double worst_rel = 0.0;
  for (int k = 0; k < 100; ++k) {
    const int m = 1 + static_cast<int>(rng() % 2), n = m + 1 + static_cast<int>(rng() % 2);
    const Subspace f = random_subspace(n, m, rng);
    const double lip = uniform(rng, 0.0, 0.8);
    Vec w = gaussian(rng, m);
    const GraphDescriptor g = fixtures::sine_bump(f, lip, w, uniform(rng, 0, 6.2), gaussian(rng, n));
    const double chi = uniform(rng, 0.0, 0.95 / (1.0 + lip));
    const Subspace gp = subspace_at_angles(f, angles_up_to(rng, n, m, chi), rng);
    const double rho = uniform(rng, 0.2, 2.0);
    const TiltReport tr = tilting_coverage_check(g, gp, chi, rho, 8);
    failures += tr.failures;
    worst_rel = std::max(worst_rel, tr.worst_residual / rho);
  }
  return {failures == 0 && worst_rel <= 1e-6,
          fmt("%.0f failures over 100 draws, worst residual/rho %.2e (tol 1e-6)", double(failures), worst_rel)};
}

// 9 -------------------------------------------------------------------------
Outcome intersecting() {
  std::mt19937_64 rng(109);
  int bad = 0, too_big_j = 0;
  std::size_t pairs = 0;
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int kind = k % 3;
    const int n = kind == 0 ? 2 : (kind == 1 ? 3 : 4), m = n - 1;
    const Subspace f = random_subspace(n, m, rng);
    std::vector<double> ang(static_cast<std::size_t>(m), 0.0);
    ang.back() = uniform(rng, 0.3, 1.3);
    const Subspace g = subspace_at_angles(f, ang, rng);
    const double chi = std::min(angle_metric(f, g), 0.999);
    const double sigma = chi / 8.0 * uniform(rng, 0.05, 0.95);
    const Vec nu_f = Subspace::from_frame(f.complement_frame()).frame().col(0);
    const Vec nu_g = Subspace::from_frame(g.complement_frame()).frame().col(0);
    const GraphDescriptor ga = fixtures::sine_bump(f, sigma, gaussian(rng, m), uniform(rng, 0, 6), nu_f);
    const GraphDescriptor gb = fixtures::sine_bump(g, sigma, gaussian(rng, m), uniform(rng, 0, 6), nu_g);
    const IntersectionReport r = intersect_graphs(ga, gb, chi, sigma);
    if (!r.verified) ++bad;
    if (r.j > m - 1) ++too_big_j;
    pairs += r.pairs_checked;
    worst = std::max(worst, r.worst_ratio);
  }
  return {bad == 0 && too_big_j == 0,
          fmt("20 fixtures, %.0f pairs, worst |PiY|/(C|PiX|) = %.3f, violations %.0f", double(pairs), worst,
              double(bad + too_big_j))};
}

// 10 ------------------------------------------------------------------------
Outcome c2_bound() {
  std::mt19937_64 rng(110);
  int failures = 0;
  double worst = 0.0;
  const std::array<std::pair<int, double>, 3> cases{{{1, 1.0}, {1, 2.0}, {2, 1.0}}};
  for (const auto& [m, tau] : cases) {
    const GraphDescriptor g = fixtures::paraboloid(m, 0.8, 1.0);
    for (int k = 0; k < 1000; ++k) {
      Vec x(m), y(m);
      do {
        for (int i = 0; i < m; ++i) x(i) = uniform(rng, -1, 1), y(i) = uniform(rng, -1, 1);
      } while (x.norm() >= 1.0 || y.norm() >= 1.0 || (x - y).norm() < 1e-9);
      const C2Check c = c2_integrand_bound(g, x, y, tau);
      if (!c.ok) ++failures;
      if (c.rhs > 0) worst = std::max(worst, c.lhs / c.rhs);
    }
  }
  return {failures == 0, fmt("%.0f failures over 3000 pairs, max lhs/rhs %.3e", failures, worst)};
}

// 12 ------------------------------------------------------------------------
Outcome flatness_oracle() {
  std::mt19937_64 rng(112);
  double worst = 0.0;
  bool theta_exact = true;
  for (int k = 0; k < 25; ++k) {
    const int n = 2 + k % 2, m = n == 2 ? 1 : 1 + (k / 2) % 2;
    const int count = 6 + static_cast<int>(rng() % 35);
    Mat pts(n, count);
    const Vec dir = gaussian(rng, n).normalized();
    const Vec dir2 = gaussian(rng, n).normalized();
    const double noise = uniform(rng, 0.01, 0.5);
    for (int i = 0; i < count; ++i) {
      Vec z = uniform(rng, -1, 1) * dir + noise * gaussian(rng, n) * 0.5;
      if (m == 2) z += uniform(rng, -1, 1) * dir2;
      pts.col(i) = z;
    }
    const SampledSet s(n, m, pts, {}, {});
    const Vec p = Vec::Zero(n);
    const double r = 2.5;
    const BestPlane bp = best_plane(s, p, r, m);
    worst = std::max(worst, std::abs(bp.beta - oracle::best_beta(pts, p, r, m)));
    const double step = r / 16;
    const double th = theta(s, p, bp.plane, r, step);
    theta_exact = theta_exact && th == std::max(beta_wrt_plane(s, p, bp.plane, r), coverage_defect(s, p, bp.plane, r, step));
  }
  return {worst <= 1e-3 && theta_exact,
          fmt("25 clouds: max|beta-oracle| = %.2e (tol 1e-3), theta exact: ", worst) + (theta_exact ? "yes" : "no")};
}

// 13 ------------------------------------------------------------------------
Outcome admissibility() {
  const double h = 1.0 / 32, alpha = 0.1, big_r = 0.5;
  const Subspace f = Subspace::coordinate(3, {0, 1});
  auto zero_u = [](const Vec&) { return Vec(Vec::Zero(3)); };
  auto zero_du = [](const Vec&) { return Mat(Mat::Zero(3, 2)); };
  const GraphRegion box{GraphRegion::Shape::Box, 1.0};
  const SampledSet two = SampledSet::concat(gen_graph(f, zero_u, zero_du, box, h),
                                            gen_graph(f, zero_u, zero_du, box, h, vec({0, 0, 0.3})));
  const Vec p = Vec::Zero(3);
  const ProbeReport pr = admissibility_probe(two, p, f, alpha, 1.0, big_r, 0.5 * oracle::kPi, {0.0, h, 0.25, 2});
  const double step = big_r / 16;
  const double cov = coverage_defect(two, p, f, big_r, step);
  const double bound = 2 * alpha / std::sqrt(1 + alpha * alpha) + 2 * step / big_r;
  return {pr.coverage_pass && pr.mass_pass && cov < bound,
          fmt("coverage clause %.0f, mass clause %.0f, defect %.4f", pr.coverage_pass, pr.mass_pass, cov) +
              fmt(" < bound %.4f", bound)};
}

// 14 ------------------------------------------------------------------------
std::string capture(const std::string& cmd, int& code) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    code = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

Outcome determinism(const std::string& cli) {
  if (cli.empty()) return {false, "no --cli path given"};
  int c1 = 0, c2 = 0, c3 = 0;
  const std::string base = cli + " check --suite all --seed 7 --threads ";
  const std::string a = capture(base + "1", c1), b = capture(base + "1", c2), c = capture(base + "4", c3);
  const bool same = !a.empty() && a == b && a == c;
  return {same && c1 == 0 && c2 == 0 && c3 == 0,
          std::string("reports identical across runs and threads {1,4}: ") + (same ? "yes" : "no") +
              fmt(", %.0f bytes, exit code sum %.0f", double(a.size()), double(c1 + c2 + c3))};
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

  using J = nlohmann::json;
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "angle metric equals sine of largest principal angle", 5, angle_metric_equivalence},
      {2, "inequality chains on the sampled torus", 60,
       [] {
         return experiment("comparison_chain", [](const J& r) {
           return fmt("%.0f ordered pairs, violations sine %.0f / kernel %.0f", r["pairs"].get<double>(),
                      r["sine_chain_violations"].get<double>(), r["kernel_chain_violations"].get<double>()) +
                  fmt(", E=%.4f E_KS=%.4f", r["energy"].get<double>(), r["energy_ks"].get<double>());
         });
       }},
      {3, "round circle and sphere have vanishing energy", 60,
       [] {
         return experiment("circle_zero", [](const J& r) {
           return fmt("circle(512) %.2e <= 1e-10, sphere(2000) %.2e <= 1e-8", r["circle_energy"].get<double>(),
                      r["sphere_energy"].get<double>());
         });
       }},
      {4, "energy invariance under inversion and similarity", 60,
       [] {
         return experiment("mobius_invariance", [](const J& r) {
           return fmt("inversion rel diff %.2e (tol 2e-2), similarity %.2e (tol 1e-10)",
                      r["inversion_rel_diff"].get<double>(), r["similarity_rel_diff"].get<double>());
         });
       }},
      {5, "wedge cross energies stay above the per-level floor", 120,
       [] {
         return experiment("wedge_divergence", [](const J& r) {
           double lo = 1e300;
           for (const auto& l : r["levels"]) lo = std::min(lo, l["value"].get<double>());
           return fmt("levels 3..8, min level energy %.4e vs floor %.4e, partial sum %.4e", lo,
                      r["floor"].get<double>(), r["levels"].back()["partial_sum"].get<double>());
         });
       }},
      {6, "strand witnesses exceed c1 and c2, with c2 < c1", 120,
       [] {
         return experiment("strand_bounds", [](const J& r) {
           const auto& par = r["cases"][0];
           const auto& tra = r["cases"][1];
           return fmt("parallel E=%.3e > c1=%.3e; ", par["energy"].get<double>(), par["bound"].get<double>()) +
                  fmt("transversal E=%.3e > c2=%.3e; ", tra["energy"].get<double>(), tra["bound"].get<double>()) +
                  fmt("c2/c1 = %.3e", r["c2_unit"].get<double>() / r["c1_unit"].get<double>());
         });
       }},
      {7, "cone lemma containment", 5, cone_lemma},
      {8, "tilting lemma coverage", 60, tilting},
      {9, "intersecting Lipschitz graphs inequality", 60, intersecting},
      {10, "C2 integrand bound", 30, c2_bound},
      {11, "fractional seminorm exactness and sufficiency ratio", 60,
       [] {
         return experiment("sobolev_sufficiency", [](const J& r) {
           return fmt("closed form error %.2e (tol 1e-3), ratio drift %.3f (tol 0.2)", r["exact_error"].get<double>(),
                      r["ratio_drift"].get<double>());
         });
       }},
      {12, "best plane matches the brute-force grid", 120, flatness_oracle},
      {13, "admissibility probe on two parallel sheets", 60, admissibility},
      {14, "check reports are deterministic", 600, [&cli] { return determinism(cli); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("[%s] %2d %s: %s; %.2fs (budget %.0fs)\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs,
                c.budget_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
