#include "menergy/energy.hpp"

#include <cmath>

#include "menergy/errors.hpp"
#include "menergy/reduce.hpp"

namespace menergy {

namespace {

struct PairAcc {
  KahanSum value;
  KahanSum skipped;
  std::uint64_t used = 0;
  std::uint64_t skipped_pairs = 0;
  double max_integrand = 0.0;
};

void merge(PairAcc& into, const PairAcc& from) {
  into.value.add(from.value);
  into.skipped.add(from.skipped);
  into.used += from.used;
  into.skipped_pairs += from.skipped_pairs;
  into.max_integrand = std::max(into.max_integrand, from.max_integrand);
}

void validate(const SampledSet& s, const EnergyConfig& cfg) {
  require(cfg.tau > -1.0, "energy: tau must exceed -1");
  require(!cfg.cutoff || *cfg.cutoff >= 0.0, "energy: cutoff must be nonnegative");
  require(s.has_frames(), "energy: the set carries no frames");
  require(s.has_weights(), "energy: the set carries no weights");
  require(s.ambient_dim() <= kMaxAmbientDim && s.intrinsic_dim() <= kMaxIntrinsicDim,
          "energy: dimensions exceed the kernel limits");
}

}  // namespace

double default_cutoff(const SampledSet& s, double tau) {
  if (tau >= 1.0) return 0.0;
  const double mean_w = s.total_weight() / static_cast<double>(s.size());
  return 2.0 * std::pow(mean_w, 1.0 / s.intrinsic_dim());
}

EnergyReport cross_energy_indices(const SampledSet& s, const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& cols, const EnergyConfig& cfg) {
  validate(s, cfg);
  const int n = s.ambient_dim(), m = s.intrinsic_dim();
  const double cutoff = cfg.cutoff ? *cfg.cutoff : default_cutoff(s, cfg.tau);
  const double exponent = cfg.kernel == Kernel::Ltau ? (1.0 + cfg.tau) * m : static_cast<double>(m);
  const double* pts = s.points().data();
  const auto& frames = s.frames();
  const auto& w = s.weights();
  const double cut2 = cutoff * cutoff;

  auto body = [&](std::size_t r, PairAcc& acc) {
    const std::size_t i = rows[r];
    const double* xi = pts + i * static_cast<std::size_t>(n);
    const double* hi = frames[i].frame().data();
    for (std::size_t j : cols) {
      if (j == i) continue;
      const double* xj = pts + j * static_cast<std::size_t>(n);
      double d2 = 0.0;
      for (int k = 0; k < n; ++k) d2 += (xi[k] - xj[k]) * (xi[k] - xj[k]);
      const double dpow = std::pow(d2, m);  // |x-y|^{2m}
      if (d2 < cut2) {
        acc.skipped.add(w[i] * w[j] / dpow);
        ++acc.skipped_pairs;
        continue;
      }
      const double num =
          kernel::pair_numerator(xi, xj, hi, frames[j].frame().data(), n, m, cfg.kernel, exponent);
      if (num < 0.0)
        throw DegeneratePairError("energy: samples " + std::to_string(i) + " and " +
                                  std::to_string(j) + " coincide");
      const double integrand = num / dpow;
      acc.max_integrand = std::max(acc.max_integrand, integrand);
      acc.value.add(w[i] * w[j] * integrand);
      ++acc.used;
    }
  };
  const PairAcc total = chunked_reduce<PairAcc>(rows.size(), resolve_threads(cfg.parallel_blocks),
                                                body, merge);
  EnergyReport rep;
  rep.value = std::max(0.0, total.value.value());
  rep.pairs_used = total.used;
  rep.pairs_skipped = total.skipped_pairs;
  rep.max_integrand = total.max_integrand;
  rep.cutoff = cutoff;
  rep.skipped_bound = total.skipped.value();
  rep.config = cfg;
  return rep;
}

EnergyReport energy(const SampledSet& s, const EnergyConfig& cfg) {
  require(s.size() >= 2, "energy: need at least two samples");
  std::vector<std::size_t> all(s.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return cross_energy_indices(s, all, all, cfg);
}

EnergyReport local_energy(const SampledSet& s, const Vec& center, double r, const EnergyConfig& cfg) {
  require(r > 0.0, "local_energy: radius must be positive");
  const auto idx = std::isinf(r) ? s.in_ball(center, std::numeric_limits<double>::max()) : s.in_ball(center, r);
  return cross_energy_indices(s, idx, idx, cfg);
}

namespace {

std::vector<std::size_t> ball_indices(const SampledSet& s, const Ball& b) {
  if (b.center.size() == 0 || std::isinf(b.radius)) {
    std::vector<std::size_t> all(s.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  return s.in_ball(b.center, b.radius);
}

}  // namespace

EnergyReport cross_energy(const SampledSet& s, const Ball& ball_a, const Ball& ball_b,
                          const EnergyConfig& cfg) {
  return cross_energy_indices(s, ball_indices(s, ball_a), ball_indices(s, ball_b), cfg);
}

double c1_constant(double c_k, double eps, double delta, double tau, int m) {
  require(c_k >= 0.0 && eps > 0.0 && delta > 0.0 && tau > -1.0 && m >= 1, "c1: invalid parameters");
  return c_k * c_k * std::pow(eps, 2 * m) * std::pow(255.0, -2.0 * m) *
         std::pow(delta, (1.0 + tau) * m) / std::pow(10.0, 2.0 * (tau - 1.0) * m);
}

double c2_constant(double c_k, double eps, double delta, double tau, int m) {
  require(c_k >= 0.0 && eps > 0.0 && delta > 0.0 && tau > -1.0 && m >= 1, "c2: invalid parameters");
  return c_k * c_k * std::pow(eps, 4 * m) * std::pow(1.9, (3.0 + tau) * m) /
         std::pow(10.0, 5.0 * (1.0 + tau) * m) * std::pow(delta, (1.0 + tau) * m);
}

WedgeScan wedge_scan(double beta, int first, int last, const EnergyConfig& cfg, int rings) {
  require(beta > 0.0 && first >= 1 && last >= first, "wedge_scan: invalid parameters");
  const SampledSet s = gen_wedge(beta, last, rings);
  WedgeScan out;
  out.beta = beta;
  out.kappa = wedge_kappa(beta);
  const int m = 2;
  Vec e3 = Vec::Zero(3);
  e3(2) = 1.0;
  out.constant = std::numeric_limits<double>::infinity();
  for (int i = first; i <= last; ++i) {
    WedgeLevel lv;
    lv.level = i;
    lv.eps = out.kappa / std::ldexp(1.0, i);
    const Vec p = wedge_point_p(beta, i), q = wedge_point_q(beta, i);
    const auto mu = s.in_ball(q, lv.eps);
    const auto eta = s.in_ball(p, lv.eps);
    const EnergyReport r = cross_energy_indices(s, mu, eta, cfg);
    lv.value = r.value;
    lv.pairs = r.pairs_used;
    double fmin = std::numeric_limits<double>::infinity();
    for (std::size_t a : mu)
      for (std::size_t b : eta) {
        const Vec x = s.point(a), y = s.point(b);
        const double d2m = std::pow((x - y).squaredNorm(), m);
        fmin = std::min(fmin, pointwise_ftau(x, y, s.frame(b), e3, cfg.tau) / d2m);
      }
    lv.level_constant = 0.9 * fmin / std::ldexp(1.0, 2 * m * i);
    out.constant = std::min(out.constant, lv.level_constant);
    out.levels.push_back(lv);
  }
  const double omega2 = 3.14159265358979323846;
  out.floor = omega2 * omega2 * std::pow(out.kappa, 2 * m) * out.constant;
  return out;
}

RefinementStudy refinement_study(const std::function<SampledSet(int)>& generator,
                                 const std::vector<int>& sizes, const EnergyConfig& cfg) {
  require(sizes.size() >= 2, "refinement_study: need at least two sizes");
  RefinementStudy st;
  st.sizes = sizes;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    st.values.push_back(energy(generator(sizes[k]), cfg).value);
    if (k == 0) {
      st.estimate.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    const double change = std::abs(st.values[k] - st.values[k - 1]);
    const double floor = 1e-12 * std::max(1.0, std::abs(st.values[k]));
    if (change > st.estimate[k - 1] + floor) st.stable = false;
    st.estimate.push_back(change);
  }
  return st;
}

}  // namespace menergy
