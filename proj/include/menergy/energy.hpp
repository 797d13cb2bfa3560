#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "menergy/conformal.hpp"
#include "menergy/sampled_set.hpp"

namespace menergy {

struct EnergyConfig {
  double tau = 1.0;
  Kernel kernel = Kernel::Ltau;
  /// Pairs closer than the cutoff are skipped. Unset selects the default:
  /// 0 for tau >= 1, twice the mean sample spacing otherwise.
  std::optional<double> cutoff;
  /// Worker count; 0 uses the available hardware parallelism.
  unsigned parallel_blocks = 0;
};

struct EnergyReport {
  double value = 0.0;
  std::uint64_t pairs_used = 0;
  std::uint64_t pairs_skipped = 0;
  /// Largest numerator / |x-y|^{2m} over the pairs used.
  double max_integrand = 0.0;
  double cutoff = 0.0;
  /// Σ w_i w_j / |x_i - x_j|^{2m} over skipped pairs; bounds their contribution.
  double skipped_bound = 0.0;
  EnergyConfig config;
};

struct Ball {
  Vec center;
  double radius = std::numeric_limits<double>::infinity();
};

/// Full ordered double sum over i != j of w_i w_j K(x_i, x_j) / |x_i - x_j|^{2m}.
EnergyReport energy(const SampledSet& s, const EnergyConfig& cfg);
/// Both indices restricted to B_r(center).
EnergyReport local_energy(const SampledSet& s, const Vec& center, double r, const EnergyConfig& cfg);
/// Ordered pairs with μ in ball_a and η in ball_b, kernel K(μ, η, H(μ), H(η)).
EnergyReport cross_energy(const SampledSet& s, const Ball& ball_a, const Ball& ball_b,
                          const EnergyConfig& cfg);
/// Same, on explicit index lists.
EnergyReport cross_energy_indices(const SampledSet& s, const std::vector<std::size_t>& rows,
                                  const std::vector<std::size_t>& cols, const EnergyConfig& cfg);

double default_cutoff(const SampledSet& s, double tau);

double c1_constant(double c_k, double eps, double delta, double tau, int m);
double c2_constant(double c_k, double eps, double delta, double tau, int m);

struct WedgeLevel {
  int level = 0;
  double eps = 0.0;     // κ/2^i
  double value = 0.0;   // cross energy between the two witness balls
  double level_constant = 0.0;  // 0.9 min F_τ(μ,η,e3)/|μ-η|^{2m} / 2^{2mi}
  std::uint64_t pairs = 0;
};

struct WedgeScan {
  double beta = 0.0;
  double kappa = 0.0;
  double constant = 0.0;  // min of the level constants
  double floor = 0.0;     // ω_m² κ^{2m} C
  std::vector<WedgeLevel> levels;
};

/// Per-level cross energies of the crease Σ_β for levels first..last.
WedgeScan wedge_scan(double beta, int first, int last, const EnergyConfig& cfg, int rings = 8);

struct RefinementStudy {
  std::vector<int> sizes;
  std::vector<double> values;
  /// estimate[k] = |values[k] - values[k-1]|, the predicted bound on the next
  /// change under monotone convergence; estimate[0] is infinite.
  std::vector<double> estimate;
  bool stable = true;  // every change stays within the preceding estimate
};

RefinementStudy refinement_study(const std::function<SampledSet(int)>& generator,
                                 const std::vector<int>& sizes, const EnergyConfig& cfg);

}  // namespace menergy
