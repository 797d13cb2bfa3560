#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "menergy/errors.hpp"
#include "menergy/sampled_set.hpp"

namespace menergy {

/// sup over samples y in B_r(p) of dist(y, (p+F) ∩ B_r(p)) / r.
double beta_wrt_plane(const SampledSet& s, const Vec& p, const Subspace& f, double r);

/// sup over a grid of the disk (p+F) ∩ B_r(p) of dist(ξ, samples in B_r(p)) / r.
/// The grid step must not exceed r/16. An empty ball yields 1.
double coverage_defect(const SampledSet& s, const Vec& p, const Subspace& f, double r, double grid_step);

/// max(beta_wrt_plane, coverage_defect).
double theta(const SampledSet& s, const Vec& p, const Subspace& f, double r, double grid_step);

struct BestPlane {
  Subspace plane;
  double beta = 0.0;
  std::size_t samples = 0;
};

/// Plane through p minimizing beta_wrt_plane over B_r(p).
BestPlane best_plane(const SampledSet& s, const Vec& p, double r, int m);

struct FlatnessEntry {
  std::size_t point = 0;
  double radius = 0.0;
  double beta = 0.0;
  double coverage_defect = 0.0;
  double theta = 0.0;
  double grid_step = 0.0;
  Subspace best_plane;
  bool flat = false;  // theta <= delta
};

struct FlatnessReport {
  std::vector<FlatnessEntry> entries;
  double delta = 0.0;
  bool verdict = false;  // flat at every probed point and scale
};

/// `grid_fraction` sets the coverage grid step to r * grid_fraction.
FlatnessReport reifenberg_report(const SampledSet& s, const std::vector<std::size_t>& points,
                                 const std::vector<double>& radii, double delta,
                                 double grid_fraction = 1.0 / 16.0);

struct ProbeOptions {
  double grid_step = 0.0;      // 0 selects R/16
  double match_tol = 0.0;      // 0 selects the grid step
  double radius_scale = 0.25;  // largest probed mass radius is R * radius_scale
  int dyadic_levels = 2;
};

struct ProbeReport {
  bool coverage_pass = false;
  bool mass_pass = false;
  std::size_t grid_points = 0;
  std::size_t uncovered = 0;
  double worst_match = 0.0;       // largest |Π(η_x) - x| over the grid
  double worst_mass_ratio = 0.0;  // smallest mass / (c r^m)
  double grid_step = 0.0;
  std::vector<double> radii;
};

ProbeReport admissibility_probe(const SampledSet& s, const Vec& p, const Subspace& h, double alpha, double m_const,
                                double big_r, double c, const ProbeOptions& opt = {});

struct InjectivityReport {
  bool injective = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  bool hypothesis_held = false;  // ∢(H(η), F) + δ < 1 at every sample in the ball
  double max_angle = 0.0;
  std::size_t samples = 0;
};

/// Samples whose projections onto p+F lie within `collision_tol` of each other
/// count as a collision. 0 selects 1e-9 r.
InjectivityReport injectivity_check(const SampledSet& s, const Vec& p, const Subspace& f, double r,
                                    double delta, double collision_tol = 0.0);

class NotAGraphError : public PreconditionError {
 public:
  NotAGraphError(const std::string& what, std::size_t a, std::size_t b)
      : PreconditionError(what), first(a), second(b) {}
  std::size_t first, second;
};

struct LocalGraph {
  Subspace plane;            // G_p
  Vec anchor;                // p
  std::vector<std::size_t> samples;
  std::vector<Vec> sites;    // F-coordinates of Π_{G_p}(q - p)
  std::vector<Vec> values;   // Π_{G_p⊥}(q - p)
  double lip = 0.0;          // max difference quotient over sample pairs
};

/// Discrete graph representation of the samples in B_{r/2}(p) over G_p, fitted on
/// B_r(p) unless `pinned` is given.
LocalGraph extract_local_graph(const SampledSet& s, const Vec& p, double r, double delta,
                               const std::optional<Subspace>& pinned = std::nullopt);

/// Attaches best-fit planes over B_r(sample) to a point cloud.
SampledSet fill_frames(const SampledSet& s, double r, int m);

}  // namespace menergy
