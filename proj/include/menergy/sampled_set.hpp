#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "menergy/grassmann.hpp"

namespace menergy {

/// Weighted discrete surrogate of an m-dimensional set in R^n: points, mock
/// tangent planes, and the m-dimensional Hausdorff mass carried by each sample.
/// Frames and weights may be absent for raw point clouds.
class SampledSet {
 public:
  SampledSet(int ambient_dim, int intrinsic_dim, Mat points, std::vector<Subspace> frames,
             std::vector<double> weights, std::vector<std::string> labels = {});

  int ambient_dim() const { return ambient_dim_; }
  int intrinsic_dim() const { return intrinsic_dim_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }

  const Mat& points() const { return points_; }
  Vec point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }

  bool has_frames() const { return !frames_.empty(); }
  bool has_weights() const { return !weights_.empty(); }
  const std::vector<Subspace>& frames() const { return frames_; }
  const Subspace& frame(std::size_t i) const { return frames_.at(i); }
  const std::vector<double>& weights() const { return weights_; }
  /// Sample weight, or 1 when the set carries no weights.
  double weight(std::size_t i) const { return weights_.empty() ? 1.0 : weights_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }

  double total_weight() const;
  /// Indices of samples in the open ball B_r(center).
  std::vector<std::size_t> in_ball(const Vec& center, double r) const;
  /// Weight carried by samples in B_r(center).
  double mass_in_ball(const Vec& center, double r) const;

  SampledSet with_frames(std::vector<Subspace> frames) const;
  SampledSet subset(const std::vector<std::size_t>& indices) const;
  /// Disjoint union of two sets of equal dimensions.
  static SampledSet concat(const SampledSet& a, const SampledSet& b);

 private:
  int ambient_dim_;
  int intrinsic_dim_;
  Mat points_;
  std::vector<Subspace> frames_;
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

/// A similarity x -> s Q x + t, or the sphere inversion x -> c + ρ²(x-c)/|x-c|².
class MobiusMap {
 public:
  enum class Kind { Similarity, Inversion };

  static MobiusMap similarity(Mat orthogonal, double scale, Vec translation);
  static MobiusMap inversion(Vec center, double radius);

  Kind kind() const { return kind_; }
  Vec apply(const Vec& x) const;
  /// Image of a frame under the differential at x, without renormalization.
  Mat push_frame(const Vec& x, const Mat& frame) const;
  /// |DT(x)| as a multiple of an isometry.
  double conformal_factor(const Vec& x) const;
  MobiusMap inverse() const;

 private:
  MobiusMap() = default;
  Kind kind_ = Kind::Similarity;
  Mat q_;
  double scale_ = 1.0;
  Vec translation_;
  Vec center_;
  double radius_ = 1.0;
};

SampledSet apply_mobius(const SampledSet& s, const MobiusMap& t);

/// Accumulates samples; used by the generators.
class SampleBuilder {
 public:
  SampleBuilder(int ambient_dim, int intrinsic_dim) : n_(ambient_dim), m_(intrinsic_dim) {}
  void add(const Vec& point, const Subspace& frame, double weight, std::string label = {});
  /// Appends an area-exact flat patch of dimension 1 or 2 around `center` in
  /// the affine plane center + plane. `ring_radii` starts at 0; ring k spans
  /// [ring_radii[k], ring_radii[k+1]], so the samples inside any ball
  /// B_{ring_radii[k]}(center) carry exactly its m-dimensional measure.
  void add_flat_patch(const Vec& center, const Subspace& plane, const std::vector<double>& ring_radii,
                      const std::string& label = {});
  std::size_t size() const { return weights_.size(); }
  SampledSet build() const;

 private:
  int n_, m_;
  std::vector<Vec> points_;
  std::vector<Subspace> frames_;
  std::vector<double> weights_;
  std::vector<std::string> labels_;
};

/// Ring radii: `uniform_rings` equal rings out to `inner`, then geometric
/// growth by `ratio` until `outer` is reached (the last boundary is `outer`).
std::vector<double> graded_rings(double inner, int uniform_rings, double outer, double ratio);

SampledSet gen_circle(double radius, int n_samples);
/// Round m-sphere in R^{m+1}, m in {1, 2}; m = 2 uses a Fibonacci lattice.
SampledSet gen_sphere(double radius, int m, int n_samples);
SampledSet gen_ellipse(double a, double b, int n_samples);
/// Torus of revolution about e3 on an n_u x n_v parameter grid with exact
/// per-cell area weights.
SampledSet gen_torus(double major, double minor, int n_u, int n_v);

using GraphMap = std::function<Vec(const Vec&)>;       // F-coords -> ambient vector in F⊥
using GraphJacobian = std::function<Mat(const Vec&)>;  // F-coords -> n x m, columns in F⊥

struct GraphRegion {
  enum class Shape { Box, Disk };
  Shape shape = Shape::Box;
  double extent = 1.0;  // half-width of the box or radius of the disk
};

/// Samples anchor + ξ + u(ξ) on a cell-centred grid over the region in F.
SampledSet gen_graph(const Subspace& f, const GraphMap& u, const GraphJacobian& du,
                     const GraphRegion& region, double h, const Vec& anchor = Vec());

/// Opening constant κ(β) = β/(4√(1+β²)) of the wedge witness balls.
double wedge_kappa(double beta);
Vec wedge_point_p(double beta, int level);
Vec wedge_point_q(double beta, int level);

/// The crease Σ_β = {x e1 + β|x| e2 + y e3} sampled by area-exact disks of
/// radius 2κ/2^i around p_i (side x > 0) and q_i (side x < 0), i = 1..levels.
/// `rings` equal rings cover each inner radius κ/2^i.
SampledSet gen_wedge(double beta, int levels, int rings);

/// Σ_β on the grid x, y in [-half_width, half_width] with the band
/// |x| < band removed; labels "+" / "-" by side.
SampledSet gen_wedge_grid(double beta, double half_width, double h, double band);

struct StrandParams {
  double delta = 0.5;
  double eps = 0.001;        // at most delta/500
  double R = 1.0;
  double alpha = 0.0;        // 0 selects delta/200
  double M = 1.0;
  double plane_angle = 0.0;  // ∢(H(p), H(q)) of the second sheet
  int m = 2;
};

/// Two flat sheets realizing the hypotheses of the strand lemmas: p on sheet 1
/// at the origin, q on sheet 2 with dist(q, p + H(p)) > δεR and |q - p| < εR.
struct StrandWitness {
  SampledSet set;
  Vec p, q;
  Subspace hp, hq;
  StrandParams params;
  double omega = 0.0;          // 153δ/50³
  double angle_threshold = 0.0;  // ω(δ) + 2Mα
  double offset = 0.0;         // dist(q, p + H(p))
  double inner_radius = 0.0;   // radius of the ball around q
  double outer_radius = 0.0;   // radius of the ball around p
  double mass_constant = 0.0;  // c_K measured on the sample weights
};

StrandWitness gen_parallel_sheets(StrandParams params);
StrandWitness gen_transversal_sheets(StrandParams params);

/// min over (center, r) of mass(B_r(center)) / r^m.
double measured_mass_constant(const SampledSet& s, const std::vector<std::pair<Vec, double>>& balls);

// I/O

std::string to_json(const SampledSet& s);
SampledSet from_json(const std::string& text);
SampledSet load_sampled_set(const std::string& path, int intrinsic_dim_for_csv = 1);
void save_sampled_set(const SampledSet& s, const std::string& path);
SampledSet parse_csv_cloud(const std::string& text, int intrinsic_dim);

/// Frames as rows of a JSON array of arrays.
Subspace frame_from_json_file(const std::string& path);

}  // namespace menergy
