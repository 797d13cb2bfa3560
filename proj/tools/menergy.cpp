#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "menergy/energy.hpp"
#include "menergy/errors.hpp"
#include "menergy/flatness.hpp"
#include "menergy/lipgraph.hpp"
#include "menergy/suites.hpp"

using namespace menergy;
using nlohmann::json;

namespace {

constexpr int kExitPrecondition = 2;
constexpr int kExitProperty = 3;
constexpr int kExitIo = 4;

/// --threads wins, then MENERGY_THREADS, then the hardware count.
unsigned resolve_threads(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("MENERGY_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw PreconditionError("MENERGY_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void emit(const json& j) { std::cout << j.dump() << '\n'; }

Vec parse_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json frame_json(const Subspace& s) {
  json rows = json::array();
  const Mat f = s.frame();
  for (Eigen::Index c = 0; c < f.cols(); ++c) rows.push_back(vec_json(f.col(c)));
  return rows;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("write failed for '" + path + "'");
}

/// A sample point given either as an index or as coordinates.
Vec pick_point(const SampledSet& s, int index, const std::vector<double>& coords) {
  if (!coords.empty()) {
    require(static_cast<int>(coords.size()) == s.ambient_dim(), "point has the wrong dimension");
    return parse_vec(coords);
  }
  require(index >= 0 && static_cast<std::size_t>(index) < s.size(), "point index out of range");
  return s.point(static_cast<std::size_t>(index));
}

struct Options {
  int threads = 0;
  // grassmann
  std::string frame_a, frame_b;
  // shared set input
  std::string input;
  int csv_dim = 1;
  double tau = 1.0;
  std::string kernel = "ltau";
  std::vector<double> center;
  double radius = 0.0;
  double cutoff = -1.0;
  // flatness
  std::vector<double> radii;
  double delta = 0.1;
  std::string points_text = "all";
  double grid_fraction = 1.0 / 16.0;
  bool fill = false;
  // admissibility
  int point_index = 0;
  std::vector<double> point_coords;
  std::string plane;
  double alpha = 0.1, mconst = 1.0, big_r = 1.0, cmass = 0.0;
  double grid_step = 0.0, match_tol = 0.0, radius_scale = 0.25;
  // lipgraph
  std::string fixture = "paraboloid";
  int m = 2;
  double amplitude = 0.05, frequency = 1.0, tilt = 0.8, sigma = -1.0;
  std::vector<double> coeffs;
  std::vector<double> steps{0.1, 0.05, 0.025};
  // gen
  std::string shape, out;
  int samples = 256, levels = 4, rings = 6, n_u = 50, n_v = 40;
  double a = 2.0, b = 1.0, major = 2.0, minor = 0.5, beta = 1.0, h = 0.05, extent = 1.0, eps = 0.001;
  // check / experiment
  std::string suite = "all", tamper, name, params = "{}", csv_out;
  std::uint64_t seed = 7;
};

GraphDescriptor named_fixture(const Options& o) {
  if (o.fixture == "paraboloid") return fixtures::paraboloid(o.m, o.amplitude, o.extent);
  if (o.fixture == "cone_abs") return fixtures::cone_abs(o.m, o.amplitude);
  if (o.fixture == "sin_wave") return fixtures::sin_wave(o.m, o.amplitude, o.frequency);
  if (o.fixture == "polynomial") return fixtures::polynomial(o.coeffs, o.extent);
  throw PreconditionError("unknown fixture '" + o.fixture + "'");
}

int cmd_grassmann(const Options& o) {
  const Subspace f = frame_from_json_file(o.frame_a), g = frame_from_json_file(o.frame_b);
  require(f.ambient_dim() == g.ambient_dim() && f.dim() == g.dim(), "frames must share n and m");
  const auto pd = principal_angles(f, g);
  emit({{"command", "grassmann angle"},
        {"principal_angles", pd.angles},
        {"angle_metric", angle_metric(f, g)},
        {"combined_angle", combined_angle(f, g)}});
  return 0;
}

int cmd_energy(const Options& o, unsigned threads) {
  const SampledSet s = load_sampled_set(o.input, o.csv_dim);
  EnergyConfig cfg;
  cfg.tau = o.tau;
  cfg.parallel_blocks = threads;
  if (o.kernel == "ks") cfg.kernel = Kernel::KS;
  else require(o.kernel == "ltau", "kernel must be 'ltau' or 'ks'");
  if (o.cutoff >= 0.0) cfg.cutoff = o.cutoff;
  const EnergyReport r = o.center.empty() ? energy(s, cfg) : local_energy(s, parse_vec(o.center), o.radius, cfg);
  emit({{"command", "energy"},
        {"N", s.size()},
        {"tau", cfg.tau},
        {"kernel", o.kernel},
        {"value", r.value},
        {"pairs_used", r.pairs_used},
        {"pairs_skipped", r.pairs_skipped},
        {"cutoff", r.cutoff},
        {"skipped_bound", r.skipped_bound},
        {"max_integrand", r.max_integrand}});
  return 0;
}

int cmd_flatness(const Options& o) {
  SampledSet s = load_sampled_set(o.input, o.csv_dim);
  if (o.fill || !s.has_frames()) s = fill_frames(s, o.radii.empty() ? 0.1 : o.radii.front(), s.intrinsic_dim());
  std::vector<std::size_t> points;
  if (o.points_text != "all") {
    std::stringstream in(o.points_text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      try {
        points.push_back(static_cast<std::size_t>(std::stoul(tok)));
      } catch (const std::exception&) {
        throw PreconditionError("--points expects 'all' or indices, got '" + tok + "'");
      }
    }
  }
  const FlatnessReport rep = reifenberg_report(s, points, o.radii, o.delta, o.grid_fraction);
  for (const FlatnessEntry& e : rep.entries)
    emit({{"point", e.point},
          {"radius", e.radius},
          {"beta", e.beta},
          {"coverage_defect", e.coverage_defect},
          {"theta", e.theta},
          {"grid_step", e.grid_step},
          {"flat", e.flat},
          {"plane", frame_json(e.best_plane)}});
  emit({{"command", "flatness"}, {"delta", rep.delta}, {"verdict", rep.verdict}, {"entries", rep.entries.size()}});
  return rep.verdict ? 0 : kExitProperty;
}

int cmd_admissibility(const Options& o) {
  const SampledSet s = load_sampled_set(o.input, o.csv_dim);
  const Vec p = pick_point(s, o.point_index, o.point_coords);
  Subspace h = Subspace::full(s.ambient_dim());
  if (!o.plane.empty()) h = frame_from_json_file(o.plane);
  else {
    require(o.point_coords.empty() && s.has_frames(), "admissibility: give --plane or a set with frames");
    h = s.frame(static_cast<std::size_t>(o.point_index));
  }
  const ProbeReport r = admissibility_probe(s, p, h, o.alpha, o.mconst, o.big_r, o.cmass,
                                            ProbeOptions{o.grid_step, o.match_tol, o.radius_scale, 2});
  emit({{"command", "admissibility"},
        {"coverage_pass", r.coverage_pass},
        {"mass_pass", r.mass_pass},
        {"grid_points", r.grid_points},
        {"uncovered", r.uncovered},
        {"worst_match", r.worst_match},
        {"worst_mass_ratio", r.worst_mass_ratio},
        {"grid_step", r.grid_step},
        {"radii", r.radii}});
  return r.coverage_pass && r.mass_pass ? 0 : kExitProperty;
}

int cmd_intersect(const Options& o) {
  const GraphDescriptor ga = named_fixture(o);
  const int m = ga.m(), n = ga.n();
  // The second graph is the plane tilted by `tilt` radians in the last coordinate pair.
  Mat frame = ga.base.frame();
  const double t = o.tilt;
  Vec col = Vec::Zero(n);
  col(m - 1) = std::cos(t);
  col(n - 1) = std::sin(t);
  frame.col(m - 1) = col;
  const GraphDescriptor gb = fixtures::linear(Subspace::from_frame(frame), Mat::Zero(n - m, m));
  const double chi = angle_metric(ga.base, gb.base);
  const double sigma = o.sigma >= 0.0 ? o.sigma : ga.lip_bound;
  require(ga.lip_bound <= sigma + 1e-15, "intersect: fixture Lipschitz bound exceeds sigma");
  const IntersectionReport r = intersect_graphs(ga, gb, chi, sigma);
  json pts = json::array();
  for (const Vec& x : r.points) pts.push_back(vec_json(x));
  emit({{"command", "lipgraph intersect"},
        {"fixture", o.fixture},
        {"chi", chi},
        {"sigma", sigma},
        {"j", r.j},
        {"C", r.c},
        {"verified", r.verified},
        {"pairs_checked", r.pairs_checked},
        {"worst_ratio", r.worst_ratio},
        {"points", pts}});
  return r.verified ? 0 : kExitProperty;
}

int cmd_sobolev(const Options& o, unsigned threads) {
  const GraphDescriptor g = named_fixture(o);
  const auto levels = sobolev_sufficiency_check(g, o.tau, o.radius > 0.0 ? o.radius : 0.5, o.steps, threads);
  json rows = json::array();
  for (const auto& l : levels)
    rows.push_back({{"h", l.h}, {"energy", l.energy}, {"seminorm_power", l.seminorm_power}, {"ratio", l.ratio}});
  emit({{"command", "lipgraph sobolev"}, {"fixture", o.fixture}, {"tau", o.tau}, {"levels", rows}});
  return 0;
}

int cmd_gen(const Options& o) {
  SampledSet s = [&]() -> SampledSet {
    if (o.shape == "circle") return gen_circle(o.radius > 0.0 ? o.radius : 1.0, o.samples);
    if (o.shape == "sphere") return gen_sphere(o.radius > 0.0 ? o.radius : 1.0, o.m, o.samples);
    if (o.shape == "ellipse") return gen_ellipse(o.a, o.b, o.samples);
    if (o.shape == "torus") return gen_torus(o.major, o.minor, o.n_u, o.n_v);
    if (o.shape == "wedge") return gen_wedge(o.beta, o.levels, o.rings);
    if (o.shape == "parallel" || o.shape == "transversal") {
      StrandParams sp;
      sp.delta = o.delta;
      sp.eps = o.eps;
      return o.shape == "parallel" ? gen_parallel_sheets(sp).set : gen_transversal_sheets(sp).set;
    }
    if (o.shape == "graph") {
      const GraphDescriptor g = named_fixture(o);
      return gen_graph(g.base, g.u, g.du, GraphRegion{GraphRegion::Shape::Box, o.extent}, o.h, g.anchor);
    }
    throw PreconditionError("unknown shape '" + o.shape + "'");
  }();
  if (o.out.empty()) std::cout << to_json(s) << '\n';
  else save_sampled_set(s, o.out);
  emit({{"command", "gen"}, {"shape", o.shape}, {"N", s.size()}, {"total_weight", s.total_weight()}});
  return 0;
}

int cmd_check(const Options& o, unsigned threads) {
  const auto results = run_check_suite(o.suite, o.seed, threads, o.tamper);
  bool all = true;
  for (const PropertyResult& r : results) {
    emit(to_json(r));
    all = all && r.pass();
  }
  emit({{"suite", o.suite}, {"seed", o.seed}, {"properties", results.size()}, {"pass", all}});
  return all ? 0 : kExitProperty;
}

int cmd_experiment(const Options& o, unsigned threads) {
  json params;
  try {
    params = json::parse(o.params);
  } catch (const json::exception& e) {
    throw PreconditionError(std::string("--params is not valid JSON: ") + e.what());
  }
  const ExperimentResult r = run_experiment(o.name, params, threads);
  emit(r.report);
  if (!o.csv_out.empty()) write_text(o.csv_out, r.csv);
  return r.pass ? 0 : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete Möbius energies, flatness measures and graph lemmas on sampled sets"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "worker threads (0: MENERGY_THREADS or hardware)");

  auto* grass = app.add_subcommand("grassmann", "principal angles between planes");
  auto* angle = grass->add_subcommand("angle", "angles between two frames");
  grass->require_subcommand(1);
  angle->add_option("--a", o.frame_a, "frame JSON file")->required();
  angle->add_option("--b", o.frame_b, "frame JSON file")->required();

  auto* en = app.add_subcommand("energy", "discrete energy of a sampled set");
  en->add_option("--input,--set", o.input, "sampled-set JSON or CSV")->required();
  en->add_option("--m", o.csv_dim, "intrinsic dimension for CSV input");
  en->add_option("--tau", o.tau);
  en->add_option("--kernel", o.kernel, "ltau or ks");
  en->add_option("--center", o.center, "restrict to a ball: center coordinates")->delimiter(',');
  en->add_option("--radius", o.radius, "ball radius with --center");
  en->add_option("--cutoff", o.cutoff, "pair distance cutoff");

  auto* fl = app.add_subcommand("flatness", "beta and theta numbers, Reifenberg verdict");
  fl->add_option("--input,--set,--cloud", o.input, "sampled-set JSON or CSV")->required();
  fl->add_option("--m", o.csv_dim);
  fl->add_option("--radii", o.radii, "decreasing radii")->delimiter(',')->required();
  fl->add_option("--delta", o.delta);
  fl->add_option("--points", o.points_text, "all or comma-separated sample indices");
  fl->add_option("--grid-fraction", o.grid_fraction);
  fl->add_flag("--fill-frames", o.fill, "estimate frames before the report");

  auto* ad = app.add_subcommand("admissibility", "probe the admissibility clauses at a point");
  ad->add_option("--input,--set", o.input, "sampled-set JSON or CSV")->required();
  ad->add_option("--m", o.csv_dim);
  ad->add_option("--point,--p", o.point_index, "sample index");
  ad->add_option("--at", o.point_coords, "point coordinates")->delimiter(',');
  ad->add_option("--plane", o.plane, "frame JSON (default: the sample's frame)");
  ad->add_option("--alpha", o.alpha);
  ad->add_option("--M", o.mconst);
  ad->add_option("--R", o.big_r);
  ad->add_option("--c", o.cmass, "mass constant")->required();
  ad->add_option("--grid-step", o.grid_step);
  ad->add_option("--match-tol", o.match_tol);
  ad->add_option("--radius-scale", o.radius_scale);

  auto* lg = app.add_subcommand("lipgraph", "Lipschitz graph lemmas");
  lg->require_subcommand(1);
  auto add_fixture = [&](CLI::App* c) {
    c->add_option("--fixture", o.fixture, "paraboloid, cone_abs, sin_wave or polynomial");
    c->add_option("--m", o.m);
    c->add_option("--amplitude", o.amplitude, "curvature, slope or amplitude of the fixture");
    c->add_option("--frequency", o.frequency);
    c->add_option("--coeffs", o.coeffs, "polynomial coefficients")->delimiter(',');
    c->add_option("--extent", o.extent, "domain half-width");
  };
  auto* li = lg->add_subcommand("intersect", "fixture graph against a tilted plane");
  add_fixture(li);
  li->add_option("--tilt", o.tilt, "tilt of the second plane in radians");
  li->add_option("--sigma", o.sigma, "Lipschitz bound (default: the fixture's)");
  auto* ls = lg->add_subcommand("sobolev", "energy against the fractional seminorm");
  add_fixture(ls);
  ls->add_option("--tau", o.tau);
  ls->add_option("--r", o.radius);
  ls->add_option("--steps", o.steps)->delimiter(',');

  auto* gen = app.add_subcommand("gen", "write a generated sampled set");
  gen->add_option("--shape", o.shape, "circle sphere ellipse torus wedge parallel transversal graph")->required();
  gen->add_option("--out", o.out, "output path (default stdout)");
  gen->add_option("--N", o.samples);
  gen->add_option("--radius", o.radius);
  gen->add_option("--a", o.a);
  gen->add_option("--b", o.b);
  gen->add_option("--major", o.major);
  gen->add_option("--minor", o.minor);
  gen->add_option("--nu", o.n_u);
  gen->add_option("--nv", o.n_v);
  gen->add_option("--beta", o.beta);
  gen->add_option("--levels", o.levels);
  gen->add_option("--rings", o.rings);
  gen->add_option("--delta", o.delta);
  gen->add_option("--eps", o.eps);
  gen->add_option("--step", o.h, "grid step for graph samples");
  add_fixture(gen);

  auto* chk = app.add_subcommand("check", "run seeded property suites");
  chk->add_option("--suite", o.suite, "suite name or all");
  chk->add_option("--seed", o.seed);
  chk->add_option("--tamper", o.tamper, "property whose tolerance is made unattainable");
  chk->add_option("--threads", o.threads);

  auto* ex = app.add_subcommand("experiment", "run a named experiment");
  ex->add_option("--name", o.name)->required();
  ex->add_option("--params", o.params, "JSON object of parameters");
  ex->add_option("--csv", o.csv_out, "write plot data here");
  ex->add_option("--threads", o.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitPrecondition;
  }

  try {
    const unsigned threads = resolve_threads(o.threads);
    if (*grass) return cmd_grassmann(o);
    if (*en) return cmd_energy(o, threads);
    if (*fl) return cmd_flatness(o);
    if (*ad) return cmd_admissibility(o);
    if (*li) return cmd_intersect(o);
    if (*ls) return cmd_sobolev(o, threads);
    if (*gen) return cmd_gen(o);
    if (*chk) return cmd_check(o, threads);
    if (*ex) return cmd_experiment(o, threads);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
  return kExitPrecondition;
}
