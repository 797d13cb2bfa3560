#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "menergy/errors.hpp"
#include "menergy/sampled_set.hpp"
#include "oracles.hpp"

using namespace menergy;

namespace {

constexpr double kPi = oracle::kPi;

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

std::string temp_path(const std::string& name) { return "/tmp/menergy_test_" + name; }

}  // namespace

TEST_CASE("four-point circle") {
  const SampledSet c = gen_circle(1.0, 4);
  REQUIRE(c.size() == 4);
  const Vec expect[4] = {vec({1, 0}), vec({0, 1}), vec({-1, 0}), vec({0, -1})};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK((c.point(i) - expect[i]).norm() < 1e-15);
    CHECK(c.weight(i) == doctest::Approx(kPi / 2));
    // Tangent line is orthogonal to the radius.
    CHECK(std::abs(c.frame(i).frame().col(0).dot(c.point(i))) < 1e-15);
  }
  CHECK_THROWS_AS(gen_circle(1.0, 3), PreconditionError);
}

TEST_CASE("sphere partitions") {
  CHECK(gen_sphere(1.0, 2, 1000).total_weight() == doctest::Approx(4 * kPi).epsilon(1e-6));
  CHECK(gen_sphere(2.0, 1, 100).total_weight() == doctest::Approx(4 * kPi).epsilon(1e-12));
  const SampledSet s = gen_sphere(1.0, 2, 300);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.point(i).norm() == doctest::Approx(1.0));
    CHECK(s.frame(i).project(s.point(i)).norm() < 1e-12);
  }
}

TEST_CASE("ellipse and torus masses") {
  // Perimeter of the (2,1) ellipse via a dense trapezoid rule (spectrally accurate here).
  double per = 0.0;
  const int steps = 100000;
  for (int k = 0; k < steps; ++k) {
    const double t = 2 * kPi * k / steps;
    per += std::hypot(2 * std::sin(t), std::cos(t));
  }
  per *= 2 * kPi / steps;
  CHECK(gen_ellipse(2.0, 1.0, 128).total_weight() == doctest::Approx(per).epsilon(1e-10));
  CHECK(gen_torus(2.0, 0.5, 30, 20).total_weight() == doctest::Approx(4 * kPi * kPi).epsilon(1e-12));
}

TEST_CASE("flat and curved graphs") {
  const Subspace f = Subspace::coordinate(3, {0, 1});
  const double h = 0.1;
  const SampledSet flat = gen_graph(
      f, [](const Vec&) { return Vec(Vec::Zero(3)); }, [](const Vec&) { return Mat(Mat::Zero(3, 2)); },
      GraphRegion{GraphRegion::Shape::Box, 1.0}, h);
  CHECK(flat.size() == 400);
  for (std::size_t i = 0; i < flat.size(); ++i) {
    CHECK(flat.weight(i) == doctest::Approx(h * h));
    CHECK(angle_metric(flat.frame(i), f) < 1e-15);
    CHECK(std::abs(flat.point(i)(2)) < 1e-15);
  }
  auto u = [](const Vec& x) {
    Vec v = Vec::Zero(3);
    v(2) = 0.5 * x.squaredNorm();
    return v;
  };
  auto du = [](const Vec& x) {
    Mat d = Mat::Zero(3, 2);
    d.row(2) = x.transpose();
    return d;
  };
  const SampledSet para = gen_graph(f, u, du, GraphRegion{GraphRegion::Shape::Disk, 1.0}, 0.02);
  CHECK(para.total_weight() == doctest::Approx(2 * kPi / 3 * (std::pow(2.0, 1.5) - 1)).epsilon(0.02));
}

TEST_CASE("wedge layout") {
  const double beta = 1.0;
  const double kappa = wedge_kappa(beta);
  CHECK(kappa == doctest::Approx(1.0 / (4 * std::sqrt(2.0))));
  CHECK((wedge_point_p(beta, 2) - vec({0.25, 0.25, 0})).norm() < 1e-15);
  CHECK((wedge_point_q(beta, 2) - vec({-0.25, 0.25, 0.25})).norm() < 1e-15);
  const SampledSet w = gen_wedge(beta, 3, 4);
  const Vec n_plus = vec({-beta, 1, 0}).normalized();
  const Vec n_minus = vec({beta, 1, 0}).normalized();
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Vec& z = w.point(i);
    // Every sample lies on its own sheet y = β|x|, away from the crease.
    CHECK(std::abs(z(1) - beta * std::abs(z(0))) < 1e-12);
    CHECK(std::abs(z(0)) > 0.0);
    const Vec& nrm = z(0) > 0 ? n_plus : n_minus;
    CHECK((w.frame(i).frame().transpose() * nrm).norm() < 1e-12);
  }
}

TEST_CASE("strand witnesses realize the lemma hypotheses") {
  StrandParams sp;
  for (int par = 0; par < 2; ++par) {
    const StrandWitness w = par ? gen_parallel_sheets(sp) : gen_transversal_sheets(sp);
    const double eps_r = sp.eps * sp.R;
    CHECK((w.q - w.p).norm() < eps_r);
    CHECK(w.hp.project_perp(w.q - w.p).norm() > sp.delta * eps_r);
    CHECK(w.offset == doctest::Approx(w.hp.project_perp(w.q - w.p).norm()));
    CHECK(w.omega == doctest::Approx(153 * sp.delta / 125000.0));
    const double ang = angle_metric(w.hp, w.hq);
    if (par) CHECK(ang < w.angle_threshold);
    else CHECK(ang >= w.angle_threshold);
    CHECK(w.inner_radius == doctest::Approx(sp.eps * eps_r));
    CHECK(w.mass_constant > 0.0);
  }
  StrandParams bad;
  bad.eps = 0.01;
  CHECK_THROWS_AS(gen_parallel_sheets(bad), PreconditionError);
}

TEST_CASE("inversion maps a circle to a tangent-preserving circle") {
  const SampledSet c = gen_circle(1.0, 64);
  const SampledSet img = apply_mobius(c, MobiusMap::inversion(vec({0, 3}), 1.0));
  const Vec center = vec({0, 2.625});
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK((img.point(i) - center).norm() == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(std::abs(img.frame(i).frame().col(0).dot((img.point(i) - center).normalized())) < 1e-8);
  }
}

TEST_CASE("similarity scales weights by the m-th power") {
  const SampledSet t = gen_torus(2.0, 0.5, 10, 8);
  std::mt19937_64 rng(2);
  const MobiusMap sim = MobiusMap::similarity(random_orthogonal(3, rng), 3.0, vec({1, 2, 3}));
  CHECK(apply_mobius(t, sim).total_weight() == doctest::Approx(9.0 * t.total_weight()).epsilon(1e-13));
  CHECK_THROWS_AS(MobiusMap::similarity(Mat::Constant(3, 3, 1.0), 1.0, Vec::Zero(3)), PreconditionError);
}

TEST_CASE("sampled set validation") {
  Mat pts(2, 2);
  pts << 0, 0, 0, 0;
  CHECK_THROWS_AS(SampledSet(2, 1, pts, {}, {}), PreconditionError);
  pts << 0, 1, 0, 0;
  CHECK_THROWS_AS(SampledSet(2, 1, pts, {}, {1.0, -1.0}), PreconditionError);
  CHECK_THROWS_AS(SampledSet(2, 3, pts, {}, {}), PreconditionError);
  const SampledSet ok(2, 1, pts, {}, {});
  CHECK(ok.weight(1) == 1.0);
  CHECK(ok.in_ball(Vec::Zero(2), 1.0).size() == 1);
}

TEST_CASE("file round trip and schema errors") {
  const SampledSet a = gen_sphere(1.0, 2, 50);
  const std::string path = temp_path("roundtrip.json");
  save_sampled_set(a, path);
  const SampledSet b = load_sampled_set(path);
  REQUIRE(b.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a.point(i) - b.point(i)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(std::abs(a.weight(i) - b.weight(i)) <= 1e-15);
    CHECK(angle_metric(a.frame(i), b.frame(i)) <= 1e-15);
  }
  nlohmann::json j = nlohmann::json::parse(to_json(a));
  j.erase("weights");
  CHECK_THROWS_AS(from_json(j.dump()), IoError);
  CHECK_THROWS_AS(from_json("{not json"), IoError);
  CHECK_THROWS_AS(load_sampled_set("/nonexistent/file.json"), IoError);
  nlohmann::json bad = nlohmann::json::parse(to_json(a));
  bad["frames"][0][0] = {2.0, 0.0, 0.0};
  CHECK_THROWS_AS(from_json(bad.dump()), IoError);
  std::remove(path.c_str());
}

TEST_CASE("CSV clouds") {
  const SampledSet s = parse_csv_cloud("0,0\n1,0\n\n0,1\n", 1);
  CHECK(s.size() == 3);
  CHECK_FALSE(s.has_frames());
  CHECK_THROWS_AS(parse_csv_cloud("0,0\n1\n", 1), IoError);
  CHECK_THROWS_AS(parse_csv_cloud("0,x\n", 1), IoError);
  const std::string path = temp_path("cloud.csv");
  {
    std::ofstream f(path);
    f << "0,0,0\n1,0,0\n";
  }
  CHECK(load_sampled_set(path, 2).intrinsic_dim() == 2);
  std::remove(path.c_str());
}
