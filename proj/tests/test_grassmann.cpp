#include <random>

#include "doctest.h"
#include "menergy/errors.hpp"
#include "menergy/grassmann.hpp"
#include "oracles.hpp"

using namespace menergy;

namespace {

Mat cols(int n, std::initializer_list<std::initializer_list<double>> vs) {
  Mat m(n, static_cast<Eigen::Index>(vs.size()));
  Eigen::Index c = 0;
  for (const auto& v : vs) {
    Eigen::Index r = 0;
    for (double x : v) m(r++, c) = x;
    ++c;
  }
  return m;
}

Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("projector of coordinate and diagonal lines") {
  CHECK((projector(Subspace::coordinate(2, {0})) - cols(2, {{1, 0}, {0, 0}})).norm() < 1e-15);
  CHECK((projector(Subspace::full(2)) - Mat::Identity(2, 2)).norm() < 1e-15);
  const Subspace diag = Subspace::span(cols(2, {{1, 1}}));
  CHECK((projector(diag) - Mat::Constant(2, 2, 0.5)).norm() < 1e-15);
}

TEST_CASE("affine projection") {
  const Subspace e1 = Subspace::coordinate(2, {0});
  CHECK((affine_project(Vec::Zero(2), e1, vec({3, 4})) - vec({3, 0})).norm() < 1e-15);
  CHECK((affine_project(vec({1, 1}), e1, vec({3, 4})) - vec({3, 1})).norm() < 1e-15);
  CHECK((affine_project(vec({1, 1}), e1, vec({5, 1})) - vec({5, 1})).norm() < 1e-15);
}

TEST_CASE("angle metric examples") {
  const Subspace e1 = Subspace::coordinate(2, {0});
  CHECK(angle_metric(e1, e1) == doctest::Approx(0.0));
  CHECK(angle_metric(e1, Subspace::coordinate(2, {1})) == doctest::Approx(1.0).epsilon(1e-15));
  const Subspace tilted = Subspace::span(cols(2, {{std::cos(0.3), std::sin(0.3)}}));
  // Reference: sup of |(P_F - P_G)v| over a fine grid on the unit circle.
  double sup = 0.0;
  const Mat d = projector(e1) - projector(tilted);
  for (int k = 0; k < 200000; ++k) {
    const double t = oracle::kPi * k / 200000;
    sup = std::max(sup, (d * vec({std::cos(t), std::sin(t)})).norm());
  }
  CHECK(angle_metric(e1, tilted) == doctest::Approx(sup).epsilon(1e-9));
  CHECK(angle_metric(e1, tilted) == doctest::Approx(0.29552020666133955).epsilon(1e-14));
}

TEST_CASE("principal angles examples") {
  const Subspace f = Subspace::coordinate(4, {0, 1});
  const Subspace g = Subspace::span(cols(4, {{1, 0, 0, 0}, {0, std::cos(0.5), std::sin(0.5), 0}}));
  const auto pd = principal_angles(f, g);
  REQUIRE(pd.angles.size() == 2);
  CHECK(pd.angles[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(pd.angles[1] == doctest::Approx(0.5).epsilon(1e-14));
  const auto orth = principal_angles(f, Subspace::coordinate(4, {2, 3}));
  CHECK(orth.angles[0] == doctest::Approx(oracle::kPi / 2));
  CHECK(orth.angles[1] == doctest::Approx(oracle::kPi / 2));
  for (double a : principal_angles(f, f).angles) CHECK(a == doctest::Approx(0.0));
}

TEST_CASE("principal angles and metric agree with dense oracles") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 400; ++k) {
    const int n = 2 + k % 7, m = 1 + k % std::min(4, n - 1);
    const Subspace f = random_subspace(n, m, rng), g = random_subspace(n, m, rng);
    const auto mine = principal_angles(f, g).angles;
    const auto ref = oracle::principal_angles(f.frame(), g.frame());
    for (std::size_t i = 0; i < mine.size(); ++i) CHECK(std::abs(mine[i] - ref[i]) < 1e-7);
    CHECK(std::abs(angle_metric(f, g) - oracle::angle_metric(f.frame(), g.frame())) < 1e-12);
    CHECK(std::abs(std::cos(combined_angle(f, g)) - oracle::cos_product(f.frame(), g.frame())) < 1e-12);
  }
}

TEST_CASE("small angles keep relative precision") {
  std::mt19937_64 rng(3);
  const Subspace f = random_subspace(5, 2, rng);
  for (double a : {1e-4, 1e-8, 1e-12}) {
    const Subspace g = subspace_at_angles(f, {a, 0.5 * a}, rng);
    CHECK(angle_metric(f, g) == doctest::Approx(std::sin(a)).epsilon(1e-8));
    CHECK(principal_angles(f, g).angles[1] == doctest::Approx(a).epsilon(1e-8));
  }
}

TEST_CASE("combined angle examples") {
  const Subspace f = Subspace::coordinate(4, {0, 1});
  const Subspace g = Subspace::span(cols(4, {{1, 0, 0, 0}, {0, std::cos(0.5), std::sin(0.5), 0}}));
  CHECK(combined_angle(f, f) == doctest::Approx(0.0));
  CHECK(combined_angle(f, g) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(combined_angle(f, Subspace::coordinate(4, {0, 2})) == doctest::Approx(oracle::kPi / 2));
}

TEST_CASE("cone membership") {
  const Subspace e1 = Subspace::coordinate(2, {0});
  CHECK_FALSE(cone_contains(Vec::Zero(2), 1.0, e1, vec({1, 2})));
  CHECK(cone_contains(Vec::Zero(2), 0.5, e1, vec({2, 1})));
  CHECK(cone_contains(vec({1, 1}), 0.0, e1, vec({4, 1})));
}

TEST_CASE("cone lemma threshold") {
  CHECK(cone_lemma_bound(0.0, 0.0) == doctest::Approx(0.0));
  CHECK(cone_lemma_bound(0.0, 0.3) == doctest::Approx(0.3));
  CHECK(cone_lemma_bound(0.1, 0.1) == doctest::Approx(0.21 / 0.89).epsilon(1e-14));
  CHECK_THROWS_AS(cone_lemma_bound(0.5, 1.0), PreconditionError);
}

TEST_CASE("two plane angle bound") {
  CHECK(two_plane_angle_bound(0.1, 0.1, 1.0, 1.0, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(two_plane_angle_bound(0.05, 0.05, 1.0, 2.0, 2.0) == doctest::Approx(1.0 / 0.9).epsilon(1e-14));
  CHECK(two_plane_angle_bound(1e-9, 1e-9, 1.0, 1.0, 2.0) < 1e-7);
}

TEST_CASE("frame validation") {
  CHECK_THROWS_AS(Subspace::from_frame(cols(2, {{1, 0}, {1, 0}})), PreconditionError);
  CHECK_THROWS_AS(Subspace::from_frame(cols(2, {{2, 0}})), PreconditionError);
  CHECK_NOTHROW(Subspace::from_frame(cols(2, {{1, 1e-9}})));
  CHECK_THROWS_AS(angle_metric(Subspace::coordinate(3, {0}), Subspace::coordinate(3, {0, 1})), PreconditionError);
}
