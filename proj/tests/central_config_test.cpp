#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "nbody/central_config.hpp"
#include "test_util.hpp"

using namespace nbody;
using namespace nbody::central;
using testutil::makeConfig;

TEST_CASE("objective values for two and three bodies") {
  const MassVector m2{1.0, 1.0};
  for (double r : {0.4, 1.0, 3.5}) {
    CHECK(objectiveIU2(m2, makeConfig(2, {{-0.5 * r, 0.0}, {0.5 * r, 0.0}})) ==
          doctest::Approx(0.5).epsilon(1e-13));
  }
  const MassVector m3{1.0, 1.0, 1.0};
  for (double radius : {0.5, 1.0, 2.5}) {
    CHECK(objectiveIU2(m3, testutil::equilateral(radius)) ==
          doctest::Approx(9.0).epsilon(1e-13));
  }
  for (double x : {0.5, 1.0, 2.0}) {
    CHECK(objectiveIU2(m3, testutil::collinear3(x)) ==
          doctest::Approx(12.5).epsilon(1e-13));
  }
}

TEST_CASE("objective is invariant under scaling and rotation") {
  std::mt19937_64 rng(5);
  const MassVector m{1.0, 2.0, 0.5};
  std::uniform_real_distribution<double> cdist(0.2, 5.0);
  std::uniform_real_distribution<double> adist(0.0, 2.0 * M_PI);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration q = testutil::randomCenteredConfig(m, 2, rng);
    const double base = objectiveIU2(m, q);

    Configuration scaled = q;
    scaled.points *= cdist(rng);
    CHECK(objectiveIU2(m, scaled) == doctest::Approx(base).epsilon(1e-12));

    const double angle = adist(rng);
    Eigen::Matrix2d rot;
    rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
    Configuration rotated = q;
    rotated.points = q.points * rot.transpose();
    CHECK(objectiveIU2(m, rotated) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("gradient vanishes at central configurations") {
  const MassVector m3{1.0, 1.0, 1.0};
  const Configuration tri = testutil::equilateral();
  const Configuration g = projectComTangent(m3, gradientIU2(m3, tri));
  CHECK(g.points.norm() < 1e-10);

  const MassVector m2{1.0, 1.0};
  const Configuration pair = makeConfig(2, {{-0.3, 0.4}, {0.3, -0.4}});
  const Configuration g2 = projectComTangent(m2, gradientIU2(m2, pair));
  CHECK(g2.points.norm() < 1e-10);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(23);
  const MassVector m{1.0, 1.7, 0.6};
  const double step = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    Configuration q = testutil::randomCenteredConfig(m, 2, rng);
    const Configuration grad = gradientIU2(m, q);
    Eigen::MatrixXd fd(q.bodies(), q.dim);
    for (int i = 0; i < q.bodies(); ++i) {
      for (int d = 0; d < q.dim; ++d) {
        Configuration plus = q;
        Configuration minus = q;
        plus.points(i, d) += step;
        minus.points(i, d) -= step;
        fd(i, d) = (objectiveIU2(m, plus) - objectiveIU2(m, minus)) / (2.0 * step);
      }
    }
    CHECK((grad.points - fd).norm() / fd.norm() < 1e-6);
  }
}

TEST_CASE("two-body minimization") {
  const CentralConfigResult res = minimizeIU2(MassVector{1.0, 1.0}, 2);
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(momentOfInertia(res.masses, res.q) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.residual < 1e-8);
  // Gauge: body 1 on the positive x-axis.
  CHECK(res.q.points(0, 0) > 0.0);
  CHECK(std::abs(res.q.points(0, 1)) < 1e-12);
}

TEST_CASE("three equal masses settle into the equilateral shape") {
  const CentralConfigResult res = minimizeIU2(MassVector{1.0, 1.0, 1.0}, 2);
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(res.lambda == doctest::Approx(3.0).epsilon(1e-6));
  const auto& p = res.q.points;
  const double d01 = (p.row(0) - p.row(1)).norm();
  const double d02 = (p.row(0) - p.row(2)).norm();
  const double d12 = (p.row(1) - p.row(2)).norm();
  CHECK(d01 == doctest::Approx(d02).epsilon(1e-6));
  CHECK(d01 == doctest::Approx(d12).epsilon(1e-6));
  CHECK(res.q.points(1, 1) >= 0.0);  // reflection tie-break
}

TEST_CASE("collinear three-body minimization") {
  const CentralConfigResult res = minimizeIU2(MassVector{1.0, 1.0, 1.0}, 1);
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(12.5).epsilon(1e-6));
}

TEST_CASE("results are deterministic for a fixed seed") {
  MinimizeOptions opts;
  opts.seed = 42;
  opts.starts = 8;
  const CentralConfigResult a = minimizeIU2(MassVector{1.0, 1.0, 1.0}, 2, opts);
  const CentralConfigResult b = minimizeIU2(MassVector{1.0, 1.0, 1.0}, 2, opts);
  CHECK(a.value == b.value);
  CHECK(a.lambda == b.lambda);
  CHECK(a.residual == b.residual);
  CHECK(a.q.points == b.q.points);
}

TEST_CASE("planar infimum undercuts the collinear one") {
  MinimizeOptions opts;
  opts.starts = 16;
  const DimensionComparison c3 = compareDimensions(MassVector{1.0, 1.0, 1.0}, opts);
  CHECK(c3.inf_d1 == doctest::Approx(12.5).epsilon(1e-6));
  CHECK(c3.inf_d2 == doctest::Approx(9.0).epsilon(1e-6));
  CHECK(c3.ordering == DimensionOrdering::kPlanarLower);

  const DimensionComparison c2 = compareDimensions(MassVector{1.0, 1.0}, opts);
  CHECK(c2.ordering == DimensionOrdering::kEqual);
  CHECK(c2.inf_d1 == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(c2.inf_d2 == doctest::Approx(0.5).epsilon(1e-8));

  const DimensionComparison c4 =
      compareDimensions(MassVector{1.0, 1.0, 1.0, 1.0}, opts);
  CHECK(c4.ordering == DimensionOrdering::kPlanarLower);
}

TEST_CASE("converged results are certified central") {
  for (unsigned long long seed : {1ULL, 2ULL}) {
    MinimizeOptions opts;
    opts.seed = seed;
    opts.starts = 8;
    const CentralConfigResult res =
        minimizeIU2(MassVector{1.0, 2.0, 3.0}, 2, opts);
    CHECK(res.converged);
    CHECK(res.residual < opts.tol_central);
    CHECK(res.value > 0.0);
    CHECK(isCentered(res.masses, res.q));
  }
}

TEST_CASE("argument validation and failure modes") {
  CHECK_THROWS_AS(minimizeIU2(MassVector{1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(minimizeIU2(MassVector{1.0, 1.0}, 3), std::invalid_argument);
  MinimizeOptions opts;
  opts.starts = 1;
  opts.max_iters = 1;
  CHECK_THROWS_AS(minimizeIU2(MassVector{1.0, 1.0, 1.0}, 2, opts),
                  NoConvergenceError);
}
