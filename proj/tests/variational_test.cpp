#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "nbody/central_config.hpp"
#include "nbody/variational.hpp"
#include "test_util.hpp"

using namespace nbody;
using namespace nbody::variational;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kPairAction = 3.0 * std::numbers::pi * std::pow(2.0, -1.0 / 3.0);

// Quadrature counterparts for the closed-form integrals.
double kineticByQuadrature(const FourierLoop& loop, int samples) {
  double acc = 0.0;
  const double dt = loop.period() / samples;
  for (int k = 0; k < samples; ++k) {
    acc += kineticEnergy(loop.masses(), loop.velocityAt((k + 0.5) * dt));
  }
  return acc * dt;
}

double inertiaByQuadrature(const FourierLoop& loop, int samples) {
  double acc = 0.0;
  const double dt = loop.period() / samples;
  for (int k = 0; k < samples; ++k) {
    acc += momentOfInertia(loop.masses(), loop.configurationAt((k + 0.5) * dt));
  }
  return acc * dt;
}

double potentialByQuadrature(const FourierLoop& loop, int samples) {
  double acc = 0.0;
  const double dt = loop.period() / samples;
  for (int k = 0; k < samples; ++k) {
    acc += potential(loop.masses(), loop.configurationAt((k + 0.5) * dt));
  }
  return acc * dt;
}

FourierLoop rotateLoop(const FourierLoop& loop, double angle) {
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  Eigen::MatrixXd c = loop.cosCoef();
  Eigen::MatrixXd s = loop.sinCoef();
  for (int i = 0; i < loop.bodies(); ++i) {
    c.middleRows(2 * i, 2) = rot * c.middleRows(2 * i, 2);
    s.middleRows(2 * i, 2) = rot * s.middleRows(2 * i, 2);
  }
  return FourierLoop(loop.masses(), loop.period(), loop.order(), std::move(c),
                     std::move(s));
}

}  // namespace

TEST_CASE("loop construction is validated") {
  CHECK_THROWS_AS(FourierLoop(MassVector{1.0, 1.0}, kTwoPi, 0,
                              Eigen::MatrixXd::Zero(4, 0),
                              Eigen::MatrixXd::Zero(4, 0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(FourierLoop(MassVector{1.0, 1.0}, kTwoPi, 2,
                              Eigen::MatrixXd::Zero(3, 2),
                              Eigen::MatrixXd::Zero(4, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(FourierLoop(MassVector{1.0, 1.0}, -1.0,
                              1, Eigen::MatrixXd::Zero(4, 1),
                              Eigen::MatrixXd::Zero(4, 1)),
                  std::invalid_argument);
}

TEST_CASE("closed-form integrals match quadrature") {
  std::mt19937_64 rng(31);
  const MassVector m{1.0, 2.0, 0.7};
  for (int trial = 0; trial < 5; ++trial) {
    const FourierLoop loop = testutil::randomFourierLoop(m, 3.0, 3, rng);
    CHECK(loop.kineticIntegral() ==
          doctest::Approx(kineticByQuadrature(loop, 1024)).epsilon(1e-10));
    CHECK(loop.inertiaIntegral() ==
          doctest::Approx(inertiaByQuadrature(loop, 1024)).epsilon(1e-10));
  }
}

TEST_CASE("action of the balanced circular pair hits the floor") {
  const FourierLoop loop = testutil::circularPairLoop(std::cbrt(2.0), kTwoPi);
  CHECK(actionFunctional(loop) == doctest::Approx(kPairAction).epsilon(1e-12));
  CHECK(lowerBound(kTwoPi, 0.5) == doctest::Approx(kPairAction).epsilon(1e-14));
}

TEST_CASE("doubling masses and coefficients scales K by 8 and U by 2") {
  std::mt19937_64 rng(37);
  const MassVector m{1.0, 1.5};
  const FourierLoop loop = testutil::randomFourierLoop(m, 4.0, 2, rng);
  const FourierLoop doubled(MassVector{2.0, 3.0}, loop.period(), loop.order(),
                            2.0 * loop.cosCoef(), 2.0 * loop.sinCoef());
  CHECK(doubled.kineticIntegral() ==
        doctest::Approx(8.0 * loop.kineticIntegral()).epsilon(1e-12));
  const double pot = potentialByQuadrature(loop, 512);
  const double pot_doubled = potentialByQuadrature(doubled, 512);
  CHECK(pot_doubled == doctest::Approx(2.0 * pot).epsilon(1e-12));
  CHECK(actionFunctional(doubled, 512) ==
        doctest::Approx(8.0 * loop.kineticIntegral() + 2.0 * pot).epsilon(1e-12));
}

TEST_CASE("wirtinger gap") {
  const FourierLoop pure = testutil::circularPairLoop(1.0, kTwoPi);
  CHECK(wirtingerGap(pure) == 0.0);

  // Only h = 2 content with squared coefficient norm s per body.
  const double s = 0.3;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2, 2);
  Eigen::MatrixXd sn = Eigen::MatrixXd::Zero(2, 2);
  c(0, 1) = std::sqrt(s);
  const FourierLoop h2(MassVector{2.0}, kTwoPi, 2, c, sn);
  const double w1 = kTwoPi / h2.period();
  CHECK(wirtingerGap(h2) ==
        doctest::Approx(0.25 * h2.period() * 2.0 * w1 * w1 * 3.0 * s).epsilon(1e-13));

  std::mt19937_64 rng(41);
  const MassVector m{1.0, 2.0};
  for (int trial = 0; trial < 5; ++trial) {
    const FourierLoop loop = testutil::randomFourierLoop(m, 5.0, 3, rng);
    const double lhs = kineticByQuadrature(loop, 2048);
    const double rhs = std::pow(kTwoPi / loop.period(), 2) *
                       0.5 * inertiaByQuadrature(loop, 2048);
    CHECK(wirtingerGap(loop) == doctest::Approx(lhs - rhs).epsilon(1e-10));
    CHECK(wirtingerGap(loop) >= 0.0);
  }
}

TEST_CASE("lower bound formula and scaling") {
  CHECK(lowerBound(kTwoPi, 0.5) == doctest::Approx(7.480451224746).epsilon(1e-12));
  CHECK(lowerBound(kTwoPi, 9.0) == doctest::Approx(19.6043281720525).epsilon(1e-12));
  CHECK(lowerBound(8.0 * kTwoPi, 9.0) ==
        doctest::Approx(2.0 * lowerBound(kTwoPi, 9.0)).epsilon(1e-13));
  CHECK_THROWS_AS(lowerBound(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("pointwise balance gap") {
  const FourierLoop balanced = testutil::circularPairLoop(std::cbrt(2.0), kTwoPi);
  for (double t : {0.0, 0.7, 2.5, 6.0}) {
    CHECK(std::abs(amgmPointwiseGap(balanced, t)) < 1e-12);
  }
  const FourierLoop tight = testutil::circularPairLoop(1.0, kTwoPi);
  CHECK(amgmPointwiseGap(tight, 0.3) > 0.01);

  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> tdist(0.0, kTwoPi);
  const MassVector m{1.0, 1.0, 1.0};
  const FourierLoop loop = testutil::randomFourierLoop(m, kTwoPi, 2, rng);
  for (int k = 0; k < 128; ++k) {
    CHECK(amgmPointwiseGap(loop, tdist(rng)) >= -1e-12);
  }
}

TEST_CASE("action gradient matches finite differences") {
  std::mt19937_64 rng(47);
  const int samples = 256;
  for (const MassVector& m :
       {MassVector{1.0, 1.4}, MassVector{1.0, 2.0, 0.5}}) {
    for (int trial = 0; trial < 3; ++trial) {
      const FourierLoop loop = testutil::randomFourierLoop(m, 3.0, 2, rng);
      const Eigen::VectorXd grad = actionGradient(loop, samples);
      Eigen::VectorXd x = loop.packed();
      Eigen::VectorXd fd(x.size());
      const double step = 1e-5;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        const FourierLoop lp = FourierLoop::fromPacked(m, 3.0, 2, xp);
        const FourierLoop lm = FourierLoop::fromPacked(m, 3.0, 2, xm);
        fd[i] = (actionFunctional(lp, samples) - actionFunctional(lm, samples)) /
                (2.0 * step);
      }
      CHECK((grad - fd).norm() / fd.norm() < 1e-6);
    }
  }
}

TEST_CASE("one-frequency loops embed exactly") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd a(3, 2), b(3, 2);
  for (int i = 0; i < 3; ++i) {
    for (int d = 0; d < 2; ++d) {
      a(i, d) = gauss(rng);
      b(i, d) = gauss(rng);
    }
  }
  const harmonics::TrigLoop trig(MassVector{1.0, 2.0, 3.0}, 2, a, b, 5.0);
  const FourierLoop emb = trigToFourier(trig);
  CHECK(emb.order() == 1);
  CHECK(wirtingerGap(emb) == 0.0);
  for (int k = 0; k < 32; ++k) {
    const double t = 5.0 * k / 32.0;
    const Configuration from_trig = trig.positionsAt(t);
    const Configuration from_fourier = emb.configurationAt(t);
    CHECK((from_trig.points - from_fourier.points).norm() < 1e-14);
  }
  // Same action through either sampling path.
  double action_trig = 0.0;
  const int samples = 512;
  const double dt = trig.period() / samples;
  for (int k = 0; k < samples; ++k) {
    const double t = (k + 0.5) * dt;
    action_trig += kineticEnergy(trig.masses(), trig.velocitiesAt(t)) +
                   potential(trig.masses(), trig.positionsAt(t));
  }
  action_trig *= dt;
  CHECK(actionFunctional(emb, samples) ==
        doctest::Approx(action_trig).epsilon(1e-10));
}

TEST_CASE("relative equilibrium construction") {
  const central::CentralConfigResult tri =
      central::minimizeIU2(MassVector{1.0, 1.0, 1.0}, 2);

  SUBCASE("natural period from lambda") {
    const harmonics::TrigLoop loop = buildRelativeEquilibrium(tri);
    CHECK(loop.period() ==
          doctest::Approx(kTwoPi / std::sqrt(3.0)).epsilon(1e-9));
    CHECK(harmonics::rigidityCheck(loop).rigid);
    CHECK(harmonics::potentialVariation(loop, 512) < 1e-12);
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
      const double t = loop.period() * k / 32.0;
      worst = std::max(worst,
                       newtonResidual(loop.masses(), loop.positionsAt(t),
                                      loop.accelerationsAt(t)));
    }
    CHECK(worst < 1e-10);
  }

  SUBCASE("requested period rescales the configuration") {
    const central::CentralConfigResult pair =
        central::minimizeIU2(MassVector{1.0, 1.0}, 2);
    const harmonics::TrigLoop loop = buildRelativeEquilibrium(pair, kTwoPi);
    CHECK(loop.period() == kTwoPi);
    const Configuration q0 = loop.positionsAt(0.0);
    CHECK(q0.minPairDistance() == doctest::Approx(std::cbrt(2.0)).epsilon(1e-9));
    const double lambda = potential(loop.masses(), q0) /
                          momentOfInertia(loop.masses(), q0);
    CHECK(lambda == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("rescaling the configuration by c rescales T by c^1.5") {
    central::CentralConfigResult scaled = tri;
    const double c = 1.7;
    scaled.q.points *= c;
    scaled.residual = centralConfigResidual(scaled.masses, scaled.q);
    const harmonics::TrigLoop base = buildRelativeEquilibrium(tri);
    const harmonics::TrigLoop big = buildRelativeEquilibrium(scaled);
    CHECK(big.period() ==
          doctest::Approx(std::pow(c, 1.5) * base.period()).epsilon(1e-9));
  }
}

TEST_CASE("classification of constructed loops") {
  const central::CentralConfigResult pair =
      central::minimizeIU2(MassVector{1.0, 1.0}, 2);

  SUBCASE("relative equilibrium passes at 1e-8") {
    const FourierLoop loop =
        trigToFourier(buildRelativeEquilibrium(pair, kTwoPi));
    ClassifyTols tols;
    tols.first_harmonic = 1e-8;
    tols.virial = 1e-8;
    tols.shape = 1e-8;
    const ActionReport report = classifyMinimizer(loop, pair, tols, 512);
    CHECK(report.relative_equilibrium);
    CHECK(std::abs(report.gap) < 1e-7);
  }

  SUBCASE("wrong radius keeps harmonics pure but breaks the balance") {
    const FourierLoop loop = testutil::circularPairLoop(1.0, kTwoPi);
    const ActionReport report = classifyMinimizer(loop, pair, {}, 512);
    CHECK(report.first_harmonic_fraction == 1.0);
    CHECK(report.virial_gap > 0.1);
    CHECK(!report.relative_equilibrium);
  }

  SUBCASE("one percent second-harmonic energy fails the purity condition") {
    FourierLoop base = trigToFourier(buildRelativeEquilibrium(pair, kTwoPi));
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(4, 2);
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(4, 2);
    c.col(0) = base.cosCoef().col(0);
    s.col(0) = base.sinCoef().col(0);
    double energy1 = 0.0;
    for (int i = 0; i < 2; ++i) {
      energy1 += base.alpha(i, 1).squaredNorm() + base.beta(i, 1).squaredNorm();
    }
    // h = 2 carrying 1% of the h^2-weighted energy: 4 |c2|^2 = 0.01 E1 / 0.99.
    const double target = 0.01 * energy1 / (1.0 - 0.01) / 4.0;
    c(0, 1) = std::sqrt(target / 2.0);
    c(2, 1) = -std::sqrt(target / 2.0);
    const FourierLoop bent(base.masses(), kTwoPi, 2, c, s);
    const ActionReport report = classifyMinimizer(bent, pair, {}, 512);
    CHECK(report.first_harmonic_fraction == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(!report.relative_equilibrium);
  }
}

TEST_CASE("chain of lower bounds holds for random loops") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> tdist(0.0, 1.0);
  const MassVector m{1.0, 1.0, 1.0};
  const central::CentralConfigResult reference = central::minimizeIU2(m, 2);
  for (int trial = 0; trial < 25; ++trial) {
    const FourierLoop loop = testutil::randomFourierLoop(m, kTwoPi, 2, rng, 2.0);
    const double action = actionFunctional(loop, 512);
    const double bound = lowerBound(loop.period(), reference.value);
    CHECK(action >= bound - 1e-9 * std::abs(bound));
    CHECK(wirtingerGap(loop) >= 0.0);
    for (int k = 0; k < 16; ++k) {
      const double t = loop.period() * tdist(rng);
      CHECK(amgmPointwiseGap(loop, t) >= -1e-12);
      const Configuration q = loop.configurationAt(t);
      const double u = potential(m, q);
      CHECK(momentOfInertia(m, q) * u * u >=
            reference.value * (1.0 - 1e-9));
    }
  }
}

TEST_CASE("direct minimization recovers the circular pair") {
  ActionMinimizeOptions opts;
  opts.restarts = 2;
  opts.seed = 7;
  const ActionMinimum min = minimizeAction(MassVector{1.0, 1.0}, kTwoPi, 4, opts);
  CHECK(min.converged);
  CHECK(min.report.action == doctest::Approx(kPairAction).epsilon(1e-3));
  CHECK(min.report.first_harmonic_fraction > 1.0 - 1e-6);
  CHECK(min.report.virial_gap < 1e-6);
  CHECK(min.report.shape_gap < 1e-6);
  CHECK(min.report.relative_equilibrium);
}

TEST_CASE("direct minimization recovers the equilateral rotation") {
  ActionMinimizeOptions opts;
  opts.restarts = 4;
  opts.seed = 11;
  const ActionMinimum min =
      minimizeAction(MassVector{1.0, 1.0, 1.0}, kTwoPi, 4, opts);
  CHECK(min.converged);
  CHECK(min.report.action ==
        doctest::Approx(19.6043281720525).epsilon(1e-3));
  CHECK(min.report.relative_equilibrium);
  // The recovered shape is equilateral.
  const Configuration q = min.loop.configurationAt(0.0);
  const double d01 = (q.points.row(0) - q.points.row(1)).norm();
  const double d02 = (q.points.row(0) - q.points.row(2)).norm();
  const double d12 = (q.points.row(1) - q.points.row(2)).norm();
  CHECK(d01 == doctest::Approx(d02).epsilon(1e-3));
  CHECK(d01 == doctest::Approx(d12).epsilon(1e-3));
}

TEST_CASE("starting at the relative equilibrium converges immediately") {
  const central::CentralConfigResult pair =
      central::minimizeIU2(MassVector{1.0, 1.0}, 2);
  ActionMinimizeOptions opts;
  opts.restarts = 1;
  opts.initial = trigToFourier(buildRelativeEquilibrium(pair, kTwoPi));
  const ActionMinimum min = minimizeAction(MassVector{1.0, 1.0}, kTwoPi, 1, opts);
  CHECK(min.converged);
  CHECK(min.iterations == 0);
  CHECK(std::abs(min.report.gap) < 1e-9);
}

TEST_CASE("converged minimizers satisfy the equations of motion") {
  ActionMinimizeOptions opts;
  opts.restarts = 2;
  opts.seed = 3;
  const ActionMinimum min =
      minimizeAction(MassVector{1.0, 1.0, 1.0}, kTwoPi, 2, opts);
  double worst = 0.0;
  for (int k = 0; k < 16; ++k) {
    const double t = kTwoPi * (k + 0.5) / 16.0;
    worst = std::max(worst, newtonResidual(min.loop.masses(),
                                           min.loop.configurationAt(t),
                                           min.loop.accelerationAt(t)));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("rotating the initial guess leaves the converged action unchanged") {
  std::mt19937_64 rng(61);
  const MassVector m{1.0, 1.0};
  const FourierLoop start = testutil::randomFourierLoop(m, kTwoPi, 2, rng, 1.2);
  ActionMinimizeOptions opts;
  opts.restarts = 1;
  opts.initial = start;
  const ActionMinimum a = minimizeAction(m, kTwoPi, 2, opts);
  opts.initial = rotateLoop(start, 1.1);
  const ActionMinimum b = minimizeAction(m, kTwoPi, 2, opts);
  CHECK(a.report.action == doctest::Approx(b.report.action).epsilon(1e-8));
}

TEST_CASE("minimization failure modes") {
  CHECK_THROWS_AS(minimizeAction(MassVector{1.0}, kTwoPi, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(minimizeAction(MassVector{1.0, 1.0}, kTwoPi, 0),
                  std::invalid_argument);
  ActionMinimizeOptions opts;
  opts.restarts = 1;
  opts.max_iters = 0;
  opts.seed = 1;
  CHECK_THROWS_AS(minimizeAction(MassVector{1.0, 1.0, 1.0}, kTwoPi, 2, opts),
                  NoConvergenceError);
}
