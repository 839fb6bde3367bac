#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nbody/central_config.hpp"
#include "nbody/harmonics.hpp"
#include "nbody/kronecker.hpp"
#include "nbody/mechanics.hpp"
#include "nbody/variational.hpp"

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

nbody::Configuration randomConfig(int n, int dim, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd pts(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) pts(i, d) = gauss(rng);
  }
  return nbody::Configuration(dim, std::move(pts));
}

nbody::MassVector unitMasses(int n) {
  return nbody::MassVector(Eigen::VectorXd::Ones(n));
}

void PotentialGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const nbody::MassVector m = unitMasses(n);
  const nbody::Configuration q = randomConfig(n, 2, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::potentialGradient(m, q));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(PotentialGradient)->RangeMultiplier(2)->Range(2, 64)->Complexity();

void ShapeObjectiveGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const nbody::MassVector m = unitMasses(n);
  const nbody::Configuration q = randomConfig(n, 2, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::central::gradientIU2(m, q));
  }
}
BENCHMARK(ShapeObjectiveGradient)->Arg(3)->Arg(8)->Arg(16);

void MinimizeShapeObjective(benchmark::State& state) {
  const nbody::MassVector m = unitMasses(3);
  nbody::central::MinimizeOptions opts;
  opts.starts = 4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::central::minimizeIU2(m, 2, opts));
  }
}
BENCHMARK(MinimizeShapeObjective)->Unit(benchmark::kMillisecond);

void CoefficientSeries(benchmark::State& state) {
  nbody::harmonics::PairHarmonics ph;
  ph.A = 1.0;
  ph.C = 0.01 * static_cast<double>(state.range(0));
  ph.B = ph.C;
  ph.theta_defined = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::harmonics::fourierCoefficientSeries(ph, 4));
  }
}
BENCHMARK(CoefficientSeries)->Arg(50)->Arg(90)->Arg(99);

void SpectrumQuadrature(benchmark::State& state) {
  Eigen::MatrixXd a(2, 2), b(2, 2);
  a << 0.6, 0.0, -0.6, 0.0;
  b << 0.0, 0.4, 0.0, -0.4;
  const nbody::harmonics::TrigLoop loop(unitMasses(2), 2, a, b, kTwoPi);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nbody::harmonics::potentialSpectrumQuadrature(loop, 8, samples));
  }
}
BENCHMARK(SpectrumQuadrature)->Arg(1024)->Arg(4096)->Arg(16384);

void MultiplierScan(benchmark::State& state) {
  nbody::kronecker::Query q;
  q.theta = {std::sqrt(2.0), std::sqrt(3.0)};
  q.epsilon = 0.005;
  q.k_max = state.range(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::kronecker::simultaneousApprox(q));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(MultiplierScan)->RangeMultiplier(4)->Range(1 << 12, 1 << 20)->Complexity();

void ActionGradient(benchmark::State& state) {
  const nbody::MassVector m = unitMasses(3);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 0.3);
  Eigen::MatrixXd c(6, 4), s(6, 4);
  for (int h = 0; h < 4; ++h) {
    for (int r = 0; r < 6; ++r) {
      c(r, h) = (h == 0 ? 1.0 : 0.05) * gauss(rng);
      s(r, h) = (h == 0 ? 1.0 : 0.05) * gauss(rng);
    }
  }
  const nbody::variational::FourierLoop loop(m, kTwoPi, 4, c, s);
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(nbody::variational::actionGradient(loop, samples));
  }
}
BENCHMARK(ActionGradient)->Arg(256)->Arg(1024);

void MinimizeActionPair(benchmark::State& state) {
  const nbody::MassVector m = unitMasses(2);
  nbody::variational::ActionMinimizeOptions opts;
  opts.restarts = 1;
  opts.samples = 512;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nbody::variational::minimizeAction(m, kTwoPi, 2, opts));
  }
}
BENCHMARK(MinimizeActionPair)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
