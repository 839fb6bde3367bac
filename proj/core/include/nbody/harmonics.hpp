#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "nbody/mechanics.hpp"

namespace nbody::harmonics {

inline constexpr double kRigidityTol = 1e-10;       // relative, B/A
inline constexpr double kConstancyTol = 1e-8;       // std(U)/mean(U)
inline constexpr int kDefaultSpectrumSamples = 4096;
inline constexpr long long kSeriesMaxTerms = 1'000'000;
inline constexpr long long kSeriesMaxTermsUnitC = 10'000'000;

// One-frequency loop: q_i(t) = a_i cos(2 pi t / T) + b_i sin(2 pi t / T).
// The time mean of every body's path is zero by construction.
class TrigLoop {
 public:
  TrigLoop(MassVector masses, int dim, Eigen::MatrixXd a, Eigen::MatrixXd b,
           double period);

  const MassVector& masses() const { return masses_; }
  int dim() const { return dim_; }
  int bodies() const { return static_cast<int>(a_.rows()); }
  double period() const { return period_; }
  const Eigen::MatrixXd& cosVectors() const { return a_; }
  const Eigen::MatrixXd& sinVectors() const { return b_; }

  Configuration positionsAt(double t) const;
  Configuration velocitiesAt(double t) const;
  // Second derivative; for this ansatz simply -(2 pi / T)^2 q(t).
  Configuration accelerationsAt(double t) const;

 private:
  MassVector masses_;
  int dim_;
  Eigen::MatrixXd a_, b_;  // N x dim each
  double period_;
};

// Decomposition of one pair's squared distance,
//   |q_j(t) - q_k(t)|^2 = A + B cos(4 pi t / T + theta),
// with A >= B >= 0 and C = B/A in [0, 1]. theta is defined only when B > 0.
struct PairHarmonics {
  int j = 0;
  int k = 0;
  double mass_product = 1.0;  // m_j * m_k
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double theta = 0.0;  // in [0, 2 pi)
  bool theta_defined = false;
};

// One record per pair j < k. Throws DegeneratePairError when a pair has
// A = 0 (the bodies coincide for every t).
std::vector<PairHarmonics> pairHarmonics(const TrigLoop& loop);

// Ratio c_{l+1} / c_l of successive even-power coefficients in the binomial
// expansion of the harmonic-n Fourier coefficient of (1 + C cos s)^(-1/2).
// Numerator and denominator are formed exactly in integer arithmetic:
//   (4l + 2n + 1)(4l + 2n + 3) / (16 (l + 1)(l + 1 + n)).
// The ratio tends to 1 as l grows, so the series converges for C^2 < 1 and,
// by Gauss's test (the 1/l coefficient is (n+2)/2 > 1), also at C^2 = 1.
// n = 0 gives the ratio family of the mean (DC) term.
double seriesTermRatio(long long n, long long l);

struct SpectralCoefficient {
  long long n = 0;
  double value = 0.0;       // magnitude of the complex coefficient at 4 pi n / T
  long long terms_used = 0;
  double tail_bound = 0.0;  // estimate of the truncated remainder, same units
  bool converged = true;    // false reports slow convergence (C near 1)
};

// Sums the bracket series 1 + c_1 C^2 + c_2 C^4 + ... with the exact
// recursion of seriesTermRatio, then applies the closed-form prefactor
// m_j m_k C^n (2n-1)!! / (A^{1/2} 2^{2n} n!). Terms stop once
// term < tol * partial sum or the iteration cap is reached; at C = 1 the
// cap is extended and the Gauss-test tail estimate is reported instead of
// throwing.
SpectralCoefficient fourierCoefficientSeries(const PairHarmonics& pair,
                                             long long n, double tol = 1e-16);

// U(q(t)) on the midpoint-shifted uniform grid t_s = (s + 1/2) T / S.
// The shift keeps collinear families sampleable (their collisions sit on
// the unshifted grid) and costs nothing in spectral accuracy.
std::vector<double> samplePotential(const TrigLoop& loop, int samples);
std::vector<double> sampleMomentOfInertia(const TrigLoop& loop, int samples);

// (1/S) sum_s v_s exp(-2 pi i k (s + 1/2) / S): the order-k Fourier
// coefficient of a smooth periodic signal sampled on the midpoint grid.
std::complex<double> periodicDftCoefficient(std::span<const double> values,
                                            int k);

// Complex Fourier coefficients of U(q(t)) at frequencies 4 pi n / T for
// n = 0..n_max. samples must be a power of two with samples >= 8 n_max.
std::vector<std::complex<double>> potentialSpectrumQuadrature(
    const TrigLoop& loop, int n_max, int samples = kDefaultSpectrumSamples);

// std(U)/mean(U) over one period.
double potentialVariation(const TrigLoop& loop, int samples = 1024);

struct RigidityReport {
  bool rigid = false;
  double max_C = 0.0;
  std::vector<double> distances;  // per-pair constant |q_j - q_k|, rigid only
};

// rigid <=> max over pairs of B <= tol * A. When rigid, the mutual
// distances are the constants sqrt(A_jk).
RigidityReport rigidityCheck(const TrigLoop& loop, double tol = kRigidityTol);

// Smallest n <= k_max whose multiples put every phase/2pi in the quarter
// window [0, 1/4) u (3/4, 1), i.e. cos(n theta) > 0 for every theta.
std::optional<long long> findAlignedHarmonic(std::span<const double> theta,
                                             long long k_max);

struct PairEvidence {
  int j = 0;
  int k = 0;
  double theta = 0.0;
  double aligned_frac = 0.0;      // {n theta / 2 pi}
  double cos_n_theta = 0.0;       // > 0 by the window choice
  double coefficient = 0.0;       // series value D at the aligned n
  double coefficient_rel = 0.0;   // D normalized by m_j m_k / sqrt(A)
};

// Numerical execution of the rigidity argument for constant-potential
// loops: a constant U kills every harmonic of its spectrum; at an aligned
// harmonic the spectrum is a sum of non-negative terms D cos(n theta), so
// every D, hence every C, must vanish. On floating data D < delta only
// forces C < delta^(1/n), which is reported as c_bound; certification
// means the bound confirms rigidity at the resolution the data supports.
struct RigidityCertificate {
  bool certified = false;
  bool trivial = false;          // no pair had B > 0; nothing to align
  long long harmonic = 0;        // aligned n (0 when trivial)
  double potential_variation = 0.0;
  double alignment_sum = 0.0;    // sum of D cos(n theta) over pairs
  double spectrum_magnitude = 0.0;  // |quadrature coefficient| at the aligned n
  double max_coefficient_rel = 0.0;
  double c_bound = 0.0;          // certified upper bound on every pair's C
  std::vector<PairEvidence> pairs;
  bool rigid = false;            // strict rigidityCheck cross-check
};

// Throws HypothesisViolatedError when U is not numerically constant and
// SearchExhaustedError when no aligned harmonic exists below k_max (a
// bounded-search artifact; existence is guaranteed for unbounded n).
RigidityCertificate rigidityCertificate(const TrigLoop& loop,
                                        double constancy_tol = kConstancyTol,
                                        long long k_max = 1'000'000);

}  // namespace nbody::harmonics
