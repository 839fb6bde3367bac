#include "nbody/harmonics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nbody/kronecker.hpp"

namespace nbody::harmonics {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool isPowerOfTwo(int x) { return x > 0 && (x & (x - 1)) == 0; }

double meanOf(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stdOf(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// (2n-1)!! / (2^{2n} n!), the magnitude of the leading binomial factor.
double binomialPrefactor(long long n) {
  double g = 1.0;
  for (long long i = 1; i <= n; ++i) {
    g *= static_cast<double>(2 * i - 1) / static_cast<double>(4 * i);
  }
  return g;
}

}  // namespace

TrigLoop::TrigLoop(MassVector masses, int dim, Eigen::MatrixXd a,
                   Eigen::MatrixXd b, double period)
    : masses_(std::move(masses)), dim_(dim), a_(std::move(a)), b_(std::move(b)),
      period_(period) {
  if (dim_ < 1 || dim_ > 3) {
    throw std::invalid_argument("TrigLoop: dim must be 1, 2 or 3");
  }
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw std::invalid_argument("TrigLoop: period must be positive");
  }
  const auto n = static_cast<Eigen::Index>(masses_.size());
  if (a_.rows() != n || b_.rows() != n || a_.cols() != dim_ || b_.cols() != dim_) {
    throw std::invalid_argument("TrigLoop: coefficient shapes must be N x dim");
  }
  if (!a_.allFinite() || !b_.allFinite()) {
    throw std::invalid_argument("TrigLoop: coefficients must be finite");
  }
}

Configuration TrigLoop::positionsAt(double t) const {
  const double phase = kTwoPi * t / period_;
  return Configuration(dim_, std::cos(phase) * a_ + std::sin(phase) * b_);
}

Configuration TrigLoop::velocitiesAt(double t) const {
  const double w = kTwoPi / period_;
  const double phase = w * t;
  return Configuration(dim_, w * (-std::sin(phase) * a_ + std::cos(phase) * b_));
}

Configuration TrigLoop::accelerationsAt(double t) const {
  const double w = kTwoPi / period_;
  Configuration q = positionsAt(t);
  q.points *= -(w * w);
  return q;
}

std::vector<PairHarmonics> pairHarmonics(const TrigLoop& loop) {
  const int n = loop.bodies();
  const Eigen::MatrixXd& a = loop.cosVectors();
  const Eigen::MatrixXd& b = loop.sinVectors();
  std::vector<PairHarmonics> out;
  out.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const Eigen::RowVectorXd da = a.row(j) - a.row(k);
      const Eigen::RowVectorXd db = b.row(j) - b.row(k);
      PairHarmonics ph;
      ph.j = j;
      ph.k = k;
      ph.mass_product = loop.masses()[j] * loop.masses()[k];
      ph.A = 0.5 * (da.squaredNorm() + db.squaredNorm());
      const double p = 0.5 * (da.squaredNorm() - db.squaredNorm());
      const double q = da.dot(db);
      ph.B = std::hypot(p, q);
      if (ph.A == 0.0) {
        throw DegeneratePairError("pair coincides for all t (A = 0)");
      }
      ph.C = ph.B / ph.A;
      if (ph.B > 0.0) {
        // Phase of the "+ theta" form: A + B cos(sigma + theta) expands to
        // A + (B cos theta) cos sigma - (B sin theta) sin sigma, so theta
        // must solve cos theta = p/B, sin theta = -q/B.
        ph.theta = std::atan2(-q, p);
        if (ph.theta < 0.0) ph.theta += kTwoPi;
        ph.theta_defined = true;
      }
      out.push_back(ph);
    }
  }
  return out;
}

double seriesTermRatio(long long n, long long l) {
  if (n < 0 || l < 0) {
    throw std::invalid_argument("seriesTermRatio: need n >= 0, l >= 0");
  }
  // Exact below 2^53: factors stay under ~4(l+n), squares under ~1.6e15 for
  // the l, n this toolkit ever visits.
  const double num = static_cast<double>(4 * l + 2 * n + 1) *
                     static_cast<double>(4 * l + 2 * n + 3);
  const double den = 16.0 * static_cast<double>(l + 1) *
                     static_cast<double>(l + 1 + n);
  return num / den;
}

SpectralCoefficient fourierCoefficientSeries(const PairHarmonics& pair,
                                             long long n, double tol) {
  if (n < 1) {
    throw std::invalid_argument("fourierCoefficientSeries: n must be >= 1");
  }
  if (!(pair.C >= 0.0 && pair.C <= 1.0)) {
    throw std::invalid_argument("fourierCoefficientSeries: C must lie in [0, 1]");
  }
  if (!(pair.A > 0.0)) {
    throw DegeneratePairError("fourierCoefficientSeries: A must be positive");
  }
  SpectralCoefficient out;
  out.n = n;
  if (pair.C == 0.0) {
    out.terms_used = 0;
    return out;  // every term carries C^n
  }
  const double c2 = pair.C * pair.C;
  const bool unit = c2 >= 1.0;
  const long long cap = unit ? kSeriesMaxTermsUnitC : kSeriesMaxTerms;

  double partial = 1.0;
  double term = 1.0;
  long long l = 0;
  bool hit_tol = false;
  while (l < cap) {
    term *= seriesTermRatio(n, l) * c2;
    partial += term;
    ++l;
    if (term < tol * partial) {
      hit_tol = true;
      break;
    }
  }

  const double prefactor =
      pair.mass_product * std::pow(pair.C, static_cast<double>(n)) *
      binomialPrefactor(n) / std::sqrt(pair.A);
  out.value = prefactor * partial;
  out.terms_used = l;
  out.converged = hit_tol;

  if (!hit_tol) {
    if (unit) {
      // Gauss-test regime: terms decay like l^{-(n+2)/2}, so the remainder
      // of sum_{l > L} is roughly term_L * L / ((n+2)/2 - 1).
      const double p = 0.5 * static_cast<double>(n + 2);
      out.tail_bound = prefactor * term * static_cast<double>(l) / (p - 1.0);
    } else {
      const double rho = seriesTermRatio(n, l) * c2;
      out.tail_bound = rho < 1.0
                           ? prefactor * term * rho / (1.0 - rho)
                           : std::numeric_limits<double>::infinity();
    }
  } else if (!unit) {
    const double rho = seriesTermRatio(n, l) * c2;
    if (rho < 1.0) out.tail_bound = prefactor * term * rho / (1.0 - rho);
  }
  return out;
}

std::vector<double> samplePotential(const TrigLoop& loop, int samples) {
  if (samples < 2) {
    throw std::invalid_argument("samplePotential: need at least 2 samples");
  }
  std::vector<double> u(static_cast<std::size_t>(samples));
  const double dt = loop.period() / samples;
  for (int s = 0; s < samples; ++s) {
    u[static_cast<std::size_t>(s)] =
        potential(loop.masses(), loop.positionsAt((s + 0.5) * dt));
  }
  return u;
}

std::vector<double> sampleMomentOfInertia(const TrigLoop& loop, int samples) {
  if (samples < 2) {
    throw std::invalid_argument("sampleMomentOfInertia: need at least 2 samples");
  }
  std::vector<double> v(static_cast<std::size_t>(samples));
  const double dt = loop.period() / samples;
  for (int s = 0; s < samples; ++s) {
    v[static_cast<std::size_t>(s)] =
        momentOfInertia(loop.masses(), loop.positionsAt((s + 0.5) * dt));
  }
  return v;
}

std::complex<double> periodicDftCoefficient(std::span<const double> values,
                                            int k) {
  const auto n = static_cast<double>(values.size());
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t s = 0; s < values.size(); ++s) {
    const double angle = -kTwoPi * k * (static_cast<double>(s) + 0.5) / n;
    acc += values[s] * std::complex<double>(std::cos(angle), std::sin(angle));
  }
  return acc / n;
}

std::vector<std::complex<double>> potentialSpectrumQuadrature(
    const TrigLoop& loop, int n_max, int samples) {
  if (n_max < 0) {
    throw std::invalid_argument("potentialSpectrumQuadrature: n_max must be >= 0");
  }
  if (!isPowerOfTwo(samples) || samples < 8 * std::max(n_max, 1)) {
    throw std::invalid_argument(
        "potentialSpectrumQuadrature: samples must be a power of two >= 8 n_max");
  }
  const std::vector<double> u = samplePotential(loop, samples);
  std::vector<std::complex<double>> coeffs;
  coeffs.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    // U has fundamental frequency 4 pi / T: even bins of the length-T grid.
    coeffs.push_back(periodicDftCoefficient(u, 2 * n));
  }
  return coeffs;
}

double potentialVariation(const TrigLoop& loop, int samples) {
  const std::vector<double> u = samplePotential(loop, samples);
  const double mean = meanOf(u);
  return stdOf(u, mean) / mean;
}

RigidityReport rigidityCheck(const TrigLoop& loop, double tol) {
  const std::vector<PairHarmonics> pairs = pairHarmonics(loop);
  RigidityReport report;
  for (const PairHarmonics& ph : pairs) {
    report.max_C = std::max(report.max_C, ph.C);
  }
  report.rigid = report.max_C <= tol;
  if (report.rigid) {
    report.distances.reserve(pairs.size());
    for (const PairHarmonics& ph : pairs) {
      report.distances.push_back(std::sqrt(ph.A));
    }
  }
  return report;
}

std::optional<long long> findAlignedHarmonic(std::span<const double> theta,
                                             long long k_max) {
  kronecker::Query query;
  query.window = kronecker::Window::kQuarter;
  query.theta.reserve(theta.size());
  for (double th : theta) query.theta.push_back(th / kTwoPi);
  // Doubling bounds keep the scan proportional to the first hit instead of
  // materializing every aligned index up to k_max.
  long long bound = std::min<long long>(16, k_max);
  for (;;) {
    query.k_max = bound;
    const std::vector<kronecker::Hit> hits = kronecker::simultaneousApprox(query);
    if (!hits.empty()) return hits.front().k;
    if (bound == k_max) return std::nullopt;
    bound = std::min(bound * 2, k_max);
  }
}

RigidityCertificate rigidityCertificate(const TrigLoop& loop,
                                        double constancy_tol,
                                        long long k_max) {
  RigidityCertificate cert;
  cert.potential_variation = potentialVariation(loop, 1024);
  if (cert.potential_variation >= constancy_tol) {
    throw HypothesisViolatedError(
        "rigidityCertificate: U(q(t)) is not numerically constant");
  }
  const std::vector<PairHarmonics> pairs = pairHarmonics(loop);
  const RigidityReport rigidity = rigidityCheck(loop);
  cert.rigid = rigidity.rigid;

  std::vector<const PairHarmonics*> active;
  std::vector<double> thetas;
  for (const PairHarmonics& ph : pairs) {
    if (ph.theta_defined && ph.C > kRigidityTol) {
      active.push_back(&ph);
      thetas.push_back(ph.theta);
    }
  }
  if (active.empty()) {
    cert.trivial = true;
    cert.certified = true;
    return cert;
  }

  const std::optional<long long> aligned = findAlignedHarmonic(thetas, k_max);
  if (!aligned) {
    throw SearchExhaustedError(
        "rigidityCertificate: no aligned harmonic at or below k_max");
  }
  cert.harmonic = *aligned;

  for (const PairHarmonics* ph : active) {
    PairEvidence ev;
    ev.j = ph->j;
    ev.k = ph->k;
    ev.theta = ph->theta;
    ev.aligned_frac = kronecker::fractionalPart(
        static_cast<double>(cert.harmonic) * ph->theta / kTwoPi);
    ev.cos_n_theta =
        std::cos(static_cast<double>(cert.harmonic) * ph->theta);
    const SpectralCoefficient sc = fourierCoefficientSeries(*ph, cert.harmonic);
    ev.coefficient = sc.value;
    ev.coefficient_rel = sc.value * std::sqrt(ph->A) / ph->mass_product;
    cert.alignment_sum += ev.coefficient * ev.cos_n_theta;
    cert.max_coefficient_rel =
        std::max(cert.max_coefficient_rel, ev.coefficient_rel);
    // D_rel = C^n (1 + ...) >= C^n, so C <= D_rel^(1/n).
    cert.c_bound = std::max(
        cert.c_bound,
        std::pow(ev.coefficient_rel, 1.0 / static_cast<double>(cert.harmonic)));
    cert.pairs.push_back(ev);
  }

  const int max_spectrum_n = 16;
  if (cert.harmonic <= max_spectrum_n) {
    const auto spectrum = potentialSpectrumQuadrature(
        loop, static_cast<int>(cert.harmonic), kDefaultSpectrumSamples);
    cert.spectrum_magnitude = std::abs(spectrum.back());
  }

  // All D cos(n theta) are non-negative with cos > 0, and their sum is the
  // (vanishing) aligned harmonic of a constant signal, so each D must
  // vanish; numerically the pair distortions are confined below c_bound.
  cert.certified = cert.c_bound < 1e-3;
  return cert;
}

}  // namespace nbody::harmonics
