#include "nbody/variational.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "detail/lbfgs.hpp"
#include "detail/parallel.hpp"

namespace nbody::variational {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool isPowerOfTwo(int x) { return x > 0 && (x & (x - 1)) == 0; }

void requireSamples(int samples, int order) {
  if (!isPowerOfTwo(samples) || samples < 8 * order) {
    throw std::invalid_argument(
        "loop quadrature: samples must be a power of two >= 8 * order");
  }
}

// Shared sampling machinery for one (T, M, samples) geometry: basis
// matrices, forces, potential sums and the packed-coefficient gradient.
struct LoopSampler {
  const MassVector& m;
  double T;
  int order;
  int samples;
  double dt;
  Eigen::MatrixXd cos_basis;  // M x S
  Eigen::MatrixXd sin_basis;  // M x S
  Eigen::VectorXd omega2;     // (2 pi h / T)^2, h = 1..M

  LoopSampler(const MassVector& masses, double period, int ord, int s)
      : m(masses), T(period), order(ord), samples(s), dt(period / s),
        cos_basis(ord, s), sin_basis(ord, s), omega2(ord) {
    for (int h = 1; h <= order; ++h) {
      const double w = kTwoPi * h / T;
      omega2[h - 1] = w * w;
      for (int k = 0; k < samples; ++k) {
        const double t = (k + 0.5) * dt;
        cos_basis(h - 1, k) = std::cos(w * t);
        sin_basis(h - 1, k) = std::sin(w * t);
      }
    }
  }

  // Interleaved positions [x0 y0 x1 y1 ...] at every sample, 2N x S.
  Eigen::MatrixXd positions(const Eigen::MatrixXd& cos_coef,
                            const Eigen::MatrixXd& sin_coef) const {
    return cos_coef * cos_basis + sin_coef * sin_basis;
  }

  // U at one sampled column; returns infinity when the minimum pair
  // distance falls below guard_fraction * scale (guard 0 disables all but
  // the hard degenerate threshold).
  double potentialAt(const Eigen::MatrixXd& p, int col, double guard_fraction,
                     Eigen::MatrixXd* forces) const {
    const int n = m.size();
    double inertia = 0.0;
    for (int i = 0; i < n; ++i) {
      inertia += m[i] * (p(2 * i, col) * p(2 * i, col) +
                         p(2 * i + 1, col) * p(2 * i + 1, col));
    }
    const double body_scale = std::sqrt(inertia / m.total());
    const double cutoff =
        std::max(guard_fraction, kDegenerateDistanceFactor) * body_scale;
    double u = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double dx = p(2 * j, col) - p(2 * i, col);
        const double dy = p(2 * j + 1, col) - p(2 * i + 1, col);
        const double r = std::hypot(dx, dy);
        if (r <= cutoff) return std::numeric_limits<double>::infinity();
        u += m[i] * m[j] / r;
        if (forces != nullptr) {
          const double w = m[i] * m[j] / (r * r * r);
          (*forces)(2 * i, col) += w * dx;
          (*forces)(2 * i + 1, col) += w * dy;
          (*forces)(2 * j, col) -= w * dx;
          (*forces)(2 * j + 1, col) -= w * dy;
        }
      }
    }
    return u;
  }

  double kinetic(const Eigen::MatrixXd& cos_coef,
                 const Eigen::MatrixXd& sin_coef) const {
    double k = 0.0;
    for (int h = 0; h < order; ++h) {
      double w2sum = 0.0;
      for (int i = 0; i < m.size(); ++i) {
        w2sum += m[i] * (cos_coef(2 * i, h) * cos_coef(2 * i, h) +
                         cos_coef(2 * i + 1, h) * cos_coef(2 * i + 1, h) +
                         sin_coef(2 * i, h) * sin_coef(2 * i, h) +
                         sin_coef(2 * i + 1, h) * sin_coef(2 * i + 1, h));
      }
      k += omega2[h] * w2sum;
    }
    return 0.25 * T * k;  // (T/2) * (1/2) * sum
  }

  double action(const Eigen::VectorXd& x, Eigen::VectorXd* grad,
                double guard_fraction) const {
    const int rows = 2 * m.size();
    const Eigen::Map<const Eigen::MatrixXd> cos_coef(x.data(), rows, order);
    const Eigen::Map<const Eigen::MatrixXd> sin_coef(x.data() + rows * order,
                                                     rows, order);
    const Eigen::MatrixXd p = positions(cos_coef, sin_coef);
    Eigen::MatrixXd forces;
    if (grad != nullptr) forces = Eigen::MatrixXd::Zero(rows, samples);
    double pot = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double u =
          potentialAt(p, k, guard_fraction, grad ? &forces : nullptr);
      if (!std::isfinite(u)) return u;
      pot += u;
    }
    pot *= dt;
    const double value = kinetic(cos_coef, sin_coef) + pot;
    if (grad != nullptr) {
      grad->resize(2 * rows * order);
      Eigen::Map<Eigen::MatrixXd> gc(grad->data(), rows, order);
      Eigen::Map<Eigen::MatrixXd> gs(grad->data() + rows * order, rows, order);
      gc = dt * forces * cos_basis.transpose();
      gs = dt * forces * sin_basis.transpose();
      for (int h = 0; h < order; ++h) {
        for (int i = 0; i < m.size(); ++i) {
          const double kw = 0.5 * T * m[i] * omega2[h];
          gc(2 * i, h) += kw * cos_coef(2 * i, h);
          gc(2 * i + 1, h) += kw * cos_coef(2 * i + 1, h);
          gs(2 * i, h) += kw * sin_coef(2 * i, h);
          gs(2 * i + 1, h) += kw * sin_coef(2 * i + 1, h);
        }
      }
    }
    return value;
  }
};

FourierLoop randomStartLoop(const MassVector& m, double period, int order,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  // Radius where rotation at 2 pi / T roughly balances gravity.
  const double radius =
      std::cbrt(m.total() * (period / kTwoPi) * (period / kTwoPi));
  const int rows = 2 * m.size();
  for (int attempt = 0; attempt < 200; ++attempt) {
    Eigen::MatrixXd c(rows, order), s(rows, order);
    for (int h = 0; h < order; ++h) {
      const double amp = radius / (1.0 + 3.0 * h * h);
      for (int r = 0; r < rows; ++r) {
        c(r, h) = amp * gauss(rng);
        s(r, h) = amp * gauss(rng);
      }
    }
    FourierLoop loop(m, period, order, std::move(c), std::move(s));
    bool ok = true;
    const int probes = 64;
    for (int k = 0; k < probes && ok; ++k) {
      const Configuration q = loop.configurationAt((k + 0.5) * period / probes);
      ok = q.minPairDistance() > 0.05 * scale(m, q);
    }
    if (ok) return loop;
  }
  throw NoConvergenceError("minimizeAction: could not draw a collision-free start");
}

FourierLoop perturbedRelativeEquilibrium(
    const central::CentralConfigResult& reference, double period,
    int order, std::mt19937_64& rng) {
  FourierLoop base = trigToFourier(buildRelativeEquilibrium(reference, period));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * base.bodies(), order);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * base.bodies(), order);
  c.col(0) = base.cosCoef().col(0);
  s.col(0) = base.sinCoef().col(0);
  const double jitter = 0.02 * base.cosCoef().col(0).norm();
  for (int h = 0; h < order; ++h) {
    for (int r = 0; r < c.rows(); ++r) {
      c(r, h) += jitter * gauss(rng);
      s(r, h) += jitter * gauss(rng);
    }
  }
  return FourierLoop(base.masses(), period, order, std::move(c), std::move(s));
}

}  // namespace

FourierLoop::FourierLoop(MassVector masses, double period, int order,
                         Eigen::MatrixXd cos_coef, Eigen::MatrixXd sin_coef)
    : masses_(std::move(masses)), period_(period), order_(order),
      cos_coef_(std::move(cos_coef)), sin_coef_(std::move(sin_coef)) {
  if (!(period_ > 0.0) || !std::isfinite(period_)) {
    throw std::invalid_argument("FourierLoop: period must be positive");
  }
  if (order_ < 1) {
    throw std::invalid_argument("FourierLoop: order must be at least 1");
  }
  const Eigen::Index rows = 2 * static_cast<Eigen::Index>(masses_.size());
  if (cos_coef_.rows() != rows || sin_coef_.rows() != rows ||
      cos_coef_.cols() != order_ || sin_coef_.cols() != order_) {
    throw std::invalid_argument("FourierLoop: coefficient shapes must be 2N x M");
  }
  if (!cos_coef_.allFinite() || !sin_coef_.allFinite()) {
    throw std::invalid_argument("FourierLoop: coefficients must be finite");
  }
}

Eigen::Vector2d FourierLoop::alpha(int body, int h) const {
  return {cos_coef_(2 * body, h - 1), cos_coef_(2 * body + 1, h - 1)};
}

Eigen::Vector2d FourierLoop::beta(int body, int h) const {
  return {sin_coef_(2 * body, h - 1), sin_coef_(2 * body + 1, h - 1)};
}

Configuration FourierLoop::configurationAt(double t) const {
  const int n = bodies();
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(n, 2);
  for (int h = 1; h <= order_; ++h) {
    const double phase = kTwoPi * h * t / period_;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    for (int i = 0; i < n; ++i) {
      pts(i, 0) += c * cos_coef_(2 * i, h - 1) + s * sin_coef_(2 * i, h - 1);
      pts(i, 1) += c * cos_coef_(2 * i + 1, h - 1) + s * sin_coef_(2 * i + 1, h - 1);
    }
  }
  return Configuration(2, std::move(pts));
}

Configuration FourierLoop::velocityAt(double t) const {
  const int n = bodies();
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(n, 2);
  for (int h = 1; h <= order_; ++h) {
    const double w = kTwoPi * h / period_;
    const double phase = w * t;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    for (int i = 0; i < n; ++i) {
      pts(i, 0) += w * (-s * cos_coef_(2 * i, h - 1) + c * sin_coef_(2 * i, h - 1));
      pts(i, 1) +=
          w * (-s * cos_coef_(2 * i + 1, h - 1) + c * sin_coef_(2 * i + 1, h - 1));
    }
  }
  return Configuration(2, std::move(pts));
}

Configuration FourierLoop::accelerationAt(double t) const {
  const int n = bodies();
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(n, 2);
  for (int h = 1; h <= order_; ++h) {
    const double w = kTwoPi * h / period_;
    const double phase = w * t;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    for (int i = 0; i < n; ++i) {
      pts(i, 0) -=
          w * w * (c * cos_coef_(2 * i, h - 1) + s * sin_coef_(2 * i, h - 1));
      pts(i, 1) -= w * w * (c * cos_coef_(2 * i + 1, h - 1) +
                            s * sin_coef_(2 * i + 1, h - 1));
    }
  }
  return Configuration(2, std::move(pts));
}

double FourierLoop::kineticIntegral() const {
  double k = 0.0;
  for (int h = 1; h <= order_; ++h) {
    const double w = kTwoPi * h / period_;
    for (int i = 0; i < bodies(); ++i) {
      k += masses_[i] * w * w *
           (alpha(i, h).squaredNorm() + beta(i, h).squaredNorm());
    }
  }
  return 0.25 * period_ * k;
}

double FourierLoop::inertiaIntegral() const {
  double v = 0.0;
  for (int h = 1; h <= order_; ++h) {
    for (int i = 0; i < bodies(); ++i) {
      v += masses_[i] * (alpha(i, h).squaredNorm() + beta(i, h).squaredNorm());
    }
  }
  return 0.5 * period_ * v;
}

double FourierLoop::firstHarmonicEnergyFraction() const {
  double total = 0.0;
  double first = 0.0;
  for (int h = 1; h <= order_; ++h) {
    for (int i = 0; i < bodies(); ++i) {
      const double e = masses_[i] * h * h *
                       (alpha(i, h).squaredNorm() + beta(i, h).squaredNorm());
      total += e;
      if (h == 1) first += e;
    }
  }
  return total > 0.0 ? first / total : 0.0;
}

Eigen::VectorXd FourierLoop::packed() const {
  const Eigen::Index block = cos_coef_.size();
  Eigen::VectorXd x(2 * block);
  x.head(block) = Eigen::Map<const Eigen::VectorXd>(cos_coef_.data(), block);
  x.tail(block) = Eigen::Map<const Eigen::VectorXd>(sin_coef_.data(), block);
  return x;
}

FourierLoop FourierLoop::fromPacked(MassVector masses, double period, int order,
                                    const Eigen::VectorXd& x) {
  const Eigen::Index rows = 2 * static_cast<Eigen::Index>(masses.size());
  if (x.size() != 2 * rows * order) {
    throw std::invalid_argument("FourierLoop::fromPacked: bad vector length");
  }
  Eigen::MatrixXd c = Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, order);
  Eigen::MatrixXd s =
      Eigen::Map<const Eigen::MatrixXd>(x.data() + rows * order, rows, order);
  return FourierLoop(std::move(masses), period, order, std::move(c),
                     std::move(s));
}

double actionFunctional(const FourierLoop& loop, int samples) {
  requireSamples(samples, loop.order());
  const LoopSampler sampler(loop.masses(), loop.period(), loop.order(), samples);
  const double value = sampler.action(loop.packed(), nullptr, 0.0);
  if (!std::isfinite(value)) {
    throw CollisionError("actionFunctional: degenerate pair at a sample time");
  }
  return value;
}

Eigen::VectorXd actionGradient(const FourierLoop& loop, int samples) {
  requireSamples(samples, loop.order());
  const LoopSampler sampler(loop.masses(), loop.period(), loop.order(), samples);
  Eigen::VectorXd grad;
  const double value = sampler.action(loop.packed(), &grad, 0.0);
  if (!std::isfinite(value)) {
    throw CollisionError("actionGradient: degenerate pair at a sample time");
  }
  return grad;
}

double wirtingerGap(const FourierLoop& loop) {
  const double w1 = kTwoPi / loop.period();
  double gap = 0.0;
  for (int h = 1; h <= loop.order(); ++h) {
    const double wh = kTwoPi * h / loop.period();
    double e = 0.0;
    for (int i = 0; i < loop.bodies(); ++i) {
      e += loop.masses()[i] *
           (loop.alpha(i, h).squaredNorm() + loop.beta(i, h).squaredNorm());
    }
    gap += (wh * wh - w1 * w1) * e;
  }
  return 0.25 * loop.period() * gap;
}

double lowerBound(double period, double inf_iu2) {
  if (!(period > 0.0) || !(inf_iu2 > 0.0)) {
    throw std::invalid_argument("lowerBound: period and inf must be positive");
  }
  return 3.0 *
         std::cbrt(inf_iu2 * std::numbers::pi * std::numbers::pi / 2.0) *
         std::cbrt(period);
}

double amgmPointwiseGap(const FourierLoop& loop, double t) {
  const Configuration q = loop.configurationAt(t);
  const double u = potential(loop.masses(), q);
  const double inertia = momentOfInertia(loop.masses(), q);
  const double w = kTwoPi / loop.period();
  return 0.5 * w * w * inertia + u -
         3.0 * std::cbrt(0.125 * w * w * inertia * u * u);
}

ActionReport classifyMinimizer(const FourierLoop& loop,
                               const central::CentralConfigResult& reference,
                               const ClassifyTols& tols, int samples) {
  ActionReport report;
  report.action = actionFunctional(loop, samples);
  report.lower_bound = lowerBound(loop.period(), reference.value);
  report.gap = report.action - report.lower_bound;
  report.first_harmonic_fraction = loop.firstHarmonicEnergyFraction();

  const double w = kTwoPi / loop.period();
  double virial = 0.0;
  double shape = -std::numeric_limits<double>::infinity();
  double com_sq = 0.0;
  const double dt = loop.period() / samples;
  for (int k = 0; k < samples; ++k) {
    const Configuration q = loop.configurationAt((k + 0.5) * dt);
    const double u = potential(loop.masses(), q);
    const double inertia = momentOfInertia(loop.masses(), q);
    virial = std::max(virial, std::abs(w * w * inertia - u) / u);
    shape = std::max(shape,
                     (inertia * u * u - reference.value) / reference.value);
    const Eigen::RowVector2d com =
        loop.masses().values().transpose() * q.points / loop.masses().total();
    com_sq += com.squaredNorm();
  }
  report.virial_gap = virial;
  report.shape_gap = shape;
  report.centroid_rms = std::sqrt(com_sq / samples);
  report.relative_equilibrium =
      report.first_harmonic_fraction > 1.0 - tols.first_harmonic &&
      report.virial_gap < tols.virial && report.shape_gap < tols.shape;
  return report;
}

ActionMinimum minimizeAction(const MassVector& m, double period, int order,
                             const ActionMinimizeOptions& opts) {
  if (m.size() < 2) {
    throw std::invalid_argument("minimizeAction: at least two bodies required");
  }
  if (order < 1) {
    throw std::invalid_argument("minimizeAction: order must be at least 1");
  }
  requireSamples(opts.samples, order);
  if (opts.restarts < 1) {
    throw std::invalid_argument("minimizeAction: restarts must be >= 1");
  }

  central::CentralConfigResult reference = central::minimizeIU2(m, 2);

  const LoopSampler sampler(m, period, order, opts.samples);

  // Descend in coordinates rescaled by the square root of the kinetic
  // quadratic form (z = sqrt(T m_i / 2) w_h x): the kinetic Hessian becomes
  // the identity and the harmonic-index ill-conditioning disappears.
  const int rows = 2 * m.size();
  Eigen::VectorXd precond(2 * rows * order);
  for (int block = 0; block < 2; ++block) {
    for (int h = 0; h < order; ++h) {
      for (int i = 0; i < m.size(); ++i) {
        const double d =
            std::sqrt(0.5 * period * m[i] * sampler.omega2[h]);
        precond[block * rows * order + h * rows + 2 * i] = d;
        precond[block * rows * order + h * rows + 2 * i + 1] = d;
      }
    }
  }
  const auto fg = [&sampler, &opts, &precond](const Eigen::VectorXd& z,
                                              Eigen::VectorXd* grad) {
    const Eigen::VectorXd x = z.cwiseQuotient(precond);
    const double value = sampler.action(x, grad, opts.collision_fraction);
    if (grad != nullptr && std::isfinite(value)) {
      *grad = grad->cwiseQuotient(precond);
    }
    return value;
  };
  // Convergence is stated on the raw coefficient gradient; a z-space norm
  // below tol / max(d) guarantees it.
  const double tol_z = opts.tol_grad / precond.maxCoeff();

  std::mt19937_64 rng(opts.seed);
  std::vector<Eigen::VectorXd> starts;
  starts.reserve(static_cast<std::size_t>(opts.restarts));
  for (int s = 0; s < opts.restarts; ++s) {
    if (s == 0 && opts.initial.has_value()) {
      if (opts.initial->bodies() != m.size() || opts.initial->order() != order) {
        throw std::invalid_argument("minimizeAction: initial loop shape mismatch");
      }
      starts.push_back(opts.initial->packed().cwiseProduct(precond));
    } else {
      starts.push_back(
          randomStartLoop(m, period, order, rng).packed().cwiseProduct(precond));
    }
  }

  detail::LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.tol_grad = tol_z;

  std::vector<detail::LbfgsResult> runs(starts.size());
  detail::parallelForIndex(opts.restarts, [&](int i) {
    runs[static_cast<std::size_t>(i)] =
        detail::minimizeLbfgs(fg, starts[static_cast<std::size_t>(i)], lo);
  });

  // A collision-guard abort gets one retry from a jittered rigid rotation.
  int aborted = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].line_search_failed && !runs[i].converged) {
      FourierLoop retry =
          perturbedRelativeEquilibrium(reference, period, order, rng);
      runs[i] = detail::minimizeLbfgs(fg, retry.packed().cwiseProduct(precond), lo);
      if (runs[i].line_search_failed && !runs[i].converged) ++aborted;
    }
  }

  const detail::LbfgsResult* best = nullptr;
  for (const detail::LbfgsResult& r : runs) {
    if (!r.converged) continue;
    if (best == nullptr || r.value < best->value) best = &r;
  }
  if (best == nullptr) {
    if (aborted == opts.restarts) {
      throw CollisionAbortError(
          "minimizeAction: every restart hit the collision guard");
    }
    throw NoConvergenceError("minimizeAction: no restart met the tolerance");
  }

  ActionMinimum out{
      FourierLoop::fromPacked(m, period, order, best->x.cwiseQuotient(precond)),
      ActionReport{},
      reference,
      best->iterations,
      opts.restarts,
      true,
  };
  out.report = classifyMinimizer(out.loop, reference, {}, opts.samples);
  return out;
}

harmonics::TrigLoop buildRelativeEquilibrium(
    const central::CentralConfigResult& central_result,
    std::optional<double> period) {
  // Polish the configuration so the loop satisfies the equations of motion
  // to rounding regardless of how tightly the caller converged.
  central::MinimizeOptions polish_opts;
  polish_opts.tol_grad = 1e-13;
  polish_opts.max_iters = 300;
  central::CentralConfigResult polished =
      central::refineFrom(central_result.masses, central_result.q, polish_opts);
  // Refinement renormalizes to I = 1; restore the caller's scale, which
  // fixes the natural period.
  polished.q.points *= std::sqrt(
      momentOfInertia(central_result.masses, central_result.q));
  const central::CentralConfigResult& src =
      polished.residual <= central_result.residual ? polished : central_result;

  const MassVector& m = src.masses;
  Eigen::MatrixXd q0(m.size(), 2);
  if (src.q.dim == 1) {
    q0.col(0) = src.q.points.col(0);
    q0.col(1).setZero();
  } else if (src.q.dim == 2) {
    q0 = src.q.points;
  } else {
    throw std::invalid_argument("buildRelativeEquilibrium: dim must be 1 or 2");
  }

  double lambda =
      potential(m, Configuration(2, q0)) / momentOfInertia(m, Configuration(2, q0));
  double T = kTwoPi / std::sqrt(lambda);
  if (period.has_value()) {
    if (!(*period > 0.0)) {
      throw std::invalid_argument("buildRelativeEquilibrium: period must be positive");
    }
    // lambda(c q) = lambda / c^3: rescale until sqrt(lambda) = 2 pi / T.
    const double w = kTwoPi / *period;
    q0 *= std::cbrt(lambda / (w * w));
    T = *period;
  }

  Eigen::MatrixXd b(m.size(), 2);
  b.col(0) = -q0.col(1);  // 90-degree rotation of each position
  b.col(1) = q0.col(0);
  return harmonics::TrigLoop(m, 2, std::move(q0), std::move(b), T);
}

FourierLoop trigToFourier(const harmonics::TrigLoop& loop) {
  if (loop.dim() > 2) {
    throw std::invalid_argument("trigToFourier: loop must be planar");
  }
  const int n = loop.bodies();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(2 * n, 1);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(2 * n, 1);
  for (int i = 0; i < n; ++i) {
    c(2 * i, 0) = loop.cosVectors()(i, 0);
    s(2 * i, 0) = loop.sinVectors()(i, 0);
    if (loop.dim() == 2) {
      c(2 * i + 1, 0) = loop.cosVectors()(i, 1);
      s(2 * i + 1, 0) = loop.sinVectors()(i, 1);
    }
  }
  return FourierLoop(loop.masses(), loop.period(), 1, std::move(c), std::move(s));
}

}  // namespace nbody::variational
