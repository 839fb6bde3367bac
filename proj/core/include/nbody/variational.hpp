#pragma once

#include <optional>

#include "nbody/central_config.hpp"
#include "nbody/harmonics.hpp"
#include "nbody/mechanics.hpp"

namespace nbody::variational {

// Planar loop with zero time mean, stored as a truncated Fourier series
// with no constant term:
//   q_i(t) = sum_{h=1..M} alpha_{i,h} cos(2 pi h t / T) + beta_{i,h} sin(...).
// Coefficients are stored as (2N) x M matrices with body i's x and y
// components in rows 2i and 2i+1.
class FourierLoop {
 public:
  FourierLoop(MassVector masses, double period, int order,
              Eigen::MatrixXd cos_coef, Eigen::MatrixXd sin_coef);

  const MassVector& masses() const { return masses_; }
  double period() const { return period_; }
  int order() const { return order_; }
  int bodies() const { return static_cast<int>(cos_coef_.rows()) / 2; }
  const Eigen::MatrixXd& cosCoef() const { return cos_coef_; }
  const Eigen::MatrixXd& sinCoef() const { return sin_coef_; }

  Eigen::Vector2d alpha(int body, int h) const;  // h = 1..M
  Eigen::Vector2d beta(int body, int h) const;

  Configuration configurationAt(double t) const;
  Configuration velocityAt(double t) const;
  Configuration accelerationAt(double t) const;

  // Exact Parseval forms: integral over one period of the kinetic energy,
  // and of the moment of inertia.
  double kineticIntegral() const;
  double inertiaIntegral() const;

  // Energy-weighted share of the first harmonic in
  // sum_i m_i sum_h h^2 (|alpha|^2 + |beta|^2); 1 for pure first harmonics.
  double firstHarmonicEnergyFraction() const;

  // Flat coefficient vector [vec(cos); vec(sin)], and its inverse.
  Eigen::VectorXd packed() const;
  static FourierLoop fromPacked(MassVector masses, double period, int order,
                                const Eigen::VectorXd& x);

 private:
  MassVector masses_;
  double period_;
  int order_;
  Eigen::MatrixXd cos_coef_, sin_coef_;
};

// Kinetic part in closed form plus midpoint quadrature of U over one
// period. samples must be a power of two >= 8 * order.
double actionFunctional(const FourierLoop& loop, int samples = 1024);

// Analytic gradient of actionFunctional with respect to packed().
Eigen::VectorXd actionGradient(const FourierLoop& loop, int samples = 1024);

// int |q'|^2-type surplus over the first-harmonic bound:
//   int sum m |q.|^2/2 dt - (2 pi / T)^2 int sum m |q|^2/2 dt,
// computed exactly from coefficients. Non-negative; zero iff only h = 1
// harmonics are present.
double wirtingerGap(const FourierLoop& loop);

// 3 (inf_IU2 pi^2 / 2)^(1/3) T^(1/3): the action floor over mean-zero
// planar loops, in terms of the IU^2 infimum.
double lowerBound(double period, double inf_iu2);

// Pointwise surplus of omega^2 I / 2 + U over 3 (omega^2 I U^2 / 8)^(1/3);
// zero exactly when omega^2 I(q(t)) = U(q(t)).
double amgmPointwiseGap(const FourierLoop& loop, double t);

struct ClassifyTols {
  double first_harmonic = 1e-6;  // require fraction > 1 - this
  double virial = 1e-6;          // max_t |omega^2 I - U| / U
  double shape = 1e-6;           // max_t (I U^2 - inf) / inf
};

struct ActionReport {
  double action = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;  // action - lower_bound
  double first_harmonic_fraction = 0.0;
  double virial_gap = 0.0;
  double shape_gap = 0.0;
  // RMS of the mass-weighted centroid over the period. Purely diagnostic:
  // the minimization does not constrain it, but any centroid motion only
  // adds kinetic cost, so minimizers drive it to zero on their own.
  double centroid_rms = 0.0;
  bool relative_equilibrium = false;  // all three conditions within tols
};

// Evaluates the three equality conditions of the lower-bound chain against
// a reference IU^2 minimizer.
ActionReport classifyMinimizer(const FourierLoop& loop,
                               const central::CentralConfigResult& reference,
                               const ClassifyTols& tols = {},
                               int samples = 1024);

struct ActionMinimizeOptions {
  int samples = 1024;
  int max_iters = 6000;
  double tol_grad = 1e-9;  // norm of the packed coefficient gradient
  int restarts = 8;
  unsigned long long seed = 0;
  double collision_fraction = 0.05;  // line-search guard, fraction of scale
  std::optional<FourierLoop> initial;  // replaces the first start
};

struct ActionMinimum {
  FourierLoop loop;
  ActionReport report;
  central::CentralConfigResult reference;  // IU^2 minimizer used for bounds
  int iterations = 0;
  int restarts_used = 0;
  bool converged = false;
};

// Direct minimization of the action over the truncated coefficient space.
// Throws NoConvergenceError when no restart meets tol_grad and
// CollisionAbortError when every restart is stopped by the collision guard.
ActionMinimum minimizeAction(const MassVector& m, double period, int order,
                             const ActionMinimizeOptions& opts = {});

// Rigidly rotating loop q_i(t) = q_i cos(wt) + J q_i sin(wt) built from a
// central configuration, with w^2 = lambda = U/I. When a period is
// requested the configuration is rescaled (lambda scales as c^-3) so that
// 2 pi / T equals w. The result satisfies the equations of motion to
// rounding and passes rigidityCheck.
harmonics::TrigLoop buildRelativeEquilibrium(
    const central::CentralConfigResult& central,
    std::optional<double> period = {});

// Exact embedding of a one-frequency loop at order 1 (dim 1 loops are
// placed on the x-axis of the plane).
FourierLoop trigToFourier(const harmonics::TrigLoop& loop);

}  // namespace nbody::variational
