#pragma once

#include <optional>
#include <span>
#include <vector>

namespace nbody::kronecker {

// Acceptance window for the fractional parts {k theta_i}.
enum class Window {
  kNearInteger,  // {k theta_i} < eps or > 1 - eps for every i
  kQuarter,      // {k theta_i} in [0, 1/4) or (3/4, 1) for every i
};

struct Query {
  std::vector<double> theta;
  double epsilon = 0.01;  // ignored for Window::kQuarter (fixed at 1/4)
  long long k_max = 1'000'000;
  Window window = Window::kNearInteger;
};

struct Hit {
  long long k = 0;
  std::vector<double> deviations;  // min({k theta_i}, 1 - {k theta_i}) per i
};

// x - [x] with [x] the unique integer satisfying x - 1 < [x] <= x; the
// result lies in [0, 1) even when rounding pushes x - floor(x) to 1.
double fractionalPart(double x);

// Distance of x to the nearest integer, min({x}, 1 - {x}).
double deviationFromInteger(double x);

// Distance of two points of the unit circle [0, 1).
double wrapDistance(double a, double b);

// Linear scan over k = 1..k_max collecting every k whose multiples land in
// the window simultaneously for all theta_i. An empty result is a normal
// outcome for finite k_max.
std::vector<Hit> simultaneousApprox(const Query& query);

// Smallest k <= k_max with max_i wrapDistance({k theta_i}, target_i) < eps.
std::optional<long long> densenessWitness(std::span<const double> theta,
                                          std::span<const double> target,
                                          double epsilon, long long k_max);

// Denominators of the continued-fraction convergents of theta, ascending,
// truncated at k_max.
std::vector<long long> convergentDenominators(double theta, long long k_max);

// Fast path for a single theta: candidates are convergent denominators and
// their small multiples, each re-validated against the near-integer window.
// May miss semiconvergent hits; use simultaneousApprox for completeness.
std::vector<Hit> singleThetaHitsFast(double theta, double epsilon,
                                     long long k_max);

}  // namespace nbody::kronecker
