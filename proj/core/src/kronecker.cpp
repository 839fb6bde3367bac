#include "nbody/kronecker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nbody::kronecker {

namespace {

void validate(const Query& q) {
  if (q.theta.empty()) {
    throw std::invalid_argument("kronecker: theta list must be non-empty");
  }
  for (double t : q.theta) {
    if (!std::isfinite(t)) {
      throw std::invalid_argument("kronecker: theta must be finite");
    }
  }
  if (q.window == Window::kNearInteger &&
      !(q.epsilon > 0.0 && q.epsilon < 0.5)) {
    throw std::invalid_argument("kronecker: epsilon must lie in (0, 1/2)");
  }
  if (q.k_max < 1) {
    throw std::invalid_argument("kronecker: k_max must be at least 1");
  }
}

bool inWindow(double frac, double epsilon, Window window) {
  if (window == Window::kQuarter) return frac < 0.25 || frac > 0.75;
  return frac < epsilon || frac > 1.0 - epsilon;
}

}  // namespace

double fractionalPart(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("fractionalPart: x must be finite");
  }
  double f = x - std::floor(x);
  if (f >= 1.0) f = 0.0;  // rounding of x - floor(x) for tiny negative x
  return f;
}

double deviationFromInteger(double x) {
  const double f = fractionalPart(x);
  return std::min(f, 1.0 - f);
}

double wrapDistance(double a, double b) {
  const double d = std::abs(fractionalPart(a) - fractionalPart(b));
  return std::min(d, 1.0 - d);
}

std::vector<Hit> simultaneousApprox(const Query& query) {
  validate(query);
  std::vector<Hit> hits;
  const int n = static_cast<int>(query.theta.size());
  for (long long k = 1; k <= query.k_max; ++k) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      ok = inWindow(fractionalPart(static_cast<double>(k) * query.theta[i]),
                    query.epsilon, query.window);
    }
    if (!ok) continue;
    Hit h;
    h.k = k;
    h.deviations.reserve(n);
    for (int i = 0; i < n; ++i) {
      h.deviations.push_back(
          deviationFromInteger(static_cast<double>(k) * query.theta[i]));
    }
    hits.push_back(std::move(h));
  }
  return hits;
}

std::optional<long long> densenessWitness(std::span<const double> theta,
                                          std::span<const double> target,
                                          double epsilon, long long k_max) {
  if (theta.size() != target.size() || theta.empty()) {
    throw std::invalid_argument("densenessWitness: theta/target size mismatch");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("densenessWitness: epsilon must be positive");
  }
  for (long long k = 1; k <= k_max; ++k) {
    bool ok = true;
    for (std::size_t i = 0; i < theta.size() && ok; ++i) {
      ok = wrapDistance(static_cast<double>(k) * theta[i], target[i]) < epsilon;
    }
    if (ok) return k;
  }
  return std::nullopt;
}

std::vector<long long> convergentDenominators(double theta, long long k_max) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("convergentDenominators: theta must be finite");
  }
  std::vector<long long> dens;
  double y = std::abs(theta);
  long long q_prev = 1;  // k_{-2}
  long long q_cur = 0;   // k_{-1}
  // Standard continued-fraction recursion on the denominators.
  for (int step = 0; step < 64; ++step) {
    const double a_floor = std::floor(y);
    if (a_floor > static_cast<double>(std::numeric_limits<long long>::max())) break;
    const long long a = static_cast<long long>(a_floor);
    long long q_next;
    if (__builtin_mul_overflow(a, q_cur, &q_next) ||
        __builtin_add_overflow(q_next, q_prev, &q_next)) {
      break;
    }
    q_prev = q_cur;
    q_cur = q_next;
    if (step > 0 || q_cur > 0) {
      if (q_cur > k_max) break;
      if (dens.empty() || dens.back() != q_cur) dens.push_back(q_cur);
    }
    const double rem = y - a_floor;
    if (rem < 1e-15) break;  // theta is (numerically) rational
    y = 1.0 / rem;
  }
  return dens;
}

std::vector<Hit> singleThetaHitsFast(double theta, double epsilon,
                                     long long k_max) {
  if (!(epsilon > 0.0 && epsilon < 0.5)) {
    throw std::invalid_argument("singleThetaHitsFast: epsilon in (0, 1/2)");
  }
  std::vector<long long> candidates;
  for (long long q : convergentDenominators(theta, k_max)) {
    const double dev = deviationFromInteger(static_cast<double>(q) * theta);
    // Multiples of a convergent denominator drift by ~dev per step, so only
    // the first ~eps/dev of them can stay inside the window.
    const long long reps =
        dev > 0.0 ? std::min<long long>(k_max / q,
                                        static_cast<long long>(epsilon / dev) + 1)
                  : k_max / q;
    for (long long mult = 1; mult <= reps; ++mult) {
      candidates.push_back(mult * q);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  std::vector<Hit> hits;
  for (long long k : candidates) {
    const double dev = deviationFromInteger(static_cast<double>(k) * theta);
    if (dev < epsilon) hits.push_back(Hit{k, {dev}});
  }
  return hits;
}

}  // namespace nbody::kronecker
