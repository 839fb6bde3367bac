#pragma once

#include <stdexcept>
#include <string>

namespace nbody {

// A pairwise distance reached the degenerate threshold.
class CollisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two bodies coincide for every t of a loop (pair amplitude A = 0).
class DegeneratePairError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No start of an iterative minimization met its tolerances.
class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every restart of a loop minimization was driven into the collision guard.
class CollisionAbortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A certificate was requested for data that violates its hypothesis.
class HypothesisViolatedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bounded integer search ended without a witness.
class SearchExhaustedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nbody
