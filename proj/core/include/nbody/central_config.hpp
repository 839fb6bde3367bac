#pragma once

#include "nbody/mechanics.hpp"

namespace nbody::central {

struct MinimizeOptions {
  int starts = 32;
  int max_iters = 600;
  double tol_grad = 1e-10;     // projected gradient norm
  double tol_central = 1e-8;   // centralConfigResidual
  unsigned long long seed = 0;
};

// Best minimizer of I(q) U(q)^2 found over the multi-start search. q is
// normalized to I = 1, centered, and rotation-fixed (body 1 on the positive
// x-axis, body 2's y-coordinate non-negative).
struct CentralConfigResult {
  MassVector masses;
  Configuration q;
  double value = 0.0;     // min of I U^2
  double lambda = 0.0;    // U / I at q
  double residual = 0.0;  // centralConfigResidual(q)
  bool converged = false;
  int starts_used = 0;
};

// I(q) U(q)^2: scale- and rotation-invariant; its critical points on the
// centered collision-free configurations are the central configurations.
double objectiveIU2(const MassVector& m, const Configuration& q);

// Full-coordinate gradient U^2 grad I + 2 I U grad U.
Configuration gradientIU2(const MassVector& m, const Configuration& q);

// Removes the component along rigid translations weighted by the center-of-
// mass constraint (per axis: g_i -> g_i - m_i (sum_j m_j g_j) / sum_j m_j^2).
Configuration projectComTangent(const MassVector& m, const Configuration& grad);

// Multi-start descent. Throws NoConvergenceError when no start meets both
// tolerances; throws std::invalid_argument for N < 2 or dim outside {1, 2}.
CentralConfigResult minimizeIU2(const MassVector& m, int dim,
                                const MinimizeOptions& opts = {});

// Single descent from a given configuration (used to polish results).
CentralConfigResult refineFrom(const MassVector& m, const Configuration& q0,
                               const MinimizeOptions& opts = {});

enum class DimensionOrdering {
  kPlanarLower,     // inf over d=2 strictly below inf over d=1
  kEqual,           // equal within tolerance (always the case for N = 2)
  kCollinearLower,  // would contradict the planar-vs-collinear inequality
};

struct DimensionComparison {
  double inf_d1 = 0.0;
  double inf_d2 = 0.0;
  DimensionOrdering ordering = DimensionOrdering::kEqual;
};

DimensionComparison compareDimensions(const MassVector& m,
                                      const MinimizeOptions& opts = {});

}  // namespace nbody::central
