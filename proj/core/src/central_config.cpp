#include "nbody/central_config.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "detail/lbfgs.hpp"
#include "detail/parallel.hpp"

namespace nbody::central {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd& pts) {
  return Eigen::Map<const Eigen::VectorXd>(pts.data(), pts.size());
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& x, int bodies, int dim) {
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), bodies, dim);
}

// Objective on raw coordinates with the center-of-mass projection folded in:
// translations become exactly flat directions and the reported gradient is
// automatically tangent to the constraint.
detail::ObjectiveFn makeObjective(const MassVector& m, int bodies, int dim) {
  return [&m, bodies, dim](const Eigen::VectorXd& x,
                           Eigen::VectorXd* grad) -> double {
    Configuration q = projectCenterOfMass(
        m, Configuration(dim, unflatten(x, bodies, dim)));
    if (!isCollisionFree(m, q)) {
      return std::numeric_limits<double>::infinity();
    }
    if (grad == nullptr) return objectiveIU2(m, q);
    const Configuration g = projectComTangent(m, gradientIU2(m, q));
    *grad = flatten(g.points);
    return objectiveIU2(m, q);
  };
}

// I = 1, centered, first body on the positive x-axis, second body's
// y-coordinate non-negative (reflection tie-break). d = 1 uses the sign of
// the first nonzero coordinate instead of a rotation.
Configuration normalizeGauge(const MassVector& m, const Configuration& q_in) {
  Configuration q = projectCenterOfMass(m, q_in);
  const double inertia = momentOfInertia(m, q);
  q.points /= std::sqrt(inertia);

  if (q.dim == 1) {
    for (int i = 0; i < q.bodies(); ++i) {
      if (std::abs(q.points(i, 0)) > 1e-12) {
        if (q.points(i, 0) < 0.0) q.points = -q.points;
        break;
      }
    }
    return q;
  }
  if (q.dim == 2) {
    int anchor = -1;
    for (int i = 0; i < q.bodies(); ++i) {
      if (q.points.row(i).norm() > 1e-12) {
        anchor = i;
        break;
      }
    }
    if (anchor >= 0) {
      const double angle = std::atan2(q.points(anchor, 1), q.points(anchor, 0));
      Eigen::Matrix2d rot;
      rot << std::cos(-angle), -std::sin(-angle),
             std::sin(-angle),  std::cos(-angle);
      q.points = q.points * rot.transpose();
    }
    for (int i = 0; i < q.bodies(); ++i) {
      if (i == anchor) continue;
      if (std::abs(q.points(i, 1)) > 1e-12) {
        if (q.points(i, 1) < 0.0) q.points.col(1) = -q.points.col(1);
        break;
      }
    }
  }
  return q;
}

CentralConfigResult finalize(const MassVector& m, const Configuration& q_raw,
                             double grad_norm, const MinimizeOptions& opts,
                             int starts_used) {
  Configuration q = normalizeGauge(m, q_raw);
  CentralConfigResult res{m, q};
  const double u = potential(m, q);
  res.value = u * u;  // I = 1 after normalization
  res.lambda = u;
  res.residual = centralConfigResidual(m, q);
  res.converged = grad_norm < opts.tol_grad && res.residual < opts.tol_central;
  res.starts_used = starts_used;
  return res;
}

Configuration randomStart(const MassVector& m, int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = m.size();
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) pts(i, d) = gauss(rng);
    }
    Configuration q = projectCenterOfMass(m, Configuration(dim, std::move(pts)));
    const double inertia = momentOfInertia(m, q);
    if (inertia <= 0.0) continue;
    q.points /= std::sqrt(inertia);
    if (q.minPairDistance() >= 0.05 * scale(m, q)) return q;
  }
  throw NoConvergenceError("minimizeIU2: could not draw a collision-free start");
}

}  // namespace

double objectiveIU2(const MassVector& m, const Configuration& q) {
  const double u = potential(m, q);
  return momentOfInertia(m, q) * u * u;
}

Configuration gradientIU2(const MassVector& m, const Configuration& q) {
  const double u = potential(m, q);
  const double inertia = momentOfInertia(m, q);
  const Configuration gu = potentialGradient(m, q);
  Eigen::MatrixXd grad = (u * u) * 2.0 *
                         (q.points.array().colwise() * m.values().array()).matrix();
  grad += (2.0 * inertia * u) * gu.points;
  return Configuration(q.dim, std::move(grad));
}

Configuration projectComTangent(const MassVector& m, const Configuration& grad) {
  const double m2 = m.values().squaredNorm();
  const Eigen::RowVectorXd weighted = m.values().transpose() * grad.points;
  Eigen::MatrixXd out = grad.points;
  out -= (m.values() / m2) * weighted;
  return Configuration(grad.dim, std::move(out));
}

CentralConfigResult refineFrom(const MassVector& m, const Configuration& q0,
                               const MinimizeOptions& opts) {
  detail::LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.tol_grad = opts.tol_grad;
  const auto fg = makeObjective(m, q0.bodies(), q0.dim);
  const detail::LbfgsResult r = detail::minimizeLbfgs(fg, flatten(q0.points), lo);
  return finalize(m, Configuration(q0.dim, unflatten(r.x, q0.bodies(), q0.dim)),
                  r.grad_norm, opts, 1);
}

CentralConfigResult minimizeIU2(const MassVector& m, int dim,
                                const MinimizeOptions& opts) {
  if (m.size() < 2) {
    throw std::invalid_argument("minimizeIU2: at least two bodies required");
  }
  if (dim != 1 && dim != 2) {
    throw std::invalid_argument("minimizeIU2: dim must be 1 or 2");
  }
  if (opts.starts < 1) {
    throw std::invalid_argument("minimizeIU2: starts must be >= 1");
  }

  // Starts are drawn sequentially from one seeded stream, then descend in
  // parallel; the reduction is ordered by start index, so results are
  // bit-identical for a fixed seed regardless of thread count.
  std::mt19937_64 rng(opts.seed);
  std::vector<Configuration> starts;
  starts.reserve(static_cast<std::size_t>(opts.starts));
  for (int s = 0; s < opts.starts; ++s) {
    starts.push_back(randomStart(m, dim, rng));
  }

  detail::LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.tol_grad = opts.tol_grad;
  const auto fg = makeObjective(m, m.size(), dim);

  std::vector<detail::LbfgsResult> runs(starts.size());
  detail::parallelForIndex(opts.starts, [&](int i) {
    runs[static_cast<std::size_t>(i)] = detail::minimizeLbfgs(
        fg, flatten(starts[static_cast<std::size_t>(i)].points), lo);
  });

  const detail::LbfgsResult* best = nullptr;
  for (const detail::LbfgsResult& r : runs) {
    if (!(r.grad_norm < opts.tol_grad)) continue;
    if (best == nullptr || r.value < best->value) best = &r;
  }
  if (best == nullptr) {
    throw NoConvergenceError("minimizeIU2: no start met the gradient tolerance");
  }
  CentralConfigResult res =
      finalize(m, Configuration(dim, unflatten(best->x, m.size(), dim)),
               best->grad_norm, opts, opts.starts);
  if (!res.converged) {
    throw NoConvergenceError("minimizeIU2: best start failed the residual check");
  }
  return res;
}

DimensionComparison compareDimensions(const MassVector& m,
                                      const MinimizeOptions& opts) {
  DimensionComparison cmp;
  cmp.inf_d1 = minimizeIU2(m, 1, opts).value;
  cmp.inf_d2 = minimizeIU2(m, 2, opts).value;
  const double tol = 1e-7 * std::max(cmp.inf_d1, cmp.inf_d2);
  if (std::abs(cmp.inf_d1 - cmp.inf_d2) <= tol) {
    cmp.ordering = DimensionOrdering::kEqual;
  } else if (cmp.inf_d2 < cmp.inf_d1) {
    cmp.ordering = DimensionOrdering::kPlanarLower;
  } else {
    cmp.ordering = DimensionOrdering::kCollinearLower;
  }
  return cmp;
}

}  // namespace nbody::central
