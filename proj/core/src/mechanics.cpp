#include "nbody/mechanics.hpp"

#include <cmath>
#include <stdexcept>

namespace nbody {

namespace {

void requireCompatible(const MassVector& m, const Configuration& q) {
  if (m.size() != q.bodies()) {
    throw std::invalid_argument("mass vector and configuration disagree on N");
  }
}

}  // namespace

MassVector::MassVector(Eigen::VectorXd m) : m_(std::move(m)) {
  if (m_.size() < 1) {
    throw std::invalid_argument("MassVector: at least one mass required");
  }
  for (Eigen::Index i = 0; i < m_.size(); ++i) {
    if (!std::isfinite(m_[i]) || m_[i] <= 0.0) {
      throw std::invalid_argument("MassVector: masses must be positive and finite");
    }
  }
}

MassVector::MassVector(std::initializer_list<double> m)
    : MassVector(Eigen::Map<const Eigen::VectorXd>(m.begin(),
                                                   static_cast<Eigen::Index>(m.size()))) {}

Configuration::Configuration(int d, Eigen::MatrixXd pts)
    : dim(d), points(std::move(pts)) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("Configuration: dim must be 1, 2 or 3");
  }
  if (points.cols() != dim) {
    throw std::invalid_argument("Configuration: column count must equal dim");
  }
  if (!points.allFinite()) {
    throw std::invalid_argument("Configuration: coordinates must be finite");
  }
}

Configuration Configuration::zeros(int dim, int bodies) {
  return Configuration(dim, Eigen::MatrixXd::Zero(bodies, dim));
}

double Configuration::minPairDistance() const {
  const int n = bodies();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      best = std::min(best, (points.row(i) - points.row(j)).norm());
    }
  }
  return best;
}

double scale(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  return std::sqrt(momentOfInertia(m, q) / m.total());
}

double degenerateThreshold(const MassVector& m, const Configuration& q) {
  return kDegenerateDistanceFactor * scale(m, q);
}

bool isCollisionFree(const MassVector& m, const Configuration& q) {
  if (q.bodies() < 2) return true;
  return q.minPairDistance() > degenerateThreshold(m, q);
}

void requireCollisionFree(const MassVector& m, const Configuration& q) {
  if (!isCollisionFree(m, q)) {
    throw CollisionError("configuration has a degenerate pair distance");
  }
}

double centerOfMassDeviation(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  const Eigen::RowVectorXd com = m.values().transpose() * q.points;
  const double s = scale(m, q);
  if (s == 0.0) return 0.0;
  return com.norm() / (m.total() * s);
}

bool isCentered(const MassVector& m, const Configuration& q, double tol) {
  return centerOfMassDeviation(m, q) <= tol;
}

double potential(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  const int n = q.bodies();
  const double cutoff = degenerateThreshold(m, q);
  double u = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double r = (q.points.row(i) - q.points.row(j)).norm();
      if (r <= cutoff) {
        throw CollisionError("degenerate pair distance in potential");
      }
      u += m[i] * m[j] / r;
    }
  }
  return u;
}

Configuration potentialGradient(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  const int n = q.bodies();
  const double cutoff = degenerateThreshold(m, q);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, q.dim);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Eigen::RowVectorXd d = q.points.row(j) - q.points.row(i);
      const double r = d.norm();
      if (r <= cutoff) {
        throw CollisionError("degenerate pair distance in potential gradient");
      }
      const Eigen::RowVectorXd pull = (m[i] * m[j] / (r * r * r)) * d;
      grad.row(i) += pull;
      grad.row(j) -= pull;
    }
  }
  return Configuration(q.dim, std::move(grad));
}

double momentOfInertia(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  return (q.points.rowwise().squaredNorm().array() * m.values().array()).sum();
}

double kineticEnergy(const MassVector& m, const Configuration& v) {
  requireCompatible(m, v);
  return 0.5 * (v.points.rowwise().squaredNorm().array() * m.values().array()).sum();
}

MechanicalSnapshot lagrangian(const MassVector& m, const Configuration& q,
                              const Configuration& v) {
  MechanicalSnapshot s;
  s.potential = potential(m, q);
  s.moment_of_inertia = momentOfInertia(m, q);
  s.kinetic = kineticEnergy(m, v);
  s.lagrangian = s.kinetic + s.potential;
  s.lambda = s.potential / s.moment_of_inertia;
  s.total_energy = s.kinetic - s.potential;
  return s;
}

double newtonResidual(const MassVector& m, const Configuration& q,
                      const Configuration& accel) {
  requireCompatible(m, accel);
  const Configuration grad = potentialGradient(m, q);
  double worst = 0.0;
  for (int i = 0; i < q.bodies(); ++i) {
    worst = std::max(worst, (m[i] * accel.points.row(i) - grad.points.row(i)).norm());
  }
  return worst;
}

double centralConfigResidual(const MassVector& m, const Configuration& q) {
  const Configuration grad = potentialGradient(m, q);
  const double u = potential(m, q);
  const double inertia = momentOfInertia(m, q);
  const double lambda = u / inertia;
  const double s = scale(m, q);
  double worst = 0.0;
  for (int k = 0; k < q.bodies(); ++k) {
    const double num = (grad.points.row(k) + lambda * m[k] * q.points.row(k)).norm();
    worst = std::max(worst, num / (lambda * m[k] * s));
  }
  return worst;
}

Configuration projectCenterOfMass(const MassVector& m, const Configuration& q) {
  requireCompatible(m, q);
  const Eigen::RowVectorXd com = (m.values().transpose() * q.points) / m.total();
  Eigen::MatrixXd shifted = q.points;
  shifted.rowwise() -= com;
  return Configuration(q.dim, std::move(shifted));
}

}  // namespace nbody
