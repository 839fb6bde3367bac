#pragma once

#include <Eigen/Dense>
#include <initializer_list>

#include "nbody/errors.hpp"

namespace nbody {

// Pairwise distances below this fraction of scale(m, q) count as collisions.
inline constexpr double kDegenerateDistanceFactor = 1e-12;
// Default relative tolerance of the center-of-mass predicate.
inline constexpr double kCenterOfMassTol = 1e-10;

// Strictly positive particle masses, at least one body.
class MassVector {
 public:
  explicit MassVector(Eigen::VectorXd m);
  MassVector(std::initializer_list<double> m);

  int size() const { return static_cast<int>(m_.size()); }
  double operator[](int i) const { return m_[i]; }
  double total() const { return m_.sum(); }
  const Eigen::VectorXd& values() const { return m_; }

 private:
  Eigen::VectorXd m_;
};

// One snapshot of N points in R^d, one row per body. The same container is
// used for positions, velocities, accelerations and gradients.
struct Configuration {
  int dim;
  Eigen::MatrixXd points;  // N x dim

  Configuration(int d, Eigen::MatrixXd pts);
  static Configuration zeros(int dim, int bodies);

  int bodies() const { return static_cast<int>(points.rows()); }
  Eigen::RowVectorXd body(int i) const { return points.row(i); }
  double minPairDistance() const;
};

// Pointwise mechanical state; lagrangian = kinetic + potential as stored.
struct MechanicalSnapshot {
  double potential = 0.0;
  double moment_of_inertia = 0.0;
  double kinetic = 0.0;
  double lagrangian = 0.0;
  double lambda = 0.0;        // potential / moment_of_inertia
  double total_energy = 0.0;  // kinetic - potential
};

// Mass-weighted RMS size, sqrt(I(q) / total mass). Used to normalize every
// relative threshold in the toolkit.
double scale(const MassVector& m, const Configuration& q);

double degenerateThreshold(const MassVector& m, const Configuration& q);
bool isCollisionFree(const MassVector& m, const Configuration& q);
void requireCollisionFree(const MassVector& m, const Configuration& q);

// |sum_i m_i q_i| / (total mass * scale); 0 for an exactly centered q.
double centerOfMassDeviation(const MassVector& m, const Configuration& q);
bool isCentered(const MassVector& m, const Configuration& q,
                double tol = kCenterOfMassTol);

// U(q) = sum_{i<j} m_i m_j / |q_i - q_j|. Throws CollisionError on a
// degenerate pair distance.
double potential(const MassVector& m, const Configuration& q);

// Gradient of U; row i is d U / d q_i = sum_{j!=i} m_i m_j (q_j - q_i)/r^3.
Configuration potentialGradient(const MassVector& m, const Configuration& q);

// I(q) = sum_j m_j |q_j|^2.
double momentOfInertia(const MassVector& m, const Configuration& q);

// K(v) = sum_i m_i |v_i|^2 / 2.
double kineticEnergy(const MassVector& m, const Configuration& v);

MechanicalSnapshot lagrangian(const MassVector& m, const Configuration& q,
                              const Configuration& v);

// max_i |m_i a_i - dU/dq_i|; zero exactly when the accelerations satisfy the
// equations of motion.
double newtonResidual(const MassVector& m, const Configuration& q,
                      const Configuration& accel);

// max_k |dU/dq_k + lambda m_k q_k| / (lambda m_k scale) with lambda = U/I;
// zero exactly when q is a central configuration.
double centralConfigResidual(const MassVector& m, const Configuration& q);

// Translate so the mass-weighted centroid is at the origin.
Configuration projectCenterOfMass(const MassVector& m, const Configuration& q);

}  // namespace nbody
