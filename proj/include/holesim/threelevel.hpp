#pragma once

#include "holesim/core.hpp"

#include <complex>
#include <iosfwd>

namespace holesim {

// STIRAP mixing angle, tan(theta) = J1/J2, kept in [0, pi/2].
struct MixingAngle {
  double theta = 0.0;
};

inline MixingAngle mixing_angle(double j1, double j2) {
  if (j1 < 0.0 || j2 < 0.0)
    throw std::domain_error("mixing_angle: tunneling rates must be non-negative");
  // atan2 instead of atan(j1/j2) so j2 = 0 maps cleanly to theta = pi/2.
  return {std::atan2(j1, j2)};
}

// Three-state hole Hamiltonian: zero diagonal, couplings -j1 (sites 1-2) and
// -j2 (sites 2-3).
template <class Real>
Eigen::Matrix<Real, 3, 3> hole_hamiltonian3(Real j1, Real j2) {
  if (j1 < Real(0) || j2 < Real(0))
    throw std::domain_error("hole_hamiltonian3: tunneling rates must be non-negative");
  Eigen::Matrix<Real, 3, 3> h = Eigen::Matrix<Real, 3, 3>::Zero();
  h(0, 1) = h(1, 0) = -j1;
  h(1, 2) = h(2, 1) = -j2;
  return h;
}

// Zero-energy eigenstate (cos t, 0, -sin t): no amplitude on the middle trap.
template <class Real = double>
Eigen::Matrix<Real, 3, 1> dark_state(MixingAngle angle) {
  return Eigen::Matrix<Real, 3, 1>(std::cos(angle.theta), Real(0), -std::sin(angle.theta));
}

struct ThreeLevelTrace {
  Eigen::VectorXd t;
  Eigen::VectorXd j1, j2, theta;
  Eigen::MatrixX3d populations;  // row k: |c_i(t_k)|^2
  Eigen::Vector3cd final_amplitudes;
  double norm_drift = 0.0;  // max_k |sum_i |c_i|^2 - 1|
};

// Integrates i dc/dt = H(t) c with J_i(t) taken from the schedule's trap
// distances (classical RK4, H sampled at substage times).  Throws
// numerical_error if the norm drifts beyond 1e-8.
ThreeLevelTrace propagate_amplitudes(const TrapSchedule& schedule, double dt = 0.02,
                                     const Eigen::Vector3cd& initial = Eigen::Vector3cd(1, 0, 0));

// J_max * t_delay with J_max^2 = max_t J1^2 + max_t J2^2.  Adiabatic transfer
// needs roughly > 10.
double adiabaticity_margin(const TrapSchedule& schedule);

// Population time series as CSV: t, p1, p2, p3, J1, J2, theta.
void write_populations_csv(const ThreeLevelTrace& trace, std::ostream& out);

}  // namespace holesim
