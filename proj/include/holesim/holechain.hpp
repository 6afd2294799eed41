#pragma once

#include "holesim/core.hpp"

#include <complex>
#include <functional>

namespace holesim {

// All odd-site dark-state coefficients vanished for the supplied couplings.
struct degenerate_dark_state : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Single-hole sector of an n-site chain (n odd): nearest-neighbour hole
// tunneling rates J_1..J_{n-1}.
struct HoleChainModel {
  int n = 3;
  Eigen::VectorXd couplings;

  void validate() const;
};

// Tridiagonal, zero diagonal, off-diagonal -J_i.  For n = 3 this is exactly
// hole_hamiltonian3.
Eigen::MatrixXd chain_hamiltonian(const HoleChainModel& model);

// Closed-form zero-energy eigenstate: support only on odd sites, coefficient
// at site 2m-1 equal to
//   (-1)^{m+1} * prod{J_j : j odd, j < 2m-1} * prod{J_j : j even, j >= 2m},
// empty products = 1; returned normalized.  Throws degenerate_dark_state when
// every coefficient vanishes.
Eigen::VectorXd multisite_dark_state(const HoleChainModel& model);

struct ChainTrace {
  Eigen::VectorXd t;
  Eigen::MatrixXd populations;   // (steps+1) x n
  Eigen::VectorXd dark_overlap;  // |<D(t)|c(t)>|^2; NaN where the dark state degenerates
  Eigen::VectorXcd final_amplitudes;
  double norm_drift = 0.0;
};

using ChainCouplingsFn = std::function<Eigen::VectorXd(double)>;

// n-level Schroedinger propagation under time-dependent couplings (RK4).
// Throws numerical_error if the norm drifts beyond 1e-8.
ChainTrace propagate_chain(int n, const ChainCouplingsFn& couplings, double t_final, double dt,
                           const Eigen::VectorXcd& initial);

// Shared Gaussian envelopes: all even-index couplings peak at (total-delay)/2,
// all odd-index ones `delay` later — the counterintuitive order for moving the
// hole from site 1 to site n.
struct EvenOddPulses {
  int n = 5;
  double j_peak = 0.2;
  double width = 80.0;
  double delay = 60.0;
  double total = 400.0;

  double even_center() const { return 0.5 * (total - delay); }
  double odd_center() const { return even_center() + delay; }
  Eigen::VectorXd operator()(double t) const;
};

EvenOddPulses even_odd_pulse_schedule(int n, double j_peak, double width, double delay,
                                      double total);

// Couplings derived from a trap schedule's adjacent-trap distances (n = 3).
ChainCouplingsFn couplings_from_schedule(const TrapSchedule& schedule);

}  // namespace holesim
