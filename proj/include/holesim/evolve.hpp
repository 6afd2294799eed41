#pragma once

#include "holesim/wavefunction.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace holesim {

struct RunReport {
  int initial_site = 0;
  Symmetry symmetry = Symmetry::Fermionic;
  double alpha_as = 0.0;
  std::array<double, 3> fidelity{0.0, 0.0, 0.0};  // F_{i->j}, j = 1..3, final layout
  double max_middle_population = 0.0;
  double max_counterdiagonal = 0.0;
  double final_counterdiagonal = 0.0;
  double norm_drift = 0.0;      // max |norm - 1| over stored frames
  double symmetry_error = 0.0;  // max over stored frames, measured before re-projection
  double max_boundary_density = 0.0;
  bool leakage_warning = false;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
};

struct EvolveOptions {
  std::string frames_path;          // empty: no frame store written
  double sigma_delta_factor = 2.0;  // contact-regularization width, units of dx
  double band_halfwidth = 1.0;
  // Called at every stored frame (after symmetry projection), including t = 0.
  std::function<void(const Wavefunction2D&)> frame_observer;
};

struct EvolveResult {
  Wavefunction2D psi;
  RunReport report;
};

// Second-order split-step spectral propagation of the two-atom Schroedinger
// equation under the moving-trap potential: half-step in the position-diagonal
// operator V(x1,t)+V(x2,t)+U(x1,x2) evaluated at the step midpoint, full
// kinetic step via 2D FFT, half-step potential again.
//
// The contact term U is the Gaussian-regularized delta (width
// sigma_delta_factor * dx) and is applied only in the Bosonic sector: the
// delta interaction restricted to antisymmetric states is identically zero,
// while the finite-width stand-in would leak an O(sigma^2) phase artifact
// into fermionic runs.
//
// Fidelities are not filled in here (the caller knows the initial site);
// all other diagnostics are.  Throws numerical_error if the norm drifts
// beyond 1e-6.
EvolveResult evolve(const Wavefunction2D& initial, const TrapSchedule& schedule,
                    const PhysicalParams& params, const Grid2D& grid,
                    const EvolveOptions& options = {});

// Normalized gradient flow toward the lowest-energy state of the frozen
// layout within the given symmetry sector (split-step with imaginary time,
// re-projected and renormalized every step).  Appends the energy after each
// step to energy_trace when given.
Wavefunction2D imaginary_time_relax(const Wavefunction2D& initial, const TrapLayout& layout,
                                    const PhysicalParams& params, const Grid2D& grid, int steps,
                                    double dtau = 0.01, std::vector<double>* energy_trace = nullptr);

}  // namespace holesim
