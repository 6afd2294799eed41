#pragma once

#include "holesim/grid.hpp"

#include <complex>

namespace holesim {

using Complex = std::complex<double>;
// Row-major so the raw buffer matches the frame-store layout (x1 index slow).
using CArray2D = Eigen::Array<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Two-atom amplitude on the configuration grid: amp(i, j) = psi(x1_i, x2_j).
struct Wavefunction2D {
  CArray2D amp;
  Symmetry symmetry = Symmetry::Fermionic;
  double t = 0.0;

  double norm_sq(double dx) const { return amp.abs2().sum() * dx * dx; }
  // Relative L2 size of the exchange-violating part, ||psi - s*psi^T|| / ||psi||.
  double symmetry_error() const;
  // psi <- (psi + s*psi^T)/2; lands exactly in the symmetry sector in floating
  // point, since (a - b)/2 == -((b - a)/2) holds bitwise.
  void project_symmetry();
  void normalize(double dx);
};

// Isolated-well vibrational ground state, pi^{-1/4} exp(-(x-center)^2/2),
// sampled on the given axis (analytically normalized).
Eigen::ArrayXd single_atom_ground(const Eigen::ArrayXd& axis, double center);

// Two atoms in the traps other than hole_site:
//   (1/sqrt2) [phi_a(x1) phi_b(x2) -+ phi_b(x1) phi_a(x2)]
// with the (a, b) orderings (2,3), (3,1), (1,2) for hole sites 1, 2, 3 and the
// minus sign in the Fermionic sector; grid-normalized.  Requires all adjacent
// trap distances >= 8 so the product construction is valid.
Wavefunction2D localized_hole_state(int hole_site, const TrapLayout& layout, Symmetry symmetry,
                                    const Grid2D& grid);

// |<target | psi>|^2 against an explicit target state (must match grid shape
// and symmetry sector).
double fidelity(const Wavefunction2D& psi, const Wavefunction2D& target, const Grid2D& grid);
// Same, with the target built as localized_hole_state(target_hole_site, ...).
double fidelity(const Wavefunction2D& psi, int target_hole_site, const TrapLayout& layout,
                const Grid2D& grid);

// Probability mass within |x1 + x2| <= band_halfwidth.
double counterdiagonal_population(const Wavefunction2D& psi, const Grid2D& grid,
                                  double band_halfwidth = 1.0);

namespace detail {

// Hole-basis product state without the separation precondition; used to
// project mid-run snapshots where traps are close (diagnostic only).
Wavefunction2D hole_state_product(int hole_site, const TrapLayout& layout, Symmetry symmetry,
                                  const Grid2D& grid);

Complex grid_inner(const CArray2D& a, const CArray2D& b, double dx);

}  // namespace detail

}  // namespace holesim
