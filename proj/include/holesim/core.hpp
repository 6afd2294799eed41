#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <stdexcept>

namespace holesim {

inline constexpr double kPi = 3.14159265358979323846;

// Thrown when an integrator violates its conservation tolerances.  The CLI
// maps this to exit code 4.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spatial exchange symmetry of the two-atom wavefunction.  Fermionic selects
// the antisymmetric sector, Bosonic the symmetric one; the symmetry tag stands
// in for the spin state throughout.
enum class Symmetry { Fermionic, Bosonic };

inline int symmetry_sign(Symmetry s) { return s == Symmetry::Fermionic ? -1 : +1; }

enum class RampShape { Linear, SinSquared };
enum class FirstMover { RightTrap, LeftTrap };

// Everything is dimensionless: hbar = m = omega_x = 1, hence alpha = 1.
// Lengths are alpha*x, times omega_x*t, energies E/(hbar omega_x).
struct PhysicalParams {
  double omega_ratio = 24.0;              // omega_p / omega_x
  double scaled_scattering_length = 0.0;  // alpha * a_s, signed
  Symmetry symmetry = Symmetry::Fermionic;
};

// 1D contact coupling multiplying delta(x1 - x2): g = 2 (alpha a_s)(omega_p / omega_x).
inline double interaction_strength(const PhysicalParams& p) {
  return 2.0 * p.scaled_scattering_length * p.omega_ratio;
}

// Harmonic distance modulation of the two outer traps about the static middle
// trap.  Displaces both inter-trap distances by amplitude*cos(omega*t).
struct JitterSpec {
  double amplitude = 0.0;  // alpha * A_s
  double omega = 0.0;      // omega_s / omega_x
};

// Counterintuitive trap-approach sequence.  The first mover starts its
// approach (ramp in, hold, ramp out) at t_pre; the other trap starts t_delay
// later.  Total duration is derived, never stored.
struct TrapSchedule {
  double d_max = 9.0;
  double d_min = 1.5;
  double t_delay = 120.0;
  double t_ramp = 400.0;
  double t_hold = 146.0;
  double t_pre = 10.0;
  double t_post = 10.0;
  RampShape ramp_shape = RampShape::SinSquared;
  FirstMover first_mover = FirstMover::RightTrap;
  std::optional<JitterSpec> jitter;

  double total_duration() const { return t_pre + t_delay + 2.0 * t_ramp + t_hold + t_post; }
  void validate() const;
};

template <class Real>
struct TrapLayoutT {
  Eigen::Matrix<Real, Eigen::Dynamic, 1> centers;  // strictly increasing

  int size() const { return static_cast<int>(centers.size()); }
};
using TrapLayout = TrapLayoutT<double>;

// Trap centers at time t; middle trap pinned at x = 0.  Throws out_of_range
// for t outside [0, T].
TrapLayout trap_positions(const TrapSchedule& schedule, double t);

// Truncated harmonic potential: at each point the lowest of the single-well
// parabolas, V(x) = min_i (x - c_i)^2 / 2.
template <class Real>
Real potential_value(Real x, const TrapLayoutT<Real>& layout) {
  Real best = (x - layout.centers[0]) * (x - layout.centers[0]);
  for (int i = 1; i < layout.size(); ++i) {
    const Real d = x - layout.centers[i];
    best = std::min(best, d * d);
  }
  return Real(0.5) * best;
}

template <class Derived>
auto potential_values(const Eigen::ArrayBase<Derived>& x,
                      const TrapLayoutT<typename Derived::Scalar>& layout) {
  using Real = typename Derived::Scalar;
  Eigen::Array<Real, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime> v2 =
      (x.derived() - layout.centers[0]).square();
  for (int i = 1; i < layout.size(); ++i)
    v2 = v2.min((x.derived() - layout.centers[i]).square());
  return (Real(0.5) * v2).eval();
}

// Single-atom tunneling rate between the ground states of two adjacent
// truncated-harmonic wells at scaled distance z = alpha*d:
//
//   J(z)/omega_x = (2z/sqrt(pi)) * (e^{z^2}(1 + z erfc z) - 1) / (e^{2 z^2} - 1).
//
// Rearranged so only decaying exponentials appear (the direct form overflows
// near z = 19, long before J underflows):
//   J(z) = (2z/sqrt(pi)) e^{-z^2} (-expm1(-z^2) + z erfc z) / (-expm1(-2 z^2)).
template <class Real>
Real tunneling_rate(Real scaled_distance) {
  if (!(scaled_distance > Real(0)))
    throw std::domain_error("tunneling_rate: scaled distance must be positive");
  using std::erfc;
  using std::exp;
  using std::expm1;
  using std::sqrt;
  const Real z = scaled_distance;
  const Real z2 = z * z;
  const Real bracket = -expm1(-z2) + z * erfc(z);
  return Real(2) * z / sqrt(Real(kPi)) * exp(-z2) * bracket / (-expm1(Real(-2) * z2));
}

}  // namespace holesim
