#include "holesim/wavefunction.hpp"

#include <cmath>

namespace holesim {

Eigen::ArrayXd Grid2D::axis() const {
  Eigen::ArrayXd x(points_per_axis);
  const double h = dx();
  for (int i = 0; i < points_per_axis; ++i) x[i] = x_min + h * i;
  return x;
}

Eigen::ArrayXd Grid2D::wavenumbers() const {
  Eigen::ArrayXd k(points_per_axis);
  const double dk = 2.0 * kPi / length();
  const int n = points_per_axis;
  for (int i = 0; i < n; ++i) k[i] = dk * (i <= n / 2 ? i : i - n);
  return k;
}

bool fft_friendly(int n) {
  if (n < 1) return false;
  for (int p : {2, 3, 5})
    while (n % p == 0) n /= p;
  return n == 1;
}

void Grid2D::validate() const {
  if (!(x_min < x_max)) throw std::invalid_argument("Grid2D: require x_min < x_max");
  if (points_per_axis < 16 || !fft_friendly(points_per_axis))
    throw std::invalid_argument(
        "Grid2D: points_per_axis must be >= 16 with only radix-2/3/5 factors");
  if (dx() > 0.2)
    throw std::invalid_argument("Grid2D: spacing must be <= 0.2 to resolve the ground state");
  if (!(dt > 0.0)) throw std::invalid_argument("Grid2D: dt must be positive");
  if (frame_stride < 1) throw std::invalid_argument("Grid2D: frame_stride must be >= 1");
}

void Grid2D::validate_for(const TrapSchedule& schedule) const {
  validate();
  const double reach =
      schedule.d_max + (schedule.jitter ? std::abs(schedule.jitter->amplitude) : 0.0);
  if (x_max < reach + 5.0 || x_min > -(reach + 5.0))
    throw std::invalid_argument("Grid2D: domain must extend 5 widths beyond the outer traps");
}

double Wavefunction2D::symmetry_error() const {
  const double s = symmetry_sign(symmetry);
  const CArray2D trans = amp.transpose();
  const double ref = std::sqrt(amp.abs2().sum());
  if (ref == 0.0) return 0.0;
  return std::sqrt((amp - s * trans).abs2().sum()) / ref;
}

void Wavefunction2D::project_symmetry() {
  const double s = symmetry_sign(symmetry);
  const CArray2D trans = amp.transpose();
  amp = 0.5 * (amp + s * trans);
}

void Wavefunction2D::normalize(double dx) {
  const double n = std::sqrt(norm_sq(dx));
  if (n == 0.0) throw numerical_error("Wavefunction2D: cannot normalize the zero function");
  amp /= n;
}

Eigen::ArrayXd single_atom_ground(const Eigen::ArrayXd& axis, double center) {
  const double amp = std::pow(kPi, -0.25);
  return amp * (-(axis - center).square() / 2.0).exp();
}

namespace detail {

Complex grid_inner(const CArray2D& a, const CArray2D& b, double dx) {
  return (a.conjugate() * b).sum() * dx * dx;
}

Wavefunction2D hole_state_product(int hole_site, const TrapLayout& layout, Symmetry symmetry,
                                  const Grid2D& grid) {
  if (hole_site < 1 || hole_site > 3)
    throw std::domain_error("hole state: hole_site must be 1, 2, or 3");
  if (layout.size() != 3) throw std::invalid_argument("hole state: need a three-trap layout");

  // Occupied-trap orderings straight from the localized-state definitions:
  // hole 1 -> (2,3), hole 2 -> (3,1), hole 3 -> (1,2).
  static constexpr int kOrder[3][2] = {{1, 2}, {2, 0}, {0, 1}};
  const Eigen::ArrayXd x = grid.axis();
  const Eigen::ArrayXd a = single_atom_ground(x, layout.centers[kOrder[hole_site - 1][0]]);
  const Eigen::ArrayXd b = single_atom_ground(x, layout.centers[kOrder[hole_site - 1][1]]);

  const double s = symmetry_sign(symmetry);
  Wavefunction2D psi;
  psi.symmetry = symmetry;
  psi.amp = (a.matrix() * b.matrix().transpose() + s * (b.matrix() * a.matrix().transpose()))
                .array()
                .cast<Complex>();
  psi.normalize(grid.dx());
  return psi;
}

}  // namespace detail

Wavefunction2D localized_hole_state(int hole_site, const TrapLayout& layout, Symmetry symmetry,
                                    const Grid2D& grid) {
  for (int i = 0; i + 1 < layout.size(); ++i)
    if (layout.centers[i + 1] - layout.centers[i] < 8.0)
      throw std::invalid_argument(
          "localized_hole_state: traps overlap (adjacent distances must be >= 8)");
  return detail::hole_state_product(hole_site, layout, symmetry, grid);
}

double fidelity(const Wavefunction2D& psi, const Wavefunction2D& target, const Grid2D& grid) {
  if (psi.symmetry != target.symmetry)
    throw std::domain_error("fidelity: exchange-symmetry sectors differ");
  if (psi.amp.rows() != target.amp.rows() || psi.amp.cols() != target.amp.cols())
    throw std::invalid_argument("fidelity: grid shapes differ");
  return std::norm(detail::grid_inner(target.amp, psi.amp, grid.dx()));
}

double fidelity(const Wavefunction2D& psi, int target_hole_site, const TrapLayout& layout,
                const Grid2D& grid) {
  return fidelity(psi, localized_hole_state(target_hole_site, layout, psi.symmetry, grid), grid);
}

double counterdiagonal_population(const Wavefunction2D& psi, const Grid2D& grid,
                                  double band_halfwidth) {
  if (!(band_halfwidth > 0.0))
    throw std::invalid_argument("counterdiagonal_population: band halfwidth must be positive");
  const Eigen::ArrayXd x = grid.axis();
  const int n = grid.n();
  // x_i + x_j falls exactly on the band edge for lattice-aligned halfwidths
  // (e.g. the 1.0 default on a 0.2 grid); the epsilon keeps those whole
  // anti-diagonals inside the band regardless of rounding path.
  const double edge = band_halfwidth * (1.0 + 1e-12) + 1e-12;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(x[i] + x[j]) <= edge) total += std::norm(psi.amp(i, j));
    }
  }
  return total * grid.dx() * grid.dx();
}

}  // namespace holesim
