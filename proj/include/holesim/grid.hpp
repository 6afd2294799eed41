#pragma once

#include "holesim/core.hpp"

namespace holesim {

// Uniform periodic grid for the (x1, x2) configuration plane.  x_max is the
// periodic image of x_min: points sit at x_min + i*dx, i = 0..n-1.
struct Grid2D {
  double x_min = -16.0;
  double x_max = 16.0;
  int points_per_axis = 256;
  double dt = 0.005;
  int frame_stride = 100;  // steps between stored frames

  int n() const { return points_per_axis; }
  double length() const { return x_max - x_min; }
  double dx() const { return length() / points_per_axis; }
  Eigen::ArrayXd axis() const;
  // FFT-ordered spectral wavenumbers, 2*pi*m/L with m wrapped to (-n/2, n/2].
  Eigen::ArrayXd wavenumbers() const;

  void validate() const;
  // Additionally checks that the domain keeps >= 5 ground-state widths of
  // margin beyond the outermost trap excursion.
  void validate_for(const TrapSchedule& schedule) const;
};

// Sizes with only radix-2/3/5 factors keep the transforms fast.
bool fft_friendly(int n);

}  // namespace holesim
