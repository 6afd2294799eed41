#pragma once

#include "holesim/framestore.hpp"

#include <cstdint>
#include <vector>

namespace holesim {

enum class TrajFlag : std::uint8_t { Ok = 0, LowDensityClipped = 1, LeftDomain = 2 };

// Frame-aligned trajectory bundle; column tr of each matrix is trajectory tr.
struct TrajectoryEnsemble {
  std::uint64_t seed = 0;
  Eigen::VectorXd times;
  Eigen::MatrixXd x1, x2, speed;  // frames x trajectories
  std::vector<TrajFlag> flags;    // sticky, per trajectory
};

struct BohmOptions {
  double density_floor = 1e-12;
  int max_halvings = 8;  // near-node step refinement before flagging
};

// `count` positions distributed per |psi0|^2 by rejection sampling against
// max |psi0|^2; bitwise-deterministic for a given seed.  Throws
// numerical_error if the acceptance rate collapses below 1e-4.
Eigen::MatrixX2d sample_initial(const Wavefunction2D& psi0, const Grid2D& grid, int count,
                                std::uint64_t seed);

struct VelocitySample {
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  double density = 0.0;
  bool low_density = false;
};

// v_i = Im[(d_i psi)/psi]: centered differences at the grid nodes, bilinear
// interpolation in between.  Flags low_density instead of dividing by ~0.
VelocitySample velocity_field(const Wavefunction2D& psi, const Grid2D& grid,
                              const Eigen::Vector2d& at, double density_floor = 1e-12);

// RK4 through the stored frames with the velocity field interpolated linearly
// in time between adjacent frames.  Substeps adapt so no substep moves more
// than 0.5*dx; near-node encounters halve the step (up to max_halvings) before
// the trajectory is flagged.  Trajectories that exit the domain freeze at the
// boundary.
TrajectoryEnsemble integrate_trajectories(FrameStoreReader& frames,
                                          const Eigen::MatrixX2d& initial,
                                          const BohmOptions& options = {});

// Total-variation distance between the point set and the density rho, both
// coarse-grained on cells x cells over rho's occupied bounding box.
double coarse_tv_distance(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                          const Eigen::ArrayXXd& rho, const Grid2D& grid, int cells = 8);

struct EnsembleStats {
  int count = 0;
  double tv_distance = 0.0;  // final frame vs |psi_final|^2
  double median_speed = 0.0;
  double max_speed = 0.0;
  int crossers = 0;  // trajectories entering |x1+x2| <= band
  // min over crossers of (own peak speed / ensemble median speed)
  double min_crosser_peak_ratio = 0.0;
  double max_crosser_speed = 0.0;  // largest speed sample among crossers
  int node_terminations = 0;  // final position where |psi_final|^2 < floor
  int flags_ok = 0;
  int flags_low_density = 0;
  int flags_left_domain = 0;
  bool quality_warning = false;  // > 1% flagged
};

EnsembleStats ensemble_statistics(const TrajectoryEnsemble& ens, const Wavefunction2D& psi_final,
                                  const Grid2D& grid, double band_halfwidth = 1.0,
                                  double density_floor = 1e-12);

}  // namespace holesim
