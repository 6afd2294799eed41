#include "holesim/bohm.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

namespace holesim {

namespace {

// mt19937_64 with an explicit 53-bit mantissa conversion: the standard
// distributions are implementation-defined, which would break the bitwise
// determinism contract across toolchains.
class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : gen_(seed) {}
  double next() { return (gen_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 gen_;
};

struct Bilinear {
  int i0, j0;
  double tx, ty;
};

Bilinear locate(double x1, double x2, double x_min, double dx, int n) {
  const double fx = (x1 - x_min) / dx;
  const double fy = (x2 - x_min) / dx;
  Bilinear b;
  b.i0 = std::clamp(static_cast<int>(std::floor(fx)), 0, n - 2);
  b.j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, n - 2);
  b.tx = std::clamp(fx - b.i0, 0.0, 1.0);
  b.ty = std::clamp(fy - b.j0, 0.0, 1.0);
  return b;
}

double lerp2(const Eigen::ArrayXXd& f, const Bilinear& b) {
  return (1.0 - b.tx) * ((1.0 - b.ty) * f(b.i0, b.j0) + b.ty * f(b.i0, b.j0 + 1)) +
         b.tx * ((1.0 - b.ty) * f(b.i0 + 1, b.j0) + b.ty * f(b.i0 + 1, b.j0 + 1));
}

// Node-sampled velocity and density of one frame.
struct VelocityFrame {
  Eigen::ArrayXXd v1, v2, rho;

  VelocityFrame(const CArray2D& amp, double dx, double floor) {
    const int n = static_cast<int>(amp.rows());
    v1.resize(n, n);
    v2.resize(n, n);
    rho.resize(n, n);
    const double inv2dx = 1.0 / (2.0 * dx);
    for (int i = 0; i < n; ++i) {
      const int ip = (i + 1) % n, im = (i + n - 1) % n;
      for (int j = 0; j < n; ++j) {
        const int jp = (j + 1) % n, jm = (j + n - 1) % n;
        const double r = std::norm(amp(i, j));
        rho(i, j) = r;
        if (r < floor) {
          v1(i, j) = 0.0;
          v2(i, j) = 0.0;
        } else {
          // Im[(d psi)/psi] = Im[conj(psi) d psi] / |psi|^2
          const Complex d1 = (amp(ip, j) - amp(im, j)) * inv2dx;
          const Complex d2 = (amp(i, jp) - amp(i, jm)) * inv2dx;
          v1(i, j) = std::imag(std::conj(amp(i, j)) * d1) / r;
          v2(i, j) = std::imag(std::conj(amp(i, j)) * d2) / r;
        }
      }
    }
  }

  VelocitySample sample(const Eigen::Vector2d& at, double x_min, double dx, double floor) const {
    const Bilinear b = locate(at[0], at[1], x_min, dx, static_cast<int>(rho.rows()));
    VelocitySample s;
    s.v = {lerp2(v1, b), lerp2(v2, b)};
    s.density = lerp2(rho, b);
    s.low_density = s.density < floor;
    return s;
  }
};

}  // namespace

Eigen::MatrixX2d sample_initial(const Wavefunction2D& psi0, const Grid2D& grid, int count,
                                std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_initial: count must be >= 1");
  if (std::abs(psi0.norm_sq(grid.dx()) - 1.0) > 1e-6)
    throw std::invalid_argument("sample_initial: state is not normalized");
  const Eigen::ArrayXXd rho = psi0.amp.abs2();
  const double rho_max = rho.maxCoeff();
  const int n = grid.n();
  const double len = grid.length();

  UniformSource rng(seed);
  Eigen::MatrixX2d out(count, 2);
  long attempts = 0;
  int accepted = 0;
  while (accepted < count) {
    const double x1 = grid.x_min + rng.next() * len;
    const double x2 = grid.x_min + rng.next() * len;
    const double u = rng.next() * rho_max;
    ++attempts;
    if (u <= lerp2(rho, locate(x1, x2, grid.x_min, grid.dx(), n))) {
      out(accepted, 0) = x1;
      out(accepted, 1) = x2;
      ++accepted;
    }
    if (attempts >= 100000 && accepted < attempts / 10000)
      throw numerical_error("sample_initial: acceptance rate below 1e-4");
  }
  return out;
}

VelocitySample velocity_field(const Wavefunction2D& psi, const Grid2D& grid,
                              const Eigen::Vector2d& at, double density_floor) {
  const VelocityFrame frame(psi.amp, grid.dx(), density_floor);
  return frame.sample(at, grid.x_min, grid.dx(), density_floor);
}

TrajectoryEnsemble integrate_trajectories(FrameStoreReader& frames,
                                          const Eigen::MatrixX2d& initial,
                                          const BohmOptions& options) {
  const FrameStoreHeader& header = frames.header();
  if (header.frame_count < 2)
    throw std::invalid_argument("integrate_trajectories: need at least two frames");
  if (header.frame_dt > 0.5)
    throw std::invalid_argument("integrate_trajectories: frame spacing must be <= 0.5");
  const int count = static_cast<int>(initial.rows());
  if (count < 1) throw std::invalid_argument("integrate_trajectories: empty initial set");

  const Grid2D grid = frames.grid();
  const double dx = grid.dx();
  const double x_lo = grid.x_min;
  const double x_hi = grid.x_min + dx * (grid.n() - 1);
  const double floor = options.density_floor;
  const int frame_count = static_cast<int>(header.frame_count);

  TrajectoryEnsemble ens;
  ens.times.resize(frame_count);
  ens.x1.resize(frame_count, count);
  ens.x2.resize(frame_count, count);
  ens.speed.resize(frame_count, count);
  ens.flags.assign(count, TrajFlag::Ok);
  for (int k = 0; k < frame_count; ++k) ens.times[k] = frames.frame_time(k);

  auto current = std::make_unique<VelocityFrame>(frames.frame(0), dx, floor);
  for (int tr = 0; tr < count; ++tr) {
    ens.x1(0, tr) = initial(tr, 0);
    ens.x2(0, tr) = initial(tr, 1);
    ens.speed(0, tr) =
        current->sample({initial(tr, 0), initial(tr, 1)}, x_lo, dx, floor).v.norm();
  }

  const double h_frame = header.frame_dt;
  for (int k = 0; k + 1 < frame_count; ++k) {
    auto next = std::make_unique<VelocityFrame>(frames.frame(k + 1), dx, floor);

    // Velocity at fraction theta of the current frame interval.
    auto velocity = [&](const Eigen::Vector2d& pos, double theta, bool& low) {
      const VelocitySample a = current->sample(pos, x_lo, dx, floor);
      const VelocitySample b = next->sample(pos, x_lo, dx, floor);
      if ((1.0 - theta) * a.density + theta * b.density < floor) low = true;
      return Eigen::Vector2d((1.0 - theta) * a.v + theta * b.v);
    };

    for (int tr = 0; tr < count; ++tr) {
      Eigen::Vector2d pos(ens.x1(k, tr), ens.x2(k, tr));
      if (ens.flags[tr] == TrajFlag::LeftDomain) {
        ens.x1(k + 1, tr) = pos[0];
        ens.x2(k + 1, tr) = pos[1];
        ens.speed(k + 1, tr) = 0.0;
        continue;
      }

      bool committed = false;
      for (int halving = 0; halving <= options.max_halvings && !committed; ++halving) {
        const int substeps = 1 << halving;
        const bool last_try = halving == options.max_halvings;
        const double h = h_frame / substeps;
        Eigen::Vector2d p = pos;
        bool ok = true;
        for (int s = 0; s < substeps && ok; ++s) {
          const double t0 = static_cast<double>(s) / substeps;
          const double tm = (s + 0.5) / substeps;
          const double t1 = static_cast<double>(s + 1) / substeps;
          bool low = false;
          const Eigen::Vector2d k1 = velocity(p, t0, low);
          const Eigen::Vector2d k2 = velocity(p + 0.5 * h * k1, tm, low);
          const Eigen::Vector2d k3 = velocity(p + 0.5 * h * k2, tm, low);
          const Eigen::Vector2d k4 = velocity(p + h * k3, t1, low);
          Eigen::Vector2d disp = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          if (!last_try && (low || disp.norm() > 0.5 * dx)) {
            ok = false;  // refine and retry the whole interval
            break;
          }
          if (disp.norm() > 0.5 * dx) disp *= 0.5 * dx / disp.norm();
          if (last_try && low) ens.flags[tr] = TrajFlag::LowDensityClipped;
          p += disp;
          if (p[0] < x_lo || p[0] > x_hi || p[1] < x_lo || p[1] > x_hi) {
            p[0] = std::clamp(p[0], x_lo, x_hi);
            p[1] = std::clamp(p[1], x_lo, x_hi);
            ens.flags[tr] = TrajFlag::LeftDomain;
            break;
          }
        }
        if (ok || last_try) {
          pos = p;
          committed = true;
        }
        if (ens.flags[tr] == TrajFlag::LeftDomain) break;
      }

      ens.x1(k + 1, tr) = pos[0];
      ens.x2(k + 1, tr) = pos[1];
      bool low = false;
      ens.speed(k + 1, tr) =
          ens.flags[tr] == TrajFlag::LeftDomain ? 0.0 : velocity(pos, 1.0, low).norm();
    }
    current = std::move(next);
  }
  return ens;
}

double coarse_tv_distance(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                          const Eigen::ArrayXXd& rho, const Grid2D& grid, int cells) {
  const int n = grid.n();
  if (rho.rows() != n || rho.cols() != n)
    throw std::invalid_argument("coarse_tv_distance: density does not match the grid");
  if (x1.size() != x2.size() || x1.size() == 0)
    throw std::invalid_argument("coarse_tv_distance: empty or mismatched point set");

  // Bounding box of the occupied region.
  const double rho_max = rho.maxCoeff();
  if (!(rho_max > 0.0))
    throw std::invalid_argument("coarse_tv_distance: density is identically zero");
  const double cutoff = 1e-10 * rho_max;
  int i_lo = n, i_hi = -1, j_lo = n, j_hi = -1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rho(i, j) >= cutoff) {
        i_lo = std::min(i_lo, i);
        i_hi = std::max(i_hi, i);
        j_lo = std::min(j_lo, j);
        j_hi = std::max(j_hi, j);
      }
  if (i_hi < 0) throw std::invalid_argument("coarse_tv_distance: density is identically zero");

  const Eigen::ArrayXd x = grid.axis();
  const double bx0 = x[i_lo], bx1 = x[i_hi] + grid.dx();
  const double by0 = x[j_lo], by1 = x[j_hi] + grid.dx();
  auto cell_of = [&](double a, double lo, double hi) {
    return std::clamp(static_cast<int>((a - lo) / (hi - lo) * cells), 0, cells - 1);
  };

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(cells, cells);
  for (int i = i_lo; i <= i_hi; ++i)
    for (int j = j_lo; j <= j_hi; ++j)
      q(cell_of(x[i], bx0, bx1), cell_of(x[j], by0, by1)) += rho(i, j);
  q /= q.sum();

  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(cells, cells);
  for (Eigen::Index t = 0; t < x1.size(); ++t)
    p(cell_of(x1[t], bx0, bx1), cell_of(x2[t], by0, by1)) += 1.0;
  p /= static_cast<double>(x1.size());

  return 0.5 * (p - q).cwiseAbs().sum();
}

EnsembleStats ensemble_statistics(const TrajectoryEnsemble& ens, const Wavefunction2D& psi_final,
                                  const Grid2D& grid, double band_halfwidth,
                                  double density_floor) {
  const int count = static_cast<int>(ens.flags.size());
  if (count == 0 || ens.x1.cols() != count || ens.x1.rows() == 0)
    throw std::invalid_argument("ensemble_statistics: empty ensemble");
  const int frames = static_cast<int>(ens.x1.rows());

  EnsembleStats st;
  st.count = count;
  for (TrajFlag f : ens.flags) {
    if (f == TrajFlag::Ok) ++st.flags_ok;
    if (f == TrajFlag::LowDensityClipped) ++st.flags_low_density;
    if (f == TrajFlag::LeftDomain) ++st.flags_left_domain;
  }
  st.quality_warning = (count - st.flags_ok) > count / 100;

  // Median over every (frame, trajectory) speed sample.
  std::vector<double> speeds(ens.speed.data(), ens.speed.data() + ens.speed.size());
  std::nth_element(speeds.begin(), speeds.begin() + speeds.size() / 2, speeds.end());
  st.median_speed = speeds[speeds.size() / 2];
  st.max_speed = ens.speed.maxCoeff();

  st.min_crosser_peak_ratio = std::numeric_limits<double>::infinity();
  for (int tr = 0; tr < count; ++tr) {
    bool crossed = false;
    double peak = 0.0;
    for (int k = 0; k < frames; ++k) {
      if (std::abs(ens.x1(k, tr) + ens.x2(k, tr)) <= band_halfwidth) crossed = true;
      peak = std::max(peak, ens.speed(k, tr));
    }
    if (crossed) {
      ++st.crossers;
      st.max_crosser_speed = std::max(st.max_crosser_speed, peak);
      if (st.median_speed > 0.0)
        st.min_crosser_peak_ratio = std::min(st.min_crosser_peak_ratio, peak / st.median_speed);
    }
  }
  if (st.crossers == 0) st.min_crosser_peak_ratio = 0.0;

  const Eigen::ArrayXXd rho = psi_final.amp.abs2();
  st.tv_distance =
      coarse_tv_distance(ens.x1.row(frames - 1).transpose(), ens.x2.row(frames - 1).transpose(),
                         rho, grid, 8);
  for (int tr = 0; tr < count; ++tr) {
    const Bilinear b = locate(ens.x1(frames - 1, tr), ens.x2(frames - 1, tr), grid.x_min,
                              grid.dx(), grid.n());
    if (lerp2(rho, b) < density_floor) ++st.node_terminations;
  }
  return st;
}

}  // namespace holesim
