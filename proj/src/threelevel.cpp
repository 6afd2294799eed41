#include "holesim/threelevel.hpp"

#include <cmath>
#include <complex>
#include <ostream>

namespace holesim {

namespace {

struct Couplings {
  double j1, j2;
};

Couplings couplings_at(const TrapSchedule& schedule, double t) {
  const TrapLayout lay = trap_positions(schedule, t);
  return {tunneling_rate(lay.centers[1] - lay.centers[0]),
          tunneling_rate(lay.centers[2] - lay.centers[1])};
}

}  // namespace

ThreeLevelTrace propagate_amplitudes(const TrapSchedule& schedule, double dt,
                                     const Eigen::Vector3cd& initial) {
  schedule.validate();
  if (!(dt > 0.0)) throw std::invalid_argument("propagate_amplitudes: dt must be positive");
  const double total = schedule.total_duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(total / dt)));
  const double h = total / steps;

  // Enforce dt * J_max <= 0.05; the closest approach bounds the rates.
  const double d_closest = schedule.d_min - (schedule.jitter ? std::abs(schedule.jitter->amplitude) : 0.0);
  if (h * tunneling_rate(d_closest) > 0.05)
    throw std::invalid_argument("propagate_amplitudes: dt too large for the peak tunneling rate");

  ThreeLevelTrace trace;
  trace.t.resize(steps + 1);
  trace.j1.resize(steps + 1);
  trace.j2.resize(steps + 1);
  trace.theta.resize(steps + 1);
  trace.populations.resize(steps + 1, 3);

  const std::complex<double> mi(0.0, -1.0);
  auto deriv = [&](double t, const Eigen::Vector3cd& c) -> Eigen::Vector3cd {
    const Couplings j = couplings_at(schedule, t);
    return mi * (hole_hamiltonian3(j.j1, j.j2) * c);
  };
  auto record = [&](int k, double t, const Eigen::Vector3cd& c) {
    const Couplings j = couplings_at(schedule, t);
    trace.t[k] = t;
    trace.j1[k] = j.j1;
    trace.j2[k] = j.j2;
    trace.theta[k] = mixing_angle(j.j1, j.j2).theta;
    trace.populations.row(k) = c.cwiseAbs2().transpose();
  };

  Eigen::Vector3cd c = initial;
  record(0, 0.0, c);
  trace.norm_drift = std::abs(c.squaredNorm() - 1.0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Eigen::Vector3cd k1 = deriv(t, c);
    const Eigen::Vector3cd k2 = deriv(t + 0.5 * h, c + 0.5 * h * k1);
    const Eigen::Vector3cd k3 = deriv(t + 0.5 * h, c + 0.5 * h * k2);
    const Eigen::Vector3cd k4 = deriv(t + h, c + h * k3);
    c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(k + 1, (k + 1) * h, c);
    trace.norm_drift = std::max(trace.norm_drift, std::abs(c.squaredNorm() - 1.0));
    if (trace.norm_drift > 1e-8)
      throw numerical_error("propagate_amplitudes: norm drift exceeded 1e-8");
  }
  trace.final_amplitudes = c;
  return trace;
}

double adiabaticity_margin(const TrapSchedule& schedule) {
  schedule.validate();
  const double total = schedule.total_duration();
  const int samples = 4096;
  double j1_max = 0.0, j2_max = 0.0;
  for (int k = 0; k <= samples; ++k) {
    const Couplings j = couplings_at(schedule, total * k / samples);
    j1_max = std::max(j1_max, j.j1);
    j2_max = std::max(j2_max, j.j2);
  }
  return std::hypot(j1_max, j2_max) * schedule.t_delay;
}

void write_populations_csv(const ThreeLevelTrace& trace, std::ostream& out) {
  out << "t,p1,p2,p3,J1,J2,theta\n";
  char line[256];
  for (Eigen::Index k = 0; k < trace.t.size(); ++k) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", trace.t[k],
                  trace.populations(k, 0), trace.populations(k, 1), trace.populations(k, 2),
                  trace.j1[k], trace.j2[k], trace.theta[k]);
    out << line;
  }
}

}  // namespace holesim
