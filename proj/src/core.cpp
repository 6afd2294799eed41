#include "holesim/core.hpp"

#include <cmath>
#include <string>

namespace holesim {

void TrapSchedule::validate() const {
  if (!(d_min > 0.0) || !(d_min < d_max))
    throw std::invalid_argument("TrapSchedule: require 0 < d_min < d_max");
  if (t_delay < 0.0 || t_ramp < 0.0 || t_hold < 0.0 || t_pre < 0.0 || t_post < 0.0)
    throw std::invalid_argument("TrapSchedule: durations must be non-negative");
  if (jitter && std::abs(jitter->amplitude) >= d_min)
    throw std::invalid_argument("TrapSchedule: jitter amplitude must stay below d_min");
}

namespace {

double ramp01(RampShape shape, double v) {
  if (shape == RampShape::Linear) return v;
  const double s = std::sin(0.5 * kPi * v);
  return s * s;
}

// Distance of one outer trap from the middle trap, u = time since this trap's
// approach began.  d_max outside the active window; ramp / hold / ramp inside.
double approach_distance(const TrapSchedule& s, double u) {
  const double t_active = 2.0 * s.t_ramp + s.t_hold;
  if (u < 0.0 || u >= t_active) return s.d_max;
  if (u < s.t_ramp)
    return s.d_max + (s.d_min - s.d_max) * ramp01(s.ramp_shape, u / s.t_ramp);
  if (u < s.t_ramp + s.t_hold) return s.d_min;
  return s.d_min + (s.d_max - s.d_min) * ramp01(s.ramp_shape, (u - s.t_ramp - s.t_hold) / s.t_ramp);
}

}  // namespace

TrapLayout trap_positions(const TrapSchedule& schedule, double t) {
  schedule.validate();
  const double total = schedule.total_duration();
  if (t < 0.0 || t > total)
    throw std::out_of_range("trap_positions: t = " + std::to_string(t) +
                            " outside [0, " + std::to_string(total) + "]");
  const bool right_first = schedule.first_mover == FirstMover::RightTrap;
  const double start_right = right_first ? schedule.t_pre : schedule.t_pre + schedule.t_delay;
  const double start_left = right_first ? schedule.t_pre + schedule.t_delay : schedule.t_pre;
  double d_left = approach_distance(schedule, t - start_left);
  double d_right = approach_distance(schedule, t - start_right);
  if (schedule.jitter) {
    const double wobble = schedule.jitter->amplitude * std::cos(schedule.jitter->omega * t);
    d_left += wobble;
    d_right += wobble;
  }
  TrapLayout layout;
  layout.centers.resize(3);
  layout.centers << -d_left, 0.0, d_right;
  return layout;
}

}  // namespace holesim
