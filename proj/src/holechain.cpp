#include "holesim/holechain.hpp"

#include <cmath>

namespace holesim {

void HoleChainModel::validate() const {
  if (n < 3 || n % 2 == 0)
    throw std::domain_error("HoleChainModel: n must be odd and >= 3");
  if (couplings.size() != n - 1)
    throw std::invalid_argument("HoleChainModel: expected n-1 couplings");
  if ((couplings.array() < 0.0).any())
    throw std::domain_error("HoleChainModel: couplings must be non-negative");
}

Eigen::MatrixXd chain_hamiltonian(const HoleChainModel& model) {
  model.validate();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(model.n, model.n);
  for (int i = 0; i + 1 < model.n; ++i) h(i, i + 1) = h(i + 1, i) = -model.couplings[i];
  return h;
}

Eigen::VectorXd multisite_dark_state(const HoleChainModel& model) {
  model.validate();
  const auto& j = model.couplings;  // j[i] is J_{i+1} in 1-based labels
  Eigen::VectorXd d = Eigen::VectorXd::Zero(model.n);
  const int m_max = (model.n + 1) / 2;
  for (int m = 1; m <= m_max; ++m) {
    const int site = 2 * m - 1;  // 1-based
    double coeff = (m % 2 == 1) ? 1.0 : -1.0;
    for (int idx = 1; idx < site; idx += 2) coeff *= j[idx - 1];        // odd-index below
    for (int idx = 2 * m; idx <= model.n - 1; idx += 2) coeff *= j[idx - 1];  // even-index at/after
    d[site - 1] = coeff;
  }
  const double norm = d.norm();
  if (norm == 0.0)
    throw degenerate_dark_state("multisite_dark_state: all odd-site coefficients vanish");
  return d / norm;
}

ChainTrace propagate_chain(int n, const ChainCouplingsFn& couplings, double t_final, double dt,
                           const Eigen::VectorXcd& initial) {
  if (n < 3 || n % 2 == 0) throw std::domain_error("propagate_chain: n must be odd and >= 3");
  if (!(dt > 0.0) || !(t_final > 0.0))
    throw std::invalid_argument("propagate_chain: need positive dt and t_final");
  if (initial.size() != n) throw std::invalid_argument("propagate_chain: initial has wrong size");

  const int steps = std::max(1, static_cast<int>(std::ceil(t_final / dt)));
  const double h = t_final / steps;

  auto hamiltonian = [&](double t) {
    HoleChainModel model{n, couplings(t)};
    return chain_hamiltonian(model);
  };
  const std::complex<double> mi(0.0, -1.0);
  auto deriv = [&](double t, const Eigen::VectorXcd& c) -> Eigen::VectorXcd {
    return mi * (hamiltonian(t) * c);
  };

  ChainTrace trace;
  trace.t.resize(steps + 1);
  trace.populations.resize(steps + 1, n);
  trace.dark_overlap.resize(steps + 1);

  auto record = [&](int k, double t, const Eigen::VectorXcd& c) {
    trace.t[k] = t;
    trace.populations.row(k) = c.cwiseAbs2().transpose();
    try {
      const Eigen::VectorXd dark = multisite_dark_state({n, couplings(t)});
      trace.dark_overlap[k] = std::norm(dark.cast<std::complex<double>>().dot(c));
    } catch (const degenerate_dark_state&) {
      trace.dark_overlap[k] = std::nan("");
    }
  };

  Eigen::VectorXcd c = initial;
  record(0, 0.0, c);
  trace.norm_drift = std::abs(c.squaredNorm() - 1.0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    const Eigen::VectorXcd k1 = deriv(t, c);
    const Eigen::VectorXcd k2 = deriv(t + 0.5 * h, c + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = deriv(t + 0.5 * h, c + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = deriv(t + h, c + h * k3);
    c += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    record(k + 1, (k + 1) * h, c);
    trace.norm_drift = std::max(trace.norm_drift, std::abs(c.squaredNorm() - 1.0));
    if (trace.norm_drift > 1e-8)
      throw numerical_error("propagate_chain: norm drift exceeded 1e-8");
  }
  trace.final_amplitudes = c;
  return trace;
}

Eigen::VectorXd EvenOddPulses::operator()(double t) const {
  Eigen::VectorXd j(n - 1);
  for (int i = 1; i < n; ++i) {
    const double center = (i % 2 == 0) ? even_center() : odd_center();
    const double arg = (t - center) / width;
    j[i - 1] = j_peak * std::exp(-0.5 * arg * arg);
  }
  return j;
}

EvenOddPulses even_odd_pulse_schedule(int n, double j_peak, double width, double delay,
                                      double total) {
  if (n < 3 || n % 2 == 0)
    throw std::domain_error("even_odd_pulse_schedule: n must be odd and >= 3");
  if (!(j_peak > 0.0) || !(width > 0.0) || delay < 0.0)
    throw std::invalid_argument("even_odd_pulse_schedule: need j_peak, width > 0 and delay >= 0");
  if (!(total > delay + width))
    throw std::invalid_argument("even_odd_pulse_schedule: total must exceed delay + width");
  return {n, j_peak, width, delay, total};
}

ChainCouplingsFn couplings_from_schedule(const TrapSchedule& schedule) {
  schedule.validate();
  return [schedule](double t) {
    const TrapLayout lay = trap_positions(schedule, t);
    Eigen::VectorXd j(2);
    j << tunneling_rate(lay.centers[1] - lay.centers[0]),
        tunneling_rate(lay.centers[2] - lay.centers[1]);
    return j;
  };
}

}  // namespace holesim
