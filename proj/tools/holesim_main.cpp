#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "holesim/bohm.hpp"
#include "holesim/experiments.hpp"
#include "holesim/framestore.hpp"
#include "holesim/holechain.hpp"

namespace {

using namespace holesim;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

// Flags shared by every run-driving subcommand; only flags the user actually
// set override the config file (flags > file > defaults).
struct Overrides {
  std::optional<std::string> config_path, symmetry, ramp_shape, first_mover;
  std::optional<double> alpha_as, omega_ratio, d_min, d_max, t_delay, t_ramp, t_hold, t_pre,
      t_post, jitter_amp, jitter_omega, dt, x_min, x_max, band_halfwidth, sigma_delta_factor;
  std::optional<int> hole_site, grid_points, frame_stride;
  std::optional<std::uint64_t> seed;
};

void add_config_flags(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON config file");
  cmd->add_option("--symmetry", ov.symmetry, "fermionic|bosonic");
  cmd->add_option("--alpha-as", ov.alpha_as, "scaled scattering length (alpha a_s)");
  cmd->add_option("--omega-ratio", ov.omega_ratio, "transverse/axial trap frequency ratio");
  cmd->add_option("--hole-site", ov.hole_site, "initial hole site (1..3)");
  cmd->add_option("--d-min", ov.d_min, "closest trap approach");
  cmd->add_option("--d-max", ov.d_max, "resting trap distance");
  cmd->add_option("--t-delay", ov.t_delay, "delay between the two trap movements");
  cmd->add_option("--t-ramp", ov.t_ramp, "approach/retreat ramp duration");
  cmd->add_option("--t-hold", ov.t_hold, "plateau duration at d_min");
  cmd->add_option("--t-pre", ov.t_pre, "idle time before the sequence");
  cmd->add_option("--t-post", ov.t_post, "idle time after the sequence");
  cmd->add_option("--ramp-shape", ov.ramp_shape, "linear|sin_squared");
  cmd->add_option("--first-mover", ov.first_mover, "right|left");
  cmd->add_option("--jitter-amp", ov.jitter_amp, "trap-position jitter amplitude A_s");
  cmd->add_option("--jitter-omega", ov.jitter_omega, "trap-position jitter frequency omega_s");
  cmd->add_option("--grid-points", ov.grid_points, "grid points per axis");
  cmd->add_option("--x-min", ov.x_min, "grid lower edge");
  cmd->add_option("--x-max", ov.x_max, "grid upper edge");
  cmd->add_option("--dt", ov.dt, "time step");
  cmd->add_option("--frame-stride", ov.frame_stride, "steps between stored frames");
  cmd->add_option("--band-halfwidth", ov.band_halfwidth, "counter-diagonal band half-width");
  cmd->add_option("--sigma-delta-factor", ov.sigma_delta_factor,
                  "contact regularization width in units of dx");
  cmd->add_option("--seed", ov.seed, "RNG seed recorded in outputs");
}

Config build_config(const Overrides& ov) {
  Config cfg = ov.config_path ? load_config(*ov.config_path) : Config{};
  if (ov.symmetry) apply_key(cfg, "symmetry", *ov.symmetry);
  if (ov.ramp_shape) apply_key(cfg, "ramp_shape", *ov.ramp_shape);
  if (ov.first_mover) apply_key(cfg, "first_mover", *ov.first_mover);
  if (ov.alpha_as) cfg.params.scaled_scattering_length = *ov.alpha_as;
  if (ov.omega_ratio) cfg.params.omega_ratio = *ov.omega_ratio;
  if (ov.hole_site) cfg.hole_site = *ov.hole_site;
  if (ov.d_min) cfg.schedule.d_min = *ov.d_min;
  if (ov.d_max) cfg.schedule.d_max = *ov.d_max;
  if (ov.t_delay) cfg.schedule.t_delay = *ov.t_delay;
  if (ov.t_ramp) cfg.schedule.t_ramp = *ov.t_ramp;
  if (ov.t_hold) cfg.schedule.t_hold = *ov.t_hold;
  if (ov.t_pre) cfg.schedule.t_pre = *ov.t_pre;
  if (ov.t_post) cfg.schedule.t_post = *ov.t_post;
  if (ov.jitter_amp || ov.jitter_omega) {
    JitterSpec j = cfg.schedule.jitter.value_or(JitterSpec{0.0, 0.0});
    if (ov.jitter_amp) j.amplitude = *ov.jitter_amp;
    if (ov.jitter_omega) j.omega = *ov.jitter_omega;
    if (j.amplitude == 0.0) cfg.schedule.jitter.reset();
    else cfg.schedule.jitter = j;
  }
  if (ov.grid_points) cfg.grid.points_per_axis = *ov.grid_points;
  if (ov.x_min) cfg.grid.x_min = *ov.x_min;
  if (ov.x_max) cfg.grid.x_max = *ov.x_max;
  if (ov.dt) cfg.grid.dt = *ov.dt;
  if (ov.frame_stride) cfg.grid.frame_stride = *ov.frame_stride;
  if (ov.band_halfwidth) cfg.band_halfwidth = *ov.band_halfwidth;
  if (ov.sigma_delta_factor) cfg.sigma_delta_factor = *ov.sigma_delta_factor;
  if (ov.seed) cfg.seed = *ov.seed;
  return cfg;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw data_error("cannot open output file: " + path);
  fn(os);
  if (!os) throw data_error("error while writing: " + path);
}

SweepAxis named_axis(const std::vector<std::string>& specs, const std::string& wanted) {
  for (const std::string& s : specs) {
    SweepAxis axis = parse_axis_spec(s);
    if (axis.name == wanted) return axis;
  }
  throw config_error("expected a --grid specification for \"" + wanted + "\"");
}

int run_cli(int argc, char** argv) {
  CLI::App app{"triple-well hole transport simulator"};
  app.require_subcommand(1);

  // transport
  auto* transport = app.add_subcommand("transport", "single transport run, report JSON");
  Overrides t_ov;
  std::string t_out, t_frames;
  add_config_flags(transport, t_ov);
  transport->add_option("--out", t_out, "report JSON path (default: stdout summary only)");
  transport->add_option("--frames", t_frames, "frame-store output path (QHWF)");
  transport->callback([&] {
    const Config cfg = build_config(t_ov);
    const RunReport report = run_transport(cfg, t_frames);
    if (!t_out.empty())
      with_output(t_out, [&](std::ostream& os) { write_report_json(report, cfg, os); });
    std::printf("F_1to3 = %.17g\n", report.fidelity[2]);
    if (report.leakage_warning)
      std::fprintf(stderr, "warning: boundary density %.3g suggests leakage\n",
                   report.max_boundary_density);
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "fidelity over a 2D parameter grid, CSV");
  Overrides s_ov;
  std::vector<std::string> s_grids;
  std::string s_out;
  int s_workers = 0;
  add_config_flags(sweep, s_ov);
  sweep->add_option("--grid", s_grids, "axis spec name=start:stop:count (exactly two)");
  sweep->add_option("--out", s_out, "CSV output path (default stdout)");
  sweep->add_option("--workers", s_workers, "worker threads (default HOLESIM_WORKERS)");
  sweep->callback([&] {
    if (s_grids.size() != 2)
      throw config_error("sweep needs exactly two --grid specifications");
    const Config cfg = build_config(s_ov);
    const SweepTable table =
        sweep_fidelity(parse_axis_spec(s_grids[0]), parse_axis_spec(s_grids[1]), cfg, s_workers);
    with_output(s_out, [&](std::ostream& os) { write_sweep_csv(table, os); });
  });

  // diode
  auto* diode = app.add_subcommand("diode", "diode fidelity over a scattering-length grid, CSV");
  Overrides d_ov;
  std::vector<std::string> d_grids;
  std::string d_out;
  int d_workers = 0;
  add_config_flags(diode, d_ov);
  diode->add_option("--grid", d_grids, "axis spec alpha_as=start:stop:count");
  diode->add_option("--out", d_out, "CSV output path (default stdout)");
  diode->add_option("--workers", d_workers, "worker threads");
  diode->callback([&] {
    if (d_grids.size() != 1)
      throw config_error("diode needs exactly one --grid specification (alpha_as)");
    Config cfg = build_config(d_ov);
    cfg.params.symmetry = Symmetry::Bosonic;
    const DiodeTable table = diode_scan(named_axis(d_grids, "alpha_as"), cfg, d_workers);
    with_output(d_out, [&](std::ostream& os) { write_diode_csv(table, os); });
  });

  // transistor
  auto* transistor = app.add_subcommand("transistor", "F_T from paired runs, JSON");
  Overrides tr_ov;
  std::string tr_out;
  add_config_flags(transistor, tr_ov);
  transistor->add_option("--out", tr_out, "JSON output path (default stdout)");
  transistor->callback([&] {
    const Config cfg = build_config(tr_ov);
    const TransistorRecord rec = transistor_eval(cfg);
    with_output(tr_out, [&](std::ostream& os) { write_transistor_json(rec, cfg, os); });
    std::fprintf(stderr, "F_T = %.17g\n", rec.f_transistor);
  });

  // jitter
  auto* jitter = app.add_subcommand("jitter", "transistor fidelity over a jitter grid, CSV");
  Overrides j_ov;
  std::vector<std::string> j_grids;
  std::string j_out;
  int j_workers = 0;
  add_config_flags(jitter, j_ov);
  jitter->add_option("--grid", j_grids,
                     "axis specs jitter_amplitude=... and jitter_omega=... (exactly two)");
  jitter->add_option("--out", j_out, "CSV output path (default stdout)");
  jitter->add_option("--workers", j_workers, "worker threads");
  jitter->callback([&] {
    if (j_grids.size() != 2)
      throw config_error("jitter needs exactly two --grid specifications");
    const Config cfg = build_config(j_ov);
    const JitterTable table = jitter_robustness(named_axis(j_grids, "jitter_amplitude"),
                                                named_axis(j_grids, "jitter_omega"), cfg,
                                                j_workers);
    with_output(j_out, [&](std::ostream& os) { write_jitter_csv(table, os); });
  });

  // bohm
  auto* bohm = app.add_subcommand("bohm", "quantum trajectories from a stored run");
  std::string b_frames, b_out, b_stats;
  int b_count = 4000;
  std::uint64_t b_seed = 1;
  double b_band = 1.0;
  bohm->add_option("--frames", b_frames, "QHWF frame store")->required();
  bohm->add_option("--count", b_count, "number of trajectories");
  bohm->add_option("--seed", b_seed, "sampler seed");
  bohm->add_option("--out", b_out, "trajectory CSV path (default stdout)");
  bohm->add_option("--stats", b_stats, "ensemble statistics JSON path");
  bohm->add_option("--band-halfwidth", b_band, "counter-diagonal band half-width");
  bohm->callback([&] {
    if (b_count < 1) throw config_error("--count must be >= 1");
    FrameStoreReader reader(b_frames);
    const Grid2D grid = reader.grid();
    const Symmetry sym = reader.header().symmetry;
    Wavefunction2D psi0{reader.frame(0), sym, 0.0};
    const Eigen::MatrixX2d initial = sample_initial(psi0, grid, b_count, b_seed);
    TrajectoryEnsemble ens = integrate_trajectories(reader, initial, BohmOptions{});
    ens.seed = b_seed;
    with_output(b_out, [&](std::ostream& os) {
      os << "trajectory_id,t,x1,x2,speed,flag\n";
      char line[160];
      for (int tr = 0; tr < static_cast<int>(ens.flags.size()); ++tr)
        for (Eigen::Index f = 0; f < ens.times.size(); ++f) {
          std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g,%.17g,%d\n", tr, ens.times[f],
                        ens.x1(f, tr), ens.x2(f, tr), ens.speed(f, tr),
                        static_cast<int>(ens.flags[tr]));
          os << line;
        }
    });
    if (!b_stats.empty()) {
      const int last = static_cast<int>(reader.header().frame_count) - 1;
      Wavefunction2D psi_final{reader.frame(last), sym, reader.frame_time(last)};
      const EnsembleStats st = ensemble_statistics(ens, psi_final, grid, b_band);
      with_output(b_stats, [&](std::ostream& os) {
        nlohmann::json j;
        j["frames"] = b_frames;
        j["count"] = st.count;
        j["seed"] = b_seed;
        j["tv_distance"] = st.tv_distance;
        j["median_speed"] = st.median_speed;
        j["max_speed"] = st.max_speed;
        j["crossers"] = st.crossers;
        j["min_crosser_peak_ratio"] = st.min_crosser_peak_ratio;
        j["max_crosser_speed"] = st.max_crosser_speed;
        j["node_terminations"] = st.node_terminations;
        j["flags_ok"] = st.flags_ok;
        j["flags_low_density"] = st.flags_low_density;
        j["flags_left_domain"] = st.flags_left_domain;
        j["quality_warning"] = st.quality_warning;
        os << j.dump(2) << "\n";
      });
    }
  });

  // chain
  auto* chain = app.add_subcommand("chain", "multisite hole chain (reduced model), CSV");
  int c_sites = 3;
  std::optional<double> c_jpeak, c_width, c_delay, c_total;
  double c_dt = 0.02;
  std::string c_out;
  bool c_verify = false;
  chain->add_option("--sites", c_sites, "odd number of sites");
  chain->add_option("--jpeak", c_jpeak, "pulse peak coupling");
  chain->add_option("--width", c_width, "pulse width");
  chain->add_option("--delay", c_delay, "even-to-odd pulse delay");
  chain->add_option("--total", c_total, "total duration");
  chain->add_option("--dt", c_dt, "integrator step");
  chain->add_option("--out", c_out, "population CSV path (default stdout)");
  chain->add_flag("--verify-darkstate", c_verify, "print the dark-state residual and exit");
  chain->callback([&] {
    const bool pulsed = c_jpeak || c_width || c_delay || c_total;
    ChainCouplingsFn couplings;
    double total = 0.0;
    if (pulsed) {
      if (!(c_jpeak && c_width && c_delay && c_total))
        throw config_error("--jpeak, --width, --delay, --total must be given together");
      couplings = even_odd_pulse_schedule(c_sites, *c_jpeak, *c_width, *c_delay, *c_total);
      total = *c_total;
    } else {
      if (c_sites != 3)
        throw config_error("without pulse parameters, chain supports --sites 3 only "
                           "(couplings come from the default trap schedule)");
      const TrapSchedule schedule;
      couplings = couplings_from_schedule(schedule);
      total = schedule.total_duration();
    }
    if (c_verify) {
      const HoleChainModel model{c_sites, couplings(total / 2.0)};
      const Eigen::VectorXd dark = multisite_dark_state(model);
      const double residual = (chain_hamiltonian(model) * dark).norm();
      std::printf("darkstate_residual = %.3e\n", residual);
      return;
    }
    Eigen::VectorXcd initial = Eigen::VectorXcd::Zero(c_sites);
    initial[0] = 1.0;
    const ChainTrace trace = propagate_chain(c_sites, couplings, total, c_dt, initial);
    with_output(c_out, [&](std::ostream& os) {
      os << "t";
      for (int s = 1; s <= c_sites; ++s) os << ",p" << s;
      os << ",dark_overlap\n";
      char buf[64];
      for (Eigen::Index r = 0; r < trace.t.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%.17g", trace.t[r]);
        os << buf;
        for (int s = 0; s < c_sites; ++s) {
          std::snprintf(buf, sizeof buf, ",%.17g", trace.populations(r, s));
          os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17g\n", trace.dark_overlap[r]);
        os << buf;
      }
    });
    std::printf("p_site%d = %.17g\n", c_sites,
                trace.populations(trace.t.size() - 1, c_sites - 1));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const data_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
}
