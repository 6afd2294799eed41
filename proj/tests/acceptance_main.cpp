// Acceptance gate: one [PASS]/[FAIL] line per criterion with the measured
// values inline, then a RESULT summary line.  Heavy TDSE runs are cached in
// --workdir keyed by config hash, so single-criterion reruns (--criterion N)
// reuse finished artifacts; wipe the workdir for a cold start.  Runtime
// clauses use the wall time recorded by the original run, not the cache hit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "holesim/bohm.hpp"
#include "holesim/config.hpp"
#include "holesim/experiments.hpp"
#include "holesim/holechain.hpp"
#include "holesim/threelevel.hpp"

using namespace holesim;

namespace {

std::filesystem::path g_workdir;
// Every TDSE run touched this invocation (fresh or cached); criterion 7
// checks norm and exchange symmetry across all of them.
std::vector<std::pair<std::string, RunReport>> g_runs;

std::string hash16(const Config& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  return buf;
}

RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.initial_site = j.at("initial_site").get<int>();
  r.symmetry = j.at("symmetry").get<std::string>() == "bosonic" ? Symmetry::Bosonic
                                                                : Symmetry::Fermionic;
  r.alpha_as = j.at("alpha_as").get<double>();
  r.fidelity = {j.at("F_to_1").get<double>(), j.at("F_to_2").get<double>(),
                j.at("F_to_3").get<double>()};
  r.max_middle_population = j.at("max_middle_population").get<double>();
  r.max_counterdiagonal = j.at("max_counterdiagonal").get<double>();
  r.final_counterdiagonal = j.at("final_counterdiagonal").get<double>();
  r.norm_drift = j.at("norm_drift").get<double>();
  r.symmetry_error = j.at("symmetry_error").get<double>();
  r.max_boundary_density = j.at("max_boundary_density").get<double>();
  r.leakage_warning = j.at("leakage_warning").get<bool>();
  r.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
  r.seed = j.at("seed").get<std::uint64_t>();
  r.wall_seconds = j.at("wall_seconds").get<double>();
  return r;
}

bool frames_readable(const std::string& path) {
  try {
    FrameStoreReader reader(path);
    return reader.header().frame_count > 0;
  } catch (...) {
    return false;
  }
}

// Runs the transport (or reloads its cached report), optionally keeping the
// frame store next to it.  frames_out receives the store path when asked for.
RunReport cached_transport(const Config& cfg, const std::string& tag, bool want_frames = false,
                           std::string* frames_out = nullptr) {
  const std::string stem = tag + "-" + hash16(cfg);
  const auto report_path = g_workdir / (stem + ".json");
  const auto frames_path = g_workdir / (stem + ".qhwf");
  if (frames_out) *frames_out = frames_path.string();

  if (std::filesystem::exists(report_path) &&
      (!want_frames || frames_readable(frames_path.string()))) {
    std::ifstream in(report_path);
    RunReport r = report_from_json(nlohmann::json::parse(in));
    g_runs.emplace_back(tag, r);
    return r;
  }

  std::fprintf(stderr, "# running %s (hash %s)\n", tag.c_str(), hash16(cfg).c_str());
  RunReport r = run_transport(cfg, want_frames ? frames_path.string() : "");
  std::ofstream out(report_path);
  write_report_json(r, cfg, out);
  g_runs.emplace_back(tag, r);
  return r;
}

// One line per criterion; every clause prints its measured value and gate,
// with a FAIL marker on the violated ones.
struct Clauses {
  bool pass = true;
  std::string detail;

  void add(const std::string& frag, bool ok) {
    if (!detail.empty()) detail += ", ";
    detail += frag;
    if (!ok) detail += " FAIL";
    pass = pass && ok;
  }
  void add(const char* name, double value, const char* rel, double bound, bool ok) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s=%.6g (%s%g)", name, value, rel, bound);
    add(buf, ok);
  }
  void le(const char* name, double value, double bound) { add(name, value, "<=", bound, value <= bound); }
  void ge(const char* name, double value, double bound) { add(name, value, ">=", bound, value >= bound); }
  void lt(const char* name, double value, double bound) { add(name, value, "<", bound, value < bound); }
};

bool emit(int idx, const char* title, const Clauses& cl) {
  std::printf("[%s] C%d %s: %s\n", cl.pass ? "PASS" : "FAIL", idx, title, cl.detail.c_str());
  std::fflush(stdout);
  return cl.pass;
}

Config default_config() { return Config{}; }

Config bosonic_config(double alpha_as) {
  Config cfg;
  cfg.params.symmetry = Symmetry::Bosonic;
  cfg.params.scaled_scattering_length = alpha_as;
  return cfg;
}

// --- criteria -------------------------------------------------------------

bool criterion1() {
  const Config cfg = default_config();
  const RunReport r = cached_transport(cfg, "fermi_default", /*want_frames=*/true);
  Clauses cl;
  cl.ge("F_1to3", r.fidelity[2], 0.99);
  cl.le("max_mid", r.max_middle_population, 0.05);
  cl.le("max_cd", r.max_counterdiagonal, 0.05);
  cl.le("wall_s", r.wall_seconds, 900.0);
  return emit(1, "fermionic transport", cl);
}

bool criterion2() {
  const RunReport plus = cached_transport(bosonic_config(2.32e-2), "bose_plus");
  const RunReport minus = cached_transport(bosonic_config(-7.98e-2), "bose_minus");
  const RunReport zero = cached_transport(bosonic_config(0.0), "bose_zero");
  Clauses cl;
  cl.ge("F(+2.32e-2)", plus.fidelity[2], 0.99);
  cl.ge("F(-7.98e-2)", minus.fidelity[2], 0.99);
  cl.le("F(a_s=0)", zero.fidelity[2], 0.05);
  cl.le("wall_s", plus.wall_seconds + minus.wall_seconds + zero.wall_seconds, 2700.0);
  return emit(2, "bosonic transport", cl);
}

bool criterion3() {
  Config base = bosonic_config(0.0);
  base.grid.points_per_axis = 192;
  const SweepAxis axis{"alpha_as", 0.0, 0.03, 13};

  const auto cache = g_workdir / ("diode-" + hash16(base) + ".json");
  std::vector<DiodeRow> rows;
  double wall = 0.0;
  if (std::filesystem::exists(cache)) {
    std::ifstream in(cache);
    const nlohmann::json j = nlohmann::json::parse(in);
    wall = j.at("wall_seconds").get<double>();
    for (const auto& jr : j.at("rows")) {
      DiodeRow row;
      row.alpha_as = jr.at("alpha_as").get<double>();
      row.f_1to3 = jr.at("F_1to3").get<double>();
      row.f_3to1 = jr.at("F_3to1").get<double>();
      row.f_3to2 = jr.at("F_3to2").get<double>();
      row.f_diode = jr.at("F_D").get<double>();
      row.failed = jr.at("failed").get<bool>();
      rows.push_back(row);
    }
  } else {
    std::fprintf(stderr, "# running diode scan, 13 points x 2 runs at 192^2\n");
    const auto t0 = std::chrono::steady_clock::now();
    const DiodeTable table = diode_scan(axis, base);
    wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows = table.rows;
    nlohmann::json j;
    j["wall_seconds"] = wall;
    for (const auto& row : rows)
      j["rows"].push_back({{"alpha_as", row.alpha_as},
                           {"F_1to3", row.f_1to3},
                           {"F_3to1", row.f_3to1},
                           {"F_3to2", row.f_3to2},
                           {"F_D", row.f_diode},
                           {"failed", row.failed}});
    std::ofstream out(cache);
    out << j.dump(2) << "\n";
    std::ofstream csv(g_workdir / ("diode-" + hash16(base) + ".csv"));
    write_diode_csv(table, csv);
  }

  // "near 4.25e-3" with the spec's plot-read tolerance of +-50% in a_s.
  double peak = 0.0, peak_as = 0.0;
  int rows_ok = 0;
  for (const auto& row : rows) {
    if (row.failed) continue;
    ++rows_ok;
    if (row.alpha_as >= 0.5 * 4.25e-3 && row.alpha_as <= 1.5 * 4.25e-3 && row.f_diode > peak) {
      peak = row.f_diode;
      peak_as = row.alpha_as;
    }
  }
  Clauses cl;
  char frag[120];
  std::snprintf(frag, sizeof frag, "peak_F_D=%.6g at a_s=%.4g (>=0.9)", peak, peak_as);
  cl.add(frag, peak >= 0.9);
  cl.le("F_D(0)", rows.front().f_diode, 0.2);
  cl.le("F_D(0.03)", rows.back().f_diode, 0.2);
  cl.add("rows_ok", rows_ok, "==", 13.0, rows_ok == 13);
  cl.le("wall_s", wall, 21600.0);
  return emit(3, "diode scan", cl);
}

bool criterion4() {
  // F_T at defaults shares the criterion-1 fermionic and criterion-2 a_s=0
  // bosonic runs (identical configs, sector aside).
  const RunReport f0 = cached_transport(default_config(), "fermi_default");
  const RunReport b0 = cached_transport(bosonic_config(0.0), "bose_zero");
  const double ft0 = f0.fidelity[2] * (1.0 - b0.fidelity[2]);

  auto jittered = [](double amp, double omega, Symmetry s) {
    Config cfg;
    cfg.params.symmetry = s;
    cfg.schedule.jitter = JitterSpec{amp, omega};
    return cfg;
  };
  const RunReport fs = cached_transport(jittered(0.3, 0.1, Symmetry::Fermionic), "jitter_slow_f");
  const RunReport bs = cached_transport(jittered(0.3, 0.1, Symmetry::Bosonic), "jitter_slow_b");
  const RunReport fr = cached_transport(jittered(0.3, 1.0, Symmetry::Fermionic), "jitter_res_f");
  const RunReport br = cached_transport(jittered(0.3, 1.0, Symmetry::Bosonic), "jitter_res_b");
  const double ft_slow = fs.fidelity[2] * (1.0 - bs.fidelity[2]);
  const double ft_res = fr.fidelity[2] * (1.0 - br.fidelity[2]);

  Clauses cl;
  cl.add("F_T", ft0, ">", 0.99, ft0 > 0.99);
  cl.add("F_T(0.3,0.1)", ft_slow, ">", 0.99, ft_slow > 0.99);
  cl.lt("F_T(0.3,1.0)", ft_res, 0.9);
  return emit(4, "transistor and jitter", cl);
}

bool criterion5() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  double worst_null = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double j1 = u(rng), j2 = u(rng);
    const auto d = dark_state(mixing_angle(j1, j2));
    worst_null = std::max(worst_null, (hole_hamiltonian3(j1, j2) * d).cwiseAbs().maxCoeff());
  }

  const TrapSchedule schedule;  // default profile
  const double margin = adiabaticity_margin(schedule);
  const ThreeLevelTrace trace = propagate_amplitudes(schedule);
  const double p3 = trace.populations(trace.populations.rows() - 1, 2);
  const double max_mid = trace.populations.col(1).maxCoeff();

  Clauses cl;
  cl.le("nullity", worst_null, 1e-14);
  cl.ge("margin", margin, 10.0);
  cl.ge("P3", p3, 0.99);
  cl.le("max_mid", max_mid, 0.01);
  return emit(5, "three-level reduced model", cl);
}

bool criterion6() {
  std::mt19937_64 rng(171717);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  double worst_h = 0.0, worst_even = 0.0;
  for (int n : {3, 5, 7, 9, 11}) {
    for (int rep = 0; rep < 50; ++rep) {
      HoleChainModel model;
      model.n = n;
      model.couplings = Eigen::VectorXd::NullaryExpr(n - 1, [&](Eigen::Index) { return u(rng); });
      const Eigen::VectorXd d = multisite_dark_state(model);
      worst_h = std::max(worst_h, (chain_hamiltonian(model) * d).cwiseAbs().maxCoeff());
      for (int site = 1; site < n; site += 2)  // even sites, 0-based odd index
        worst_even = std::max(worst_even, std::abs(d[site]));
    }
  }

  HoleChainModel equal5;
  equal5.n = 5;
  equal5.couplings = Eigen::VectorXd::Constant(4, 0.2);
  const Eigen::VectorXd d5 = multisite_dark_state(equal5);
  Eigen::VectorXd ref(5);
  ref << 1.0, 0.0, -1.0, 0.0, 1.0;
  ref /= std::sqrt(3.0);
  const double dev5 = (d5 - ref).cwiseAbs().maxCoeff();

  const EvenOddPulses pulses = even_odd_pulse_schedule(5, 0.2, 250.0, 350.0, 2400.0);
  Eigen::VectorXcd init = Eigen::VectorXcd::Zero(5);
  init[0] = 1.0;
  const ChainTrace trace = propagate_chain(5, pulses, pulses.total, 0.02, init);
  const double p5 = trace.populations(trace.populations.rows() - 1, 4);

  Clauses cl;
  cl.le("max|H*D|", worst_h, 1e-12);
  cl.le("even_support", worst_even, 1e-12);
  cl.le("n5_equal_dev", dev5, 1e-12);
  cl.ge("P5", p5, 0.99);
  return emit(6, "multisite chain", cl);
}

bool criterion7() {
  const Config base = default_config();
  const RunReport r0 = cached_transport(base, "fermi_default");

  Config gcfg = base;
  gcfg.params.scaled_scattering_length = 2.32e-2;  // inert in the fermionic sector
  const RunReport rg = cached_transport(gcfg, "fermi_g");

  Config half = base;
  half.grid.dt = 0.0025;
  const RunReport rh = cached_transport(half, "fermi_dthalf");

  double worst_norm = 0.0, worst_sym = 0.0;
  std::string norm_tag = "-", sym_tag = "-";
  for (const auto& [tag, rep] : g_runs) {
    if (rep.norm_drift > worst_norm) worst_norm = rep.norm_drift, norm_tag = tag;
    if (rep.symmetry_error > worst_sym) worst_sym = rep.symmetry_error, sym_tag = tag;
  }

  Clauses cl;
  char frag[160];
  std::snprintf(frag, sizeof frag, "max|norm-1|=%.3g [%s] (<=1e-8)", worst_norm, norm_tag.c_str());
  cl.add(frag, worst_norm <= 1e-8);
  std::snprintf(frag, sizeof frag, "max_sym_err=%.3g [%s] (<=1e-10)", worst_sym, sym_tag.c_str());
  cl.add(frag, worst_sym <= 1e-10);
  cl.le("g_independence", std::abs(rg.fidelity[2] - r0.fidelity[2]), 1e-6);
  cl.lt("dt_halving_dF", std::abs(rh.fidelity[2] - r0.fidelity[2]), 1e-4);
  std::snprintf(frag, sizeof frag, "runs_checked=%zu", g_runs.size());
  cl.add(frag, !g_runs.empty());
  return emit(7, "conservation and symmetry", cl);
}

bool criterion8() {
  const Config cfg = default_config();
  std::string frames;
  cached_transport(cfg, "fermi_default", /*want_frames=*/true, &frames);

  const auto t0 = std::chrono::steady_clock::now();
  FrameStoreReader reader(frames);
  const Grid2D grid = reader.grid();
  const Symmetry sym = reader.header().symmetry;
  const Wavefunction2D psi0{reader.frame(0), sym, 0.0};
  const Eigen::MatrixX2d initial = sample_initial(psi0, grid, 4000, cfg.seed);
  const TrajectoryEnsemble ens = integrate_trajectories(reader, initial);
  const std::uint32_t last = reader.header().frame_count - 1;
  const Wavefunction2D psiT{reader.frame(last), sym, reader.frame_time(last)};
  const EnsembleStats st = ensemble_statistics(ens, psiT, grid, cfg.band_halfwidth);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const double ratio = st.median_speed > 0.0 ? st.max_crosser_speed / st.median_speed : 0.0;
  Clauses cl;
  cl.le("tv", st.tv_distance, 0.05);
  cl.add("node_terminations", st.node_terminations, "==", 0.0, st.node_terminations == 0);
  char frag[160];
  std::snprintf(frag, sizeof frag, "crosser_speed_ratio=%.4g over %d crossers (>=5)", ratio,
                st.crossers);
  cl.add(frag, ratio >= 5.0);
  cl.le("wall_s", wall, 600.0);
  return emit(8, "Bohmian trajectories", cl);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"holesim acceptance criteria"};
  int criterion = 0;
  std::string workdir = "acceptance_work";
  app.add_option("--criterion", criterion, "run a single criterion (1-8); default: all")
      ->check(CLI::Range(1, 8));
  app.add_option("--workdir", workdir, "artifact cache directory");
  CLI11_PARSE(app, argc, argv);

  g_workdir = workdir;
  std::filesystem::create_directories(g_workdir);

  using Fn = bool (*)();
  const Fn criteria[8] = {criterion1, criterion2, criterion3, criterion4,
                          criterion5, criterion6, criterion7, criterion8};

  std::string passed, failed;
  int npass = 0, nrun = 0;
  for (int i = 1; i <= 8; ++i) {
    if (criterion != 0 && criterion != i) continue;
    bool ok = false;
    try {
      ok = criteria[i - 1]();
    } catch (const std::exception& e) {
      Clauses cl;
      cl.add(std::string("exception: ") + e.what(), false);
      emit(i, "aborted", cl);
    }
    ++nrun;
    auto& bucket = ok ? passed : failed;
    if (!bucket.empty()) bucket += ",";
    bucket += "C" + std::to_string(i);
    if (ok) ++npass;
  }
  std::printf("RESULT pass=%s fail=%s (%d/%d)\n", passed.empty() ? "-" : passed.c_str(),
              failed.empty() ? "-" : failed.c_str(), npass, nrun);
  return nrun - npass;
}
