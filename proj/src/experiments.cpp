#include "holesim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <ostream>
#include <thread>

#include <json.hpp>

namespace holesim {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Commas would break the CSV; error text goes in the last column.
std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n') c = ';';
  return s;
}

void apply_axis_value(Config& cfg, const std::string& name, double value) {
  if (name == "t_delay") cfg.schedule.t_delay = value;
  else if (name == "d_min") cfg.schedule.d_min = value;
  else if (name == "alpha_as") cfg.params.scaled_scattering_length = value;
  else if (name == "jitter_amplitude" || name == "jitter_omega") {
    JitterSpec j = cfg.schedule.jitter.value_or(JitterSpec{0.0, 1.0});
    (name == "jitter_amplitude" ? j.amplitude : j.omega) = value;
    if (j.amplitude == 0.0) cfg.schedule.jitter.reset();
    else cfg.schedule.jitter = j;
  } else {
    throw config_error("unsupported sweep axis \"" + name + "\"");
  }
}

// Fixed row slots + atomic job counter: output identical for any worker count.
void run_jobs(int jobs, int workers, const std::function<void(int)>& body) {
  if (workers <= 0) workers = default_worker_count();
  workers = std::min(workers, jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

json report_json(const RunReport& r) {
  json j;
  j["initial_site"] = r.initial_site;
  j["symmetry"] = r.symmetry == Symmetry::Fermionic ? "fermionic" : "bosonic";
  j["alpha_as"] = r.alpha_as;
  j["F_to_1"] = r.fidelity[0];
  j["F_to_2"] = r.fidelity[1];
  j["F_to_3"] = r.fidelity[2];
  j["max_middle_population"] = r.max_middle_population;
  j["max_counterdiagonal"] = r.max_counterdiagonal;
  j["final_counterdiagonal"] = r.final_counterdiagonal;
  j["norm_drift"] = r.norm_drift;
  j["symmetry_error"] = r.symmetry_error;
  j["max_boundary_density"] = r.max_boundary_density;
  j["leakage_warning"] = r.leakage_warning;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(r.config_hash));
  j["config_hash"] = buf;
  j["seed"] = r.seed;
  j["wall_seconds"] = r.wall_seconds;
  return j;
}

}  // namespace

std::vector<double> SweepAxis::values() const {
  if (count < 1) throw config_error("axis \"" + name + "\": count must be >= 1");
  std::vector<double> v(count);
  if (count == 1) {
    v[0] = start;
  } else {
    const double step = (stop - start) / (count - 1);
    for (int i = 0; i < count; ++i) v[i] = start + step * i;
    v[count - 1] = stop;  // inclusive endpoint, no roundoff creep
  }
  return v;
}

SweepAxis parse_axis_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  const auto c1 = spec.find(':', eq == std::string::npos ? 0 : eq);
  const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
  if (eq == std::string::npos || c1 == std::string::npos || c2 == std::string::npos)
    throw config_error("axis spec must look like name=start:stop:count, got \"" + spec + "\"");
  SweepAxis axis;
  axis.name = spec.substr(0, eq);
  try {
    std::size_t used = 0;
    axis.start = std::stod(spec.substr(eq + 1, c1 - eq - 1), &used);
    axis.stop = std::stod(spec.substr(c1 + 1, c2 - c1 - 1), &used);
    axis.count = std::stoi(spec.substr(c2 + 1), &used);
    if (c2 + 1 + used != spec.size()) throw std::invalid_argument("trailing junk");
  } catch (const std::exception&) {
    throw config_error("cannot parse axis spec \"" + spec + "\"");
  }
  if (axis.count < 1) throw config_error("axis \"" + axis.name + "\": count must be >= 1");
  return axis;
}

int default_worker_count() {
  if (const char* env = std::getenv("HOLESIM_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw config_error(std::string("HOLESIM_WORKERS must be a positive integer, got \"") + env +
                         "\"");
    return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

RunReport run_transport(const Config& cfg, const std::string& frames_path) {
  cfg.validate();
  const TrapLayout layout0 = trap_positions(cfg.schedule, 0.0);
  const Wavefunction2D psi0 = localized_hole_state(cfg.hole_site, layout0, cfg.params.symmetry, cfg.grid);

  EvolveOptions opt;
  opt.frames_path = frames_path;
  opt.sigma_delta_factor = cfg.sigma_delta_factor;
  opt.band_halfwidth = cfg.band_halfwidth;
  EvolveResult res = evolve(psi0, cfg.schedule, cfg.params, cfg.grid, opt);

  const TrapLayout layout_end = trap_positions(cfg.schedule, cfg.schedule.total_duration());
  for (int site = 1; site <= 3; ++site)
    res.report.fidelity[site - 1] = fidelity(res.psi, site, layout_end, cfg.grid);
  res.report.initial_site = cfg.hole_site;
  res.report.config_hash = config_hash(cfg);
  res.report.seed = cfg.seed;
  return res.report;
}

SweepTable sweep_fidelity(const SweepAxis& axis1, const SweepAxis& axis2, const Config& base,
                          int workers) {
  const std::vector<double> v1 = axis1.values();
  const std::vector<double> v2 = axis2.values();
  SweepTable table;
  table.base = base;
  table.axis1 = axis1;
  table.axis2 = axis2;
  table.rows.resize(v1.size() * v2.size());

  run_jobs(static_cast<int>(table.rows.size()), workers, [&](int idx) {
    SweepRow& row = table.rows[idx];
    row.p1 = v1[idx / v2.size()];
    row.p2 = v2[idx % v2.size()];
    try {
      Config cfg = base;
      apply_axis_value(cfg, axis1.name, row.p1);
      apply_axis_value(cfg, axis2.name, row.p2);
      row.report = run_transport(cfg);
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& os) {
  write_config_comment(table.base, os);
  os << "# axis1 = " << table.axis1.name << ", axis2 = " << table.axis2.name << "\n";
  os << "p1,p2,F_1to3,F_to_1,F_to_2,max_middle_population,max_counterdiagonal,"
        "norm_drift,symmetry_error,status\n";
  for (const SweepRow& r : table.rows) {
    if (r.failed) {
      os << fmt(r.p1) << ',' << fmt(r.p2) << ",nan,nan,nan,nan,nan,nan,nan,"
         << sanitize(r.error) << "\n";
      continue;
    }
    os << fmt(r.p1) << ',' << fmt(r.p2) << ',' << fmt(r.report.fidelity[2]) << ','
       << fmt(r.report.fidelity[0]) << ',' << fmt(r.report.fidelity[1]) << ','
       << fmt(r.report.max_middle_population) << ',' << fmt(r.report.max_counterdiagonal) << ','
       << fmt(r.report.norm_drift) << ',' << fmt(r.report.symmetry_error) << ",ok\n";
  }
}

DiodeTable diode_scan(const SweepAxis& as_grid, const Config& base, int workers) {
  if (base.params.symmetry != Symmetry::Bosonic)
    throw config_error("diode scan requires bosonic symmetry");
  const std::vector<double> as_values = as_grid.values();
  DiodeTable table;
  table.base = base;
  table.rows.resize(as_values.size());

  // Two independent jobs per scattering length (hole at 1, hole at 3); each
  // job owns its slot, rows are merged after the pool drains.
  struct HalfResult {
    RunReport report;
    bool failed = false;
    std::string error;
  };
  std::vector<HalfResult> halves(as_values.size() * 2);
  run_jobs(static_cast<int>(halves.size()), workers, [&](int idx) {
    HalfResult& half = halves[idx];
    try {
      Config cfg = base;
      cfg.params.scaled_scattering_length = as_values[idx / 2];
      cfg.hole_site = idx % 2 == 0 ? 1 : 3;
      half.report = run_transport(cfg);
    } catch (const std::exception& e) {
      half.failed = true;
      half.error = e.what();
    }
  });
  for (std::size_t p = 0; p < as_values.size(); ++p) {
    DiodeRow& row = table.rows[p];
    row.alpha_as = as_values[p];
    const HalfResult& fwd = halves[2 * p];
    const HalfResult& rev = halves[2 * p + 1];
    if (fwd.failed || rev.failed) {
      row.failed = true;
      row.error = fwd.failed ? fwd.error : rev.error;
      continue;
    }
    row.f_1to3 = fwd.report.fidelity[2];
    row.f_3to1 = rev.report.fidelity[0];
    row.f_3to2 = rev.report.fidelity[1];
    row.f_diode = row.f_1to3 * (1.0 - row.f_3to1);
  }
  return table;
}

void write_diode_csv(const DiodeTable& table, std::ostream& os) {
  write_config_comment(table.base, os);
  os << "alpha_as,F_1to3,F_3to1,F_3to2,F_D,status\n";
  for (const DiodeRow& r : table.rows) {
    if (r.failed) {
      os << fmt(r.alpha_as) << ",nan,nan,nan,nan," << sanitize(r.error) << "\n";
      continue;
    }
    os << fmt(r.alpha_as) << ',' << fmt(r.f_1to3) << ',' << fmt(r.f_3to1) << ','
       << fmt(r.f_3to2) << ',' << fmt(r.f_diode) << ",ok\n";
  }
}

TransistorRecord transistor_eval(const Config& cfg) {
  TransistorRecord rec;
  Config fermionic = cfg;
  fermionic.params.symmetry = Symmetry::Fermionic;
  rec.fermionic = run_transport(fermionic);
  Config bosonic = cfg;
  bosonic.params.symmetry = Symmetry::Bosonic;
  rec.bosonic = run_transport(bosonic);
  rec.f_transistor = rec.fermionic.fidelity[2] * (1.0 - rec.bosonic.fidelity[2]);
  return rec;
}

void write_transistor_json(const TransistorRecord& rec, const Config& cfg, std::ostream& os) {
  json j;
  j["config"] = json::parse(canonical_dump(cfg));
  j["fermionic"] = report_json(rec.fermionic);
  j["bosonic"] = report_json(rec.bosonic);
  j["F_T"] = rec.f_transistor;
  os << j.dump(2) << "\n";
}

JitterTable jitter_robustness(const SweepAxis& amplitude_grid, const SweepAxis& omega_grid,
                              const Config& base, int workers) {
  const std::vector<double> amps = amplitude_grid.values();
  const std::vector<double> omegas = omega_grid.values();
  JitterTable table;
  table.base = base;
  table.rows.resize(amps.size() * omegas.size());

  run_jobs(static_cast<int>(table.rows.size()), workers, [&](int idx) {
    JitterRow& row = table.rows[idx];
    row.amplitude = amps[idx / omegas.size()];
    row.omega = omegas[idx % omegas.size()];
    try {
      Config cfg = base;
      if (row.amplitude == 0.0) cfg.schedule.jitter.reset();
      else cfg.schedule.jitter = JitterSpec{row.amplitude, row.omega};
      const TransistorRecord rec = transistor_eval(cfg);
      row.f_fermionic = rec.fermionic.fidelity[2];
      row.f_bosonic = rec.bosonic.fidelity[2];
      row.f_transistor = rec.f_transistor;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });
  return table;
}

void write_jitter_csv(const JitterTable& table, std::ostream& os) {
  write_config_comment(table.base, os);
  os << "jitter_amplitude,jitter_omega,F_F,F_B,F_T,status\n";
  for (const JitterRow& r : table.rows) {
    if (r.failed) {
      os << fmt(r.amplitude) << ',' << fmt(r.omega) << ",nan,nan,nan," << sanitize(r.error)
         << "\n";
      continue;
    }
    os << fmt(r.amplitude) << ',' << fmt(r.omega) << ',' << fmt(r.f_fermionic) << ','
       << fmt(r.f_bosonic) << ',' << fmt(r.f_transistor) << ",ok\n";
  }
}

void write_report_json(const RunReport& report, const Config& cfg, std::ostream& os) {
  json j = report_json(report);
  j["config"] = json::parse(canonical_dump(cfg));
  os << j.dump(2) << "\n";
}

}  // namespace holesim
