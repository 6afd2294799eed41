#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "holesim/config.hpp"
#include "holesim/evolve.hpp"

namespace holesim {

// One swept parameter: "name=start:stop:count" with an inclusive linear grid.
// Valid names: t_delay, d_min, alpha_as (plus the jitter axes used by the
// jitter table: jitter_amplitude, jitter_omega).
struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  std::vector<double> values() const;
};

SweepAxis parse_axis_spec(const std::string& spec);

// Worker-count default: HOLESIM_WORKERS if set, else hardware concurrency.
int default_worker_count();

// Full transport run per config: initial hole state, evolution, fidelities
// against the final trap layout.  frames_path, when nonempty, receives the
// frame store of the run.
RunReport run_transport(const Config& cfg, const std::string& frames_path = "");

struct SweepRow {
  double p1 = 0.0, p2 = 0.0;
  RunReport report;
  bool failed = false;
  std::string error;
};

struct SweepTable {
  Config base;
  SweepAxis axis1, axis2;
  std::vector<SweepRow> rows;  // axis1-major order
};

// One run_transport per grid point; failures are recorded per row and the
// sweep continues.  Row order is fixed by the grid regardless of workers.
SweepTable sweep_fidelity(const SweepAxis& axis1, const SweepAxis& axis2, const Config& base,
                          int workers = 0);
void write_sweep_csv(const SweepTable& table, std::ostream& os);

struct DiodeRow {
  double alpha_as = 0.0;
  double f_1to3 = 0.0, f_3to1 = 0.0, f_3to2 = 0.0, f_diode = 0.0;
  bool failed = false;
  std::string error;
};

struct DiodeTable {
  Config base;
  std::vector<DiodeRow> rows;
};

// Two runs per scattering length under the identical schedule, holes starting
// at 1 and at 3; F_D = F_1to3 * (1 - F_3to1).  Requires bosonic symmetry.
DiodeTable diode_scan(const SweepAxis& as_grid, const Config& base, int workers = 0);
void write_diode_csv(const DiodeTable& table, std::ostream& os);

struct TransistorRecord {
  RunReport fermionic;
  RunReport bosonic;
  double f_transistor = 0.0;  // F^F_1to3 * (1 - F^B_1to3)
};

// Identical schedule in both symmetry sectors, combined into F_T.
TransistorRecord transistor_eval(const Config& cfg);
void write_transistor_json(const TransistorRecord& rec, const Config& cfg, std::ostream& os);

struct JitterRow {
  double amplitude = 0.0, omega = 0.0;
  double f_fermionic = 0.0, f_bosonic = 0.0, f_transistor = 0.0;
  bool failed = false;
  std::string error;
};

struct JitterTable {
  Config base;
  std::vector<JitterRow> rows;  // amplitude-major order
};

// transistor_eval over the (A_s, omega_s) grid.
JitterTable jitter_robustness(const SweepAxis& amplitude_grid, const SweepAxis& omega_grid,
                              const Config& base, int workers = 0);
void write_jitter_csv(const JitterTable& table, std::ostream& os);

// RunReport as a JSON object (config echo included for provenance).
void write_report_json(const RunReport& report, const Config& cfg, std::ostream& os);

}  // namespace holesim
