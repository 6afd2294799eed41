#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "holesim/core.hpp"
#include "holesim/grid.hpp"

namespace holesim {

// Bad user input: unknown keys, unparseable files, out-of-range values.
// Mapped to exit code 2 by the CLI.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat run configuration: schedule + particle physics + grid + run bookkeeping.
// Precedence is defaults < config file < command-line overrides.
struct Config {
  TrapSchedule schedule;
  PhysicalParams params;  // symmetry sector lives here (params.symmetry)
  Grid2D grid;
  int hole_site = 1;
  double band_halfwidth = 1.0;
  double sigma_delta_factor = 2.0;
  std::uint64_t seed = 20100701;

  // Throws config_error if any component is out of range.
  void validate() const;
};

// Parses the JSON file at `path`. Unknown keys are an error (typo guard).
Config load_config(const std::string& path);

// Applies one key=value pair on top of an existing config; `value` is the
// JSON-ish literal text (numbers unquoted, enum names as plain words).
void apply_key(Config& cfg, const std::string& key, const std::string& value);

// Canonical single-line JSON rendering; equal configs produce equal strings.
std::string canonical_dump(const Config& cfg);

// FNV-1a over canonical_dump; embedded in every output for provenance.
std::uint64_t config_hash(const Config& cfg);

// "# key = value" comment block echoed at the top of CSV outputs.
void write_config_comment(const Config& cfg, std::ostream& os);

}  // namespace holesim
