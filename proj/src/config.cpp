#include "holesim/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <json.hpp>

namespace holesim {

using json = nlohmann::json;

namespace {

std::string shape_name(RampShape s) {
  return s == RampShape::Linear ? "linear" : "sin_squared";
}
std::string mover_name(FirstMover m) {
  return m == FirstMover::RightTrap ? "right" : "left";
}
std::string symmetry_name(Symmetry s) {
  return s == Symmetry::Fermionic ? "fermionic" : "bosonic";
}

RampShape parse_shape(const std::string& v) {
  if (v == "linear") return RampShape::Linear;
  if (v == "sin_squared") return RampShape::SinSquared;
  throw config_error("ramp_shape must be \"linear\" or \"sin_squared\", got \"" + v + "\"");
}
FirstMover parse_mover(const std::string& v) {
  if (v == "right") return FirstMover::RightTrap;
  if (v == "left") return FirstMover::LeftTrap;
  throw config_error("first_mover must be \"right\" or \"left\", got \"" + v + "\"");
}
Symmetry parse_symmetry(const std::string& v) {
  if (v == "fermionic") return Symmetry::Fermionic;
  if (v == "bosonic") return Symmetry::Bosonic;
  throw config_error("symmetry must be \"fermionic\" or \"bosonic\", got \"" + v + "\"");
}

double jitter_amplitude_of(const Config& c) {
  return c.schedule.jitter ? c.schedule.jitter->amplitude : 0.0;
}
double jitter_omega_of(const Config& c) {
  return c.schedule.jitter ? c.schedule.jitter->omega : 0.0;
}
void set_jitter(Config& c, double amplitude, double omega) {
  if (amplitude == 0.0) {
    c.schedule.jitter.reset();
  } else {
    c.schedule.jitter = JitterSpec{amplitude, omega};
  }
}

// Single source of truth for the key set: appliers keyed by name.
using Applier = std::function<void(Config&, const json&)>;

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw config_error("key \"" + key + "\" expects a number");
  return v.get<double>();
}
std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw config_error("key \"" + key + "\" expects a string");
  return v.get<std::string>();
}

const std::map<std::string, Applier>& appliers() {
  static const std::map<std::string, Applier> table = {
      {"d_max", [](Config& c, const json& v) { c.schedule.d_max = as_number(v, "d_max"); }},
      {"d_min", [](Config& c, const json& v) { c.schedule.d_min = as_number(v, "d_min"); }},
      {"t_delay", [](Config& c, const json& v) { c.schedule.t_delay = as_number(v, "t_delay"); }},
      {"t_ramp", [](Config& c, const json& v) { c.schedule.t_ramp = as_number(v, "t_ramp"); }},
      {"t_hold", [](Config& c, const json& v) { c.schedule.t_hold = as_number(v, "t_hold"); }},
      {"t_pre", [](Config& c, const json& v) { c.schedule.t_pre = as_number(v, "t_pre"); }},
      {"t_post", [](Config& c, const json& v) { c.schedule.t_post = as_number(v, "t_post"); }},
      {"ramp_shape",
       [](Config& c, const json& v) { c.schedule.ramp_shape = parse_shape(as_string(v, "ramp_shape")); }},
      {"first_mover",
       [](Config& c, const json& v) { c.schedule.first_mover = parse_mover(as_string(v, "first_mover")); }},
      {"jitter_amplitude",
       [](Config& c, const json& v) {
         set_jitter(c, as_number(v, "jitter_amplitude"), jitter_omega_of(c));
       }},
      {"jitter_omega",
       [](Config& c, const json& v) {
         double w = as_number(v, "jitter_omega");
         if (c.schedule.jitter) c.schedule.jitter->omega = w;
         else if (w != 0.0) c.schedule.jitter = JitterSpec{0.0, w};
       }},
      {"omega_ratio",
       [](Config& c, const json& v) { c.params.omega_ratio = as_number(v, "omega_ratio"); }},
      {"alpha_as",
       [](Config& c, const json& v) { c.params.scaled_scattering_length = as_number(v, "alpha_as"); }},
      {"symmetry",
       [](Config& c, const json& v) { c.params.symmetry = parse_symmetry(as_string(v, "symmetry")); }},
      {"hole_site",
       [](Config& c, const json& v) { c.hole_site = static_cast<int>(as_number(v, "hole_site")); }},
      {"x_min", [](Config& c, const json& v) { c.grid.x_min = as_number(v, "x_min"); }},
      {"x_max", [](Config& c, const json& v) { c.grid.x_max = as_number(v, "x_max"); }},
      {"points_per_axis",
       [](Config& c, const json& v) {
         c.grid.points_per_axis = static_cast<int>(as_number(v, "points_per_axis"));
       }},
      {"dt", [](Config& c, const json& v) { c.grid.dt = as_number(v, "dt"); }},
      {"frame_stride",
       [](Config& c, const json& v) {
         c.grid.frame_stride = static_cast<int>(as_number(v, "frame_stride"));
       }},
      {"band_halfwidth",
       [](Config& c, const json& v) { c.band_halfwidth = as_number(v, "band_halfwidth"); }},
      {"sigma_delta_factor",
       [](Config& c, const json& v) { c.sigma_delta_factor = as_number(v, "sigma_delta_factor"); }},
      {"seed",
       [](Config& c, const json& v) {
         if (!v.is_number_unsigned() && !v.is_number_integer())
           throw config_error("key \"seed\" expects an integer");
         c.seed = v.get<std::uint64_t>();
       }},
  };
  return table;
}

json to_json(const Config& c) {
  // std::map iteration gives stable alphabetical order for the canonical dump.
  json j;
  j["alpha_as"] = c.params.scaled_scattering_length;
  j["band_halfwidth"] = c.band_halfwidth;
  j["d_max"] = c.schedule.d_max;
  j["d_min"] = c.schedule.d_min;
  j["dt"] = c.grid.dt;
  j["first_mover"] = mover_name(c.schedule.first_mover);
  j["frame_stride"] = c.grid.frame_stride;
  j["hole_site"] = c.hole_site;
  j["jitter_amplitude"] = jitter_amplitude_of(c);
  j["jitter_omega"] = jitter_omega_of(c);
  j["omega_ratio"] = c.params.omega_ratio;
  j["points_per_axis"] = c.grid.points_per_axis;
  j["ramp_shape"] = shape_name(c.schedule.ramp_shape);
  j["seed"] = c.seed;
  j["sigma_delta_factor"] = c.sigma_delta_factor;
  j["symmetry"] = symmetry_name(c.params.symmetry);
  j["t_delay"] = c.schedule.t_delay;
  j["t_hold"] = c.schedule.t_hold;
  j["t_post"] = c.schedule.t_post;
  j["t_pre"] = c.schedule.t_pre;
  j["t_ramp"] = c.schedule.t_ramp;
  j["x_max"] = c.grid.x_max;
  j["x_min"] = c.grid.x_min;
  return j;
}

}  // namespace

void Config::validate() const {
  try {
    schedule.validate();
    grid.validate();
    grid.validate_for(schedule);
  } catch (const std::exception& e) {
    throw config_error(e.what());
  }
  if (hole_site < 1 || hole_site > 3)
    throw config_error("hole_site must be 1, 2, or 3, got " + std::to_string(hole_site));
  if (params.omega_ratio <= 0) throw config_error("omega_ratio must be positive");
  if (band_halfwidth <= 0) throw config_error("band_halfwidth must be positive");
  if (sigma_delta_factor <= 0) throw config_error("sigma_delta_factor must be positive");
  if (schedule.jitter && schedule.jitter->omega <= 0)
    throw config_error("jitter_omega must be positive when jitter_amplitude is nonzero");
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw config_error("config file " + path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw config_error("config file " + path + " must hold a JSON object");
  Config cfg;
  const auto& table = appliers();
  for (const auto& [key, value] : j.items()) {
    auto it = table.find(key);
    if (it == table.end()) throw config_error("unknown config key \"" + key + "\" in " + path);
    it->second(cfg, value);
  }
  return cfg;
}

void apply_key(Config& cfg, const std::string& key, const std::string& value) {
  const auto& table = appliers();
  auto it = table.find(key);
  if (it == table.end()) throw config_error("unknown config key \"" + key + "\"");
  json v = json::parse(value, nullptr, false);
  if (v.is_discarded()) v = value;  // bare word: treat as string
  it->second(cfg, v);
}

std::string canonical_dump(const Config& cfg) { return to_json(cfg).dump(); }

std::uint64_t config_hash(const Config& cfg) {
  const std::string s = canonical_dump(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void write_config_comment(const Config& cfg, std::ostream& os) {
  const json j = to_json(cfg);
  for (const auto& [key, value] : j.items()) os << "# " << key << " = " << value.dump() << "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  os << "# config_hash = " << buf << "\n";
}

}  // namespace holesim
