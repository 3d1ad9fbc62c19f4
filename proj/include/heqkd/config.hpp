#pragma once
// Structured run configuration: INI-style sections with strict key checking
// and line-precise errors.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "heqkd/key_optimizer.hpp"
#include "heqkd/mc_oracle.hpp"
#include "heqkd/phase_stab.hpp"
#include "heqkd/sat_link.hpp"

namespace heqkd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  QberMode mode = QberMode::Paper;
  std::uint64_t seed = 1;

  // [system]
  double rep_rate = 400e6;
  double duration = 3600.0;
  double xi = 1e-6;
  double eta_a = 0.3;
  double eta_b_fixed = 0.25;  // matches SystemConfig::future_preset
  SecurityParams sec;
  int n_max = 10;
  double heqkd_e_d = -1.0;  // < 0: use measured-intercept defaults
  double bbm92_e_d = -1.0;

  // [sweep]
  double loss_db_min = 0.0, loss_db_max = 60.0, loss_db_step = 1.0;

  LinkParams link;
  OrbitParams orbit;
  StabConfig stab;

  // [pass]
  double pass_el_min = 20.0, pass_el_max = 90.0, pass_el_step = 10.0;

  // [mc]
  std::int64_t mc_n_pulses = 1000000;
  double mc_mu = 0.01;
  double mc_e_d = 0.02;
  int mc_dimension = 4;
  Eavesdropper mc_eve = Eavesdropper::None;

  // [crosstalk]
  int xt_dimension = 4;
  Eavesdropper xt_eve = Eavesdropper::None;

  SystemConfig system_config(Protocol proto) const {
    SystemConfig c = SystemConfig::future_preset(proto);
    c.rep_rate = rep_rate;
    c.duration = duration;
    c.xi = xi;
    c.eta_a = eta_a;
    c.eta_b_fixed = eta_b_fixed;
    c.sec = sec;
    c.mode = mode;
    c.err.n_max = n_max;
    const double e_d = proto == Protocol::HEQKD ? heqkd_e_d : bbm92_e_d;
    if (e_d >= 0.0) c.err.e_d = e_d;
    for (double l = loss_db_min; l <= loss_db_max + 1e-9; l += loss_db_step)
      c.loss_grid_db.push_back(l);
    return c;
  }
};

namespace detail {

inline Eavesdropper parse_eve(const std::string& v, int line) {
  if (v == "none") return Eavesdropper::None;
  if (v == "hv_intercept") return Eavesdropper::HvIntercept;
  throw ConfigError("line " + std::to_string(line) +
                    ": eavesdropper must be none|hv_intercept, got '" + v + "'");
}

}  // namespace detail

/// Parse a config file. Unknown sections or keys are rejected with the
/// offending line number; physical ranges are validated after parsing.
inline RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string section, raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header");
      section = line.substr(1, line.size() - 2);
      static const std::set<std::string> known = {"run",  "system", "sweep", "link",
                                                 "orbit", "pass",   "stab",  "mc",
                                                 "crosstalk"};
      if (!known.count(section)) fail("unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) fail("empty key or value");
    auto num = [&]() {
      try {
        size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("");
        return v;
      } catch (...) {
        fail("not a number: '" + val + "'");
        return 0.0;
      }
    };
    auto boolean = [&]() {
      if (val == "true") return true;
      if (val == "false") return false;
      fail("expected true|false, got '" + val + "'");
      return false;
    };
    bool handled = true;
    if (section == "run") {
      if (key == "mode") {
        if (val == "paper")
          cfg.mode = QberMode::Paper;
        else if (val == "fock")
          cfg.mode = QberMode::Fock;
        else
          fail("mode must be paper|fock");
      } else if (key == "seed")
        cfg.seed = std::uint64_t(num());
      else
        handled = false;
    } else if (section == "system") {
      if (key == "rep_rate_hz") cfg.rep_rate = num();
      else if (key == "duration_s") cfg.duration = num();
      else if (key == "background_xi") cfg.xi = num();
      else if (key == "alice_transmission") cfg.eta_a = num();
      else if (key == "bob_fixed_transmission") cfg.eta_b_fixed = num();
      else if (key == "eps_sec") cfg.sec.eps_sec = num();
      else if (key == "eps_cor") cfg.sec.eps_cor = num();
      else if (key == "n_max") cfg.n_max = int(num());
      else if (key == "heqkd_e_d") cfg.heqkd_e_d = num();
      else if (key == "bbm92_e_d") cfg.bbm92_e_d = num();
      else handled = false;
    } else if (section == "sweep") {
      if (key == "loss_db_min") cfg.loss_db_min = num();
      else if (key == "loss_db_max") cfg.loss_db_max = num();
      else if (key == "loss_db_step") cfg.loss_db_step = num();
      else handled = false;
    } else if (section == "link") {
      if (key == "transmitter_diameter_m") cfg.link.d_t = num();
      else if (key == "receiver_diameter_m") cfg.link.d_r = num();
      else if (key == "wavelength_m") cfg.link.wavelength = num();
      else if (key == "rx_fixed_loss_db") cfg.link.fixed_loss_rx_db = num();
      else if (key == "analysis_loss_db") cfg.link.fixed_loss_analysis_db = num();
      else if (key == "analysis_loss_in_channel") cfg.link.analysis_loss_in_channel = boolean();
      else handled = false;
    } else if (section == "orbit") {
      if (key == "altitude_m") cfg.orbit.altitude = num();
      else if (key == "min_elevation_deg") cfg.orbit.min_elevation = num();
      else if (key == "max_elevation_deg") cfg.orbit.max_elevation = num();
      else if (key == "time_step_s") cfg.orbit.time_step = num();
      else if (key == "bin_separation_s") cfg.orbit.bin_separation = num();
      else handled = false;
    } else if (section == "pass") {
      if (key == "max_elevation_min_deg") cfg.pass_el_min = num();
      else if (key == "max_elevation_max_deg") cfg.pass_el_max = num();
      else if (key == "max_elevation_step_deg") cfg.pass_el_step = num();
      else handled = false;
    } else if (section == "stab") {
      if (key == "gamma_scale") cfg.stab.gamma_scale = num();
      else if (key == "visibility") cfg.stab.visibility = num();
      else if (key == "kp") cfg.stab.kp = num();
      else if (key == "ki") cfg.stab.ki = num();
      else if (key == "update_rate_hz") cfg.stab.update_rate = num();
      else if (key == "actuator_range_m") cfg.stab.actuator_range = num();
      else if (key == "noise_std") cfg.stab.noise_std = num();
      else if (key == "wavelength_m") cfg.stab.wavelength = num();
      else handled = false;
    } else if (section == "mc") {
      if (key == "n_pulses") cfg.mc_n_pulses = std::int64_t(num());
      else if (key == "mu") cfg.mc_mu = num();
      else if (key == "e_d") cfg.mc_e_d = num();
      else if (key == "dimension") cfg.mc_dimension = int(num());
      else if (key == "eavesdropper") cfg.mc_eve = detail::parse_eve(val, lineno);
      else handled = false;
    } else if (section == "crosstalk") {
      if (key == "dimension") cfg.xt_dimension = int(num());
      else if (key == "eavesdropper") cfg.xt_eve = detail::parse_eve(val, lineno);
      else handled = false;
    } else {
      fail("key outside any section");
    }
    if (!handled) fail("unknown key '" + key + "' in section [" + section + "]");
  }
  // Range validation (throws ConfigError on violation).
  try {
    cfg.sec.validate();
    cfg.link.validate();
    cfg.orbit.validate();
    cfg.stab.validate();
    if (cfg.loss_db_min < 0.0 || cfg.loss_db_step <= 0.0 ||
        cfg.loss_db_max < cfg.loss_db_min)
      throw std::invalid_argument("sweep: invalid loss grid");
    if (cfg.mc_dimension != 2 && cfg.mc_dimension != 4)
      throw std::invalid_argument("mc: dimension must be 2 or 4");
    if (cfg.xt_dimension != 2 && cfg.xt_dimension != 4)
      throw std::invalid_argument("crosstalk: dimension must be 2 or 4");
    if (cfg.mc_n_pulses < 1) throw std::invalid_argument("mc: n_pulses < 1");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config validation: ") + e.what());
  }
  return cfg;
}

inline RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

}  // namespace heqkd
