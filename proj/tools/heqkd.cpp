// Command-line front end: deterministic CSV/JSON emission for the key-rate
// sweep, orbital-pass simulation, crosstalk matrices, Monte Carlo oracle
// comparison, and phase-stabilization traces.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "heqkd/config.hpp"
#include "heqkd/finite_key.hpp"
#include "heqkd/key_optimizer.hpp"
#include "heqkd/mc_oracle.hpp"
#include "heqkd/phase_stab.hpp"
#include "heqkd/quantum_state.hpp"
#include "heqkd/sat_link.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream os(dir / name);
  if (!os) throw std::runtime_error("cannot open output file: " + (dir / name).string());
  os << std::setprecision(12);
  return os;
}

int run_rate_sweep(const heqkd::RunConfig& cfg, const fs::path& out) {
  using namespace heqkd;
  const SystemConfig heq = cfg.system_config(Protocol::HEQKD);
  const SystemConfig bbm = cfg.system_config(Protocol::BBM92);
  if (heq.loss_grid_db.empty()) throw ConfigError("rate-sweep: empty loss grid");
  const auto pts_h = sweep(heq);
  const auto pts_b = sweep(bbm);

  auto os = open_out(out, "rate_sweep.csv");
  os << "loss_db,protocol,mu_opt,p_or_r_opt,key_bits,key_bits_per_hour\n";
  for (size_t i = 0; i < pts_h.size(); ++i) {
    os << pts_h[i].loss_db << ",heqkd," << pts_h[i].mu_opt << ","
       << pts_h[i].param_opt << "," << pts_h[i].key_length << ","
       << pts_h[i].key_per_hour << "\n";
    os << pts_b[i].loss_db << ",bbm92," << pts_b[i].mu_opt << ","
       << pts_b[i].param_opt << "," << pts_b[i].key_length << ","
       << pts_b[i].key_per_hour << "\n";
  }

  // HEQKD-only window: losses where HEQKD key > 0 and BBM92 key = 0.
  std::optional<double> win_lo, win_hi, heqkd_cut, bbm_cut;
  for (size_t i = 0; i < pts_h.size(); ++i) {
    if (pts_h[i].key_length > 0 && pts_b[i].key_length == 0) {
      if (!win_lo) win_lo = pts_h[i].loss_db;
      win_hi = pts_h[i].loss_db;
    }
    if (pts_h[i].key_length > 0) heqkd_cut = pts_h[i].loss_db;
    if (pts_b[i].key_length > 0) bbm_cut = pts_b[i].loss_db;
  }
  json summary;
  summary["heqkd_last_positive_loss_db"] = heqkd_cut ? json(*heqkd_cut) : json();
  summary["bbm92_last_positive_loss_db"] = bbm_cut ? json(*bbm_cut) : json();
  summary["heqkd_only_window_db"] =
      win_lo ? json({{"lo", *win_lo}, {"hi", *win_hi}, {"width", *win_hi - *win_lo}})
             : json();
  auto js = open_out(out, "rate_sweep_summary.json");
  js << summary.dump(2) << "\n";
  return kExitOk;
}

int run_pass_sim(const heqkd::RunConfig& cfg, const fs::path& out) {
  using namespace heqkd;
  SystemConfig heq = cfg.system_config(Protocol::HEQKD);
  SystemConfig bbm = cfg.system_config(Protocol::BBM92);
  auto os = open_out(out, "pass_sim.csv");
  os << "max_el_deg,heqkd_mu,heqkd_p,heqkd_key,bbm92_mu,bbm92_r,bbm92_key,"
        "ratio,doppler_swing_um\n";
  double min_ratio = 1e300;
  for (double el = cfg.pass_el_min; el <= cfg.pass_el_max + 1e-9;
       el += cfg.pass_el_step) {
    OrbitParams orbit = cfg.orbit;
    orbit.max_elevation = el;
    if (!(orbit.min_elevation < orbit.max_elevation)) {
      // grazing pass: just above the acquisition floor
      orbit.max_elevation = orbit.min_elevation + 0.5;
    }
    const OptimumPoint oh = optimize_pass(orbit, cfg.link, heq);
    const OptimumPoint ob = optimize_pass(orbit, cfg.link, bbm);
    const std::int64_t kh =
        pass_key_length(orbit, cfg.link, heq, oh.mu_opt, oh.param_opt);
    const std::int64_t kb =
        pass_key_length(orbit, cfg.link, bbm, ob.mu_opt, ob.param_opt);
    const PassProfile prof = pass_profile(orbit, cfg.link);
    const double swing =
        (prof.samples.back().doppler - prof.samples.front().doppler) * 1e6;
    const double ratio = kb > 0 ? double(kh) / double(kb)
                                : (kh > 0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (kb > 0) min_ratio = std::min(min_ratio, ratio);
    os << el << "," << oh.mu_opt << "," << oh.param_opt << "," << kh << ","
       << ob.mu_opt << "," << ob.param_opt << "," << kb << "," << ratio << ","
       << swing << "\n";
  }
  json summary;
  summary["min_heqkd_to_bbm92_ratio"] = min_ratio < 1e300 ? json(min_ratio) : json();
  auto js = open_out(out, "pass_sim_summary.json");
  js << summary.dump(2) << "\n";
  return kExitOk;
}

int run_crosstalk(const heqkd::RunConfig& cfg, const fs::path& out) {
  using namespace heqkd;
  const int d = cfg.xt_dimension;
  const BasisSet bases = BasisSet::standard(d);
  JointState st = ideal_state(d);
  if (cfg.xt_eve == Eavesdropper::HvIntercept) st = dephase_polarization(st, Side::B);
  const CrosstalkMatrix xt = crosstalk(st, bases);
  {
    auto os = open_out(out, "crosstalk_d" + std::to_string(d) + ".csv");
    write_crosstalk_csv(os, xt);
  }
  auto os = open_out(out, "crosstalk_qber_d" + std::to_string(d) + ".csv");
  os << "alice_basis,bob_basis,qber\n";
  const int nb = d == 2 ? 2 : 4;
  for (int i = 1; i <= nb; ++i)
    for (int j = 1; j <= nb; ++j)
      if (pair_measured(d, i, j))
        os << i << "," << j << "," << qber_from_crosstalk(xt, i, j) << "\n";
  return kExitOk;
}

int run_oracle(const heqkd::RunConfig& cfg, const fs::path& out) {
  using namespace heqkd;
  auto os = open_out(out, "oracle_comparison.csv");
  os << "check,d,mu,eta_a,eta_b,analytic,empirical,se,z\n";
  double max_abs_z = 0.0;
  auto emit = [&](const std::string& check, int d, double mu, double ea, double eb,
                  double analytic, double empirical, double se) {
    const double z = se > 0.0 ? (empirical - analytic) / se : 0.0;
    max_abs_z = std::max(max_abs_z, std::abs(z));
    os << check << "," << d << "," << mu << "," << ea << "," << eb << ","
       << analytic << "," << empirical << "," << se << "," << z << "\n";
  };

  // Coincidence fraction on a 3x3 (mu, eta) grid.
  std::uint64_t salt = 0;
  for (double mu : {0.002, 0.01, 0.05}) {
    for (double eta_a : {0.05, 0.1, 0.3}) {
      const double eta_b = 0.5 * eta_a;
      McConfig mc;
      mc.d = cfg.mc_dimension;
      mc.src = SourceParams::from_mu(mu, eta_a, eta_b, 1e-5, 1e-5);
      mc.e_d = cfg.mc_e_d;
      mc.n_pulses = cfg.mc_n_pulses;
      mc.seed = cfg.seed + (++salt);
      const McReport rep = simulate(mc);
      emit("coincidence_fraction", mc.d, mu, eta_a, eta_b, coincidence_prob(mc.src),
           rep.coincidence_fraction, rep.coincidence_se);
    }
  }
  // Same-basis QBER vs fock-mode Q_{d,obs}, xi = 0.
  for (int d : {2, 4}) {
    for (double mu : {0.001, 0.01, 0.05}) {
      McConfig mc;
      mc.d = d;
      mc.src = SourceParams::from_mu(mu, 0.3, 0.15, 0.0, 0.0);
      mc.e_d = cfg.mc_e_d;
      mc.n_pulses = cfg.mc_n_pulses;
      mc.seed = cfg.seed + (++salt);
      const McReport rep = simulate(mc);
      ErrorParams err;
      err.d = d;
      err.e_d = cfg.mc_e_d;
      err.e_0 = 1.0 - 1.0 / d;
      const RateBreakdown rb = qber_obs(mc.src, err, QberMode::Fock);
      double wsum = 0.0, werr = 0.0;
      std::int64_t cnt = 0;
      const int nb = d == 2 ? 2 : 4;
      for (int i = 1; i <= nb; ++i) {
        const auto& ps = rep.pair_stats[i - 1][i - 1];
        if (ps.count > 0) {
          werr += ps.qber * double(ps.count);
          wsum += double(ps.count);
          cnt += ps.count;
        }
      }
      const double q_emp = wsum > 0.0 ? werr / wsum : 0.0;
      // standard error under the model hypothesis; robust when q_emp = 0
      const double se =
          cnt > 0 ? std::sqrt(rb.q_obs * (1.0 - rb.q_obs) / double(cnt)) : 0.0;
      emit("same_basis_qber", d, mu, 0.3, 0.15, rb.q_obs, q_emp, se);
    }
  }
  json summary;
  summary["max_abs_z"] = max_abs_z;
  summary["all_within_3se"] = max_abs_z <= 3.0;
  auto js = open_out(out, "oracle_summary.json");
  js << summary.dump(2) << "\n";
  return kExitOk;
}

int run_stabilize(const heqkd::RunConfig& cfg, const fs::path& out) {
  using namespace heqkd;
  const PassProfile prof = pass_profile(cfg.orbit, cfg.link);
  StabConfig closed = cfg.stab;
  closed.seed = unsigned(cfg.seed);
  StabConfig open = closed;
  open.kp = 0.0;
  open.ki = 0.0;
  const StabTrace tc = simulate_tracking(closed, prof);
  const StabTrace to = simulate_tracking(open, prof);
  {
    auto os = open_out(out, "stab_closed.csv");
    write_stab_trace_csv(os, tc);
  }
  {
    auto os = open_out(out, "stab_open.csv");
    write_stab_trace_csv(os, to);
  }
  json summary;
  summary["closed_loop"] = {{"std_qber", tc.qber_std},
                            {"mean_qber", tc.qber_mean},
                            {"saturated", tc.actuator_saturated}};
  summary["open_loop"] = {{"peak_qber", to.qber_peak},
                          {"saturated", to.actuator_saturated}};
  auto js = open_out(out, "stabilize_summary.json");
  js << summary.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-key QKD simulation and link analysis"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> mode_override;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--mode", mode_override, "paper|fock mode override");
  auto* sc_rate = app.add_subcommand("rate-sweep", "optimized key rate vs channel loss");
  auto* sc_pass = app.add_subcommand("pass-sim", "per-pass key vs max elevation");
  auto* sc_xt = app.add_subcommand("crosstalk", "ideal/eavesdropped crosstalk matrices");
  auto* sc_orc = app.add_subcommand("oracle", "Monte Carlo vs analytic comparison");
  auto* sc_stab = app.add_subcommand("stabilize", "phase-stabilization traces");
  // allow the global options to appear after the subcommand name
  for (auto* sc : {sc_rate, sc_pass, sc_xt, sc_orc, sc_stab}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  heqkd::RunConfig cfg;
  try {
    cfg = heqkd::parse_config_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (mode_override) {
      if (*mode_override == "paper")
        cfg.mode = heqkd::QberMode::Paper;
      else if (*mode_override == "fock")
        cfg.mode = heqkd::QberMode::Fock;
      else
        throw heqkd::ConfigError("--mode must be paper|fock");
    }
  } catch (const heqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    const fs::path out(out_dir);
    if (sc_rate->parsed()) return run_rate_sweep(cfg, out);
    if (sc_pass->parsed()) return run_pass_sim(cfg, out);
    if (sc_xt->parsed()) return run_crosstalk(cfg, out);
    if (sc_orc->parsed()) return run_oracle(cfg, out);
    if (sc_stab->parsed()) return run_stabilize(cfg, out);
  } catch (const heqkd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
