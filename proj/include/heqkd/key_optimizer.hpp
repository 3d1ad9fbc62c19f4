#pragma once
// Joint optimization of source/protocol parameters (mu and p for HEQKD,
// mu and r for BBM92) against channel loss, plus per-pass key integration.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "heqkd/finite_key.hpp"
#include "heqkd/pair_source.hpp"
#include "heqkd/qber_model.hpp"
#include "heqkd/sat_link.hpp"

namespace heqkd {

enum class Protocol { BBM92, HEQKD };

struct SystemConfig {
  double rep_rate = 400e6;     // pulses/s
  double duration = 3600.0;    // s
  double xi = 1e-6;            // background per pulse, both sides
  double eta_a = 0.3;          // Alice total transmission incl. detection
  // Bob transmission excluding the swept channel loss: the 4-dB
  // analysis/detection loss plus detector efficiency, lumped to 0.25.
  double eta_b_fixed = 0.25;
  std::vector<double> loss_grid_db;  // Bob channel loss sweep
  Protocol protocol = Protocol::HEQKD;
  ErrorParams err;
  SecurityParams sec;
  QberMode mode = QberMode::Paper;

  void validate() const {
    if (rep_rate <= 0.0 || duration <= 0.0)
      throw std::invalid_argument("SystemConfig: nonpositive rep_rate or duration");
    if (eta_a <= 0.0 || eta_a > 1.0 || eta_b_fixed <= 0.0 || eta_b_fixed > 1.0)
      throw std::invalid_argument("SystemConfig: transmission out of (0,1]");
    for (double l : loss_grid_db)
      if (l < 0.0) throw std::invalid_argument("SystemConfig: negative loss");
    err.validate();
    sec.validate();
  }

  /// Future-system preset behind the key-rate figures: 400 MHz, 1e-6
  /// background, Alice total transmission 0.3, 1 hour.
  static SystemConfig future_preset(Protocol proto) {
    SystemConfig c;
    c.protocol = proto;
    c.err = proto == Protocol::HEQKD ? default_heqkd_error_params()
                                     : default_bbm92_error_params();
    return c;
  }
};

struct OptimumPoint {
  double loss_db = 0.0;
  double mu_opt = 0.0;
  double param_opt = 0.0;  // p (HEQKD) or r (BBM92)
  std::int64_t key_length = 0;
  double key_per_hour = 0.0;
};

inline constexpr double kMuLo = 1e-5, kMuHi = 1.0;
inline constexpr double kPLo = 0.01, kPHi = 0.49;
inline constexpr double kRLo = 0.01, kRHi = 0.99;

/// Full pipeline: source statistics -> QBER model -> block accounting ->
/// finite-key bound. Deterministic; degenerate rates yield key 0.
inline std::int64_t key_pipeline(const SystemConfig& cfg, double loss_db,
                                 double mu, double p_or_r) {
  const double eta_b = cfg.eta_b_fixed * std::pow(10.0, -loss_db / 10.0);
  SourceParams src = SourceParams::from_mu(mu, cfg.eta_a, eta_b, cfg.xi, cfg.xi);
  RateBreakdown rb;
  try {
    rb = qber_obs(src, cfg.err, cfg.mode);
  } catch (const DegenerateRateError&) {
    return 0;
  }
  const double n_coinc = cfg.rep_rate * cfg.duration * rb.r_coinc;
  if (cfg.protocol == Protocol::BBM92) {
    const BlockCounts2D blocks = blocks_from_session_2d(n_coinc, p_or_r);
    return key_length_2d(blocks, rb.q_obs, cfg.sec).ell;
  }
  const BlockCounts4D blocks = blocks_from_session_4d(n_coinc, p_or_r);
  return key_length_4d(blocks, rb.q_obs, rb.q_obs, QberPairs4D::uniform(rb.q_obs),
                       p_or_r, cfg.sec)
      .ell;
}

namespace detail {

/// Bounded 2-variable Nelder-Mead on (log mu, param); clamps to bounds.
/// Small and deterministic; good enough given the coarse-grid seeding.
inline void nelder_mead_2d(const std::function<double(double, double)>& f,
                           double& x0, double& x1, double lo0, double hi0,
                           double lo1, double hi1, int iters = 160) {
  auto clamp = [](double v, double lo, double hi) {
    return std::min(hi, std::max(lo, v));
  };
  struct Pt {
    double x[2];
    double v;
  };
  auto eval = [&](double a, double b) {
    return f(clamp(a, lo0, hi0), clamp(b, lo1, hi1));
  };
  std::array<Pt, 3> s;
  const double d0 = 0.05 * (hi0 - lo0), d1 = 0.05 * (hi1 - lo1);
  s[0] = {{x0, x1}, eval(x0, x1)};
  s[1] = {{clamp(x0 + d0, lo0, hi0), x1}, 0.0};
  s[1].v = eval(s[1].x[0], s[1].x[1]);
  s[2] = {{x0, clamp(x1 + d1, lo1, hi1)}, 0.0};
  s[2].v = eval(s[2].x[0], s[2].x[1]);
  for (int it = 0; it < iters; ++it) {
    std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v > b.v; });
    const double cx = 0.5 * (s[0].x[0] + s[1].x[0]);
    const double cy = 0.5 * (s[0].x[1] + s[1].x[1]);
    const double rx = clamp(cx + (cx - s[2].x[0]), lo0, hi0);
    const double ry = clamp(cy + (cy - s[2].x[1]), lo1, hi1);
    const double rv = eval(rx, ry);
    if (rv > s[0].v) {
      const double ex = clamp(cx + 2.0 * (cx - s[2].x[0]), lo0, hi0);
      const double ey = clamp(cy + 2.0 * (cy - s[2].x[1]), lo1, hi1);
      const double ev = eval(ex, ey);
      s[2] = ev > rv ? Pt{{ex, ey}, ev} : Pt{{rx, ry}, rv};
    } else if (rv > s[1].v) {
      s[2] = {{rx, ry}, rv};
    } else {
      const double kx = clamp(cx + 0.5 * (s[2].x[0] - cx), lo0, hi0);
      const double ky = clamp(cy + 0.5 * (s[2].x[1] - cy), lo1, hi1);
      const double kv = eval(kx, ky);
      if (kv > s[2].v) {
        s[2] = {{kx, ky}, kv};
      } else {  // shrink toward best
        for (int i = 1; i < 3; ++i) {
          s[i].x[0] = clamp(s[0].x[0] + 0.5 * (s[i].x[0] - s[0].x[0]), lo0, hi0);
          s[i].x[1] = clamp(s[0].x[1] + 0.5 * (s[i].x[1] - s[0].x[1]), lo1, hi1);
          s[i].v = eval(s[i].x[0], s[i].x[1]);
        }
      }
    }
  }
  std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v > b.v; });
  x0 = clamp(s[0].x[0], lo0, hi0);
  x1 = clamp(s[0].x[1], lo1, hi1);
}

/// Coarse grid + multi-start refinement of a 2-variable objective over
/// (mu, param). Guaranteed at least as good as the best grid point.
inline OptimumPoint maximize_mu_param(
    const std::function<std::int64_t(double, double)>& objective, double loss_db,
    double param_lo, double param_hi) {
  const int ng = 32;
  struct Cand {
    double lmu, param;
    std::int64_t key;
  };
  std::vector<Cand> grid;
  grid.reserve(ng * ng);
  const double llo = std::log(kMuLo), lhi = std::log(kMuHi);
  for (int i = 0; i < ng; ++i) {
    const double lmu = llo + (lhi - llo) * i / (ng - 1.0);
    for (int j = 0; j < ng; ++j) {
      const double param = param_lo + (param_hi - param_lo) * j / (ng - 1.0);
      grid.push_back({lmu, param, objective(std::exp(lmu), param)});
    }
  }
  std::sort(grid.begin(), grid.end(), [](const Cand& a, const Cand& b) {
    if (a.key != b.key) return a.key > b.key;
    if (a.lmu != b.lmu) return a.lmu < b.lmu;
    return a.param < b.param;
  });
  Cand best = grid.front();
  const int n_starts = 8;
  for (int s = 0; s < n_starts && s < int(grid.size()); ++s) {
    double lmu = grid[s].lmu, param = grid[s].param;
    auto f = [&](double lm, double pr) {
      return double(objective(std::exp(lm), pr));
    };
    nelder_mead_2d(f, lmu, param, llo, lhi, param_lo, param_hi);
    const std::int64_t key = objective(std::exp(lmu), param);
    if (key > best.key) best = {lmu, param, key};
  }
  OptimumPoint pt;
  pt.loss_db = loss_db;
  pt.mu_opt = std::exp(best.lmu);
  pt.param_opt = best.param;
  pt.key_length = objective(pt.mu_opt, pt.param_opt);  // bit-for-bit re-evaluation
  return pt;
}

}  // namespace detail

inline OptimumPoint optimize_point(const SystemConfig& cfg, double loss_db) {
  cfg.validate();
  const bool heqkd = cfg.protocol == Protocol::HEQKD;
  auto objective = [&](double mu, double param) {
    return key_pipeline(cfg, loss_db, mu, param);
  };
  OptimumPoint pt = detail::maximize_mu_param(objective, loss_db,
                                              heqkd ? kPLo : kRLo,
                                              heqkd ? kPHi : kRHi);
  pt.key_per_hour = double(pt.key_length) * 3600.0 / cfg.duration;
  return pt;
}

inline std::vector<OptimumPoint> sweep(const SystemConfig& cfg) {
  cfg.validate();
  std::vector<OptimumPoint> out;
  out.reserve(cfg.loss_grid_db.size());
  for (double loss : cfg.loss_grid_db) out.push_back(optimize_point(cfg, loss));
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<OptimumPoint>& pts,
                            Protocol proto) {
  os << "loss_db,mu_opt," << (proto == Protocol::HEQKD ? "p_opt" : "r_opt")
     << ",key_bits,key_bits_per_hour\n";
  for (const auto& p : pts)
    os << p.loss_db << "," << p.mu_opt << "," << p.param_opt << ","
       << p.key_length << "," << p.key_per_hour << "\n";
}

/// Accumulate expected coincidences and error events along a pass profile
/// (loss varying per step), pool them into one block, and apply the
/// finite-key bound once. Pooled QBER is the count-weighted average.
inline std::int64_t pass_key_length_on(const PassProfile& prof,
                                       const SystemConfig& cfg, double mu,
                                       double p_or_r) {
  double coinc = 0.0, errs = 0.0;
  for (size_t i = 0; i + 1 < prof.samples.size(); ++i) {
    const PassSample& s = prof.samples[i];
    const double dt = prof.samples[i + 1].t - s.t;
    if (dt <= 0.0) continue;
    const double eta_b = cfg.eta_b_fixed * std::pow(10.0, -s.loss_db / 10.0);
    SourceParams src = SourceParams::from_mu(mu, cfg.eta_a, eta_b, cfg.xi, cfg.xi);
    RateBreakdown rb;
    try {
      rb = qber_obs(src, cfg.err, cfg.mode);
    } catch (const DegenerateRateError&) {
      continue;
    }
    const double pulses = cfg.rep_rate * dt;
    coinc += pulses * rb.r_coinc;
    errs += pulses * std::min(rb.r_coinc, rb.e_b + rb.e_phi + rb.e_mpe);
  }
  if (coinc <= 0.0) return 0;
  const double q_pooled = errs / coinc;
  if (cfg.protocol == Protocol::BBM92)
    return key_length_2d(blocks_from_session_2d(coinc, p_or_r), q_pooled, cfg.sec).ell;
  return key_length_4d(blocks_from_session_4d(coinc, p_or_r), q_pooled, q_pooled,
                       QberPairs4D::uniform(q_pooled), p_or_r, cfg.sec)
      .ell;
}

inline std::int64_t pass_key_length(const OrbitParams& orbit, const LinkParams& link,
                                    const SystemConfig& cfg, double mu,
                                    double p_or_r) {
  orbit.validate();
  cfg.validate();
  return pass_key_length_on(pass_profile(orbit, link), cfg, mu, p_or_r);
}

/// Optimize (mu, p|r) for a whole pass.
inline OptimumPoint optimize_pass(const OrbitParams& orbit, const LinkParams& link,
                                  const SystemConfig& cfg) {
  orbit.validate();
  cfg.validate();
  const PassProfile prof = pass_profile(orbit, link);
  const bool heqkd = cfg.protocol == Protocol::HEQKD;
  auto objective = [&](double mu, double param) {
    return pass_key_length_on(prof, cfg, mu, param);
  };
  OptimumPoint pt = detail::maximize_mu_param(objective, 0.0,
                                              heqkd ? kPLo : kRLo,
                                              heqkd ? kPHi : kRHi);
  pt.key_per_hour = 0.0;
  return pt;
}

}  // namespace heqkd
