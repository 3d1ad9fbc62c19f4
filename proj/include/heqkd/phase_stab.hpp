#pragma once
// Classical PI phase-tracking loop against the Doppler path-length ramp:
// error-signal model, closed-loop simulation, residual phase, and the QBER
// penalty in the phase-sensitive bases.

#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "heqkd/sat_link.hpp"

namespace heqkd {

struct ZeroIntensityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct StabConfig {
  double gamma_scale = 0.6;   // detector balance factor
  double visibility = 0.1;    // stabilization interference visibility
  double kp = 4.0e-7;         // m per unit error signal
  double ki = 6.5e-5;         // m per unit error signal per second
  double update_rate = 100.0; // Hz
  double actuator_range = 25e-6;  // m, one-sided
  double noise_std = 1e-3;    // additive noise on the error signal
  double wavelength = 810e-9; // m, phase reference for the time-bin penalty
  unsigned seed = 1;

  void validate() const {
    if (update_rate <= 0.0) throw std::invalid_argument("StabConfig: update_rate <= 0");
    if (visibility <= 0.0 || visibility > 1.0)
      throw std::invalid_argument("StabConfig: visibility out of (0,1]");
    if (gamma_scale <= 0.0) throw std::invalid_argument("StabConfig: gamma_scale <= 0");
    if (actuator_range <= 0.0) throw std::invalid_argument("StabConfig: actuator_range <= 0");
  }
};

/// E = (I_D1 - gamma I_D2) / (I_D1 + gamma I_D2).
inline double error_signal(double i1, double i2, double gamma_scale) {
  const double denom = i1 + gamma_scale * i2;
  if (denom <= 0.0) throw ZeroIntensityError("error_signal: i1 + gamma*i2 <= 0");
  return (i1 - gamma_scale * i2) / denom;
}

/// Phase sensitivity of a used basis pair to a time-bin phase offset. Basis-1
/// combos and basis 3 (same-time-bin polarization coherence) are insensitive;
/// pairs among bases 2 and 4 ride on the time-bin phase.
inline bool phase_sensitive_pair(int i, int j) {
  auto tb = [](int b) { return b == 2 || b == 4; };
  return tb(i) && tb(j);
}

struct StabSample {
  double t = 0.0;
  double target = 0.0;     // m, Doppler path offset relative to pass start
  double actuator = 0.0;   // m
  double residual_phase = 0.0;  // rad
  double qber_penalty = 0.0;    // (1 - cos(residual)) / 2, phase-sensitive bases
};

struct StabTrace {
  std::vector<StabSample> samples;
  bool actuator_saturated = false;
  double qber_mean = 0.0;  // over phase-sensitive pairs
  double qber_std = 0.0;
  double qber_peak = 0.0;
};

/// Closed-loop simulation at update_rate over the pass. The target is the
/// Doppler path-length shift relative to acquisition start (initial phase
/// calibration is assumed); intensities follow a low-visibility fringe, so
/// near lock E ~ visibility * sin(phase). Velocity-form PI with actuator
/// clamping; saturation is reported and the simulation continues railed.
inline StabTrace simulate_tracking(const StabConfig& cfg, const PassProfile& prof) {
  cfg.validate();
  if (prof.samples.size() < 2)
    throw std::invalid_argument("simulate_tracking: profile needs >= 2 samples");
  const double t0 = prof.samples.front().t;
  const double t1 = prof.samples.back().t;
  const double d0 = prof.samples.front().doppler;
  auto target_at = [&](double t) {
    // linear interpolation on the profile samples
    const auto& s = prof.samples;
    if (t <= s.front().t) return s.front().doppler - d0;
    for (size_t i = 0; i + 1 < s.size(); ++i) {
      if (t <= s[i + 1].t) {
        const double w = (t - s[i].t) / (s[i + 1].t - s[i].t);
        return s[i].doppler + w * (s[i + 1].doppler - s[i].doppler) - d0;
      }
    }
    return s.back().doppler - d0;
  };

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  const double dt = 1.0 / cfg.update_rate;
  const double k_phase = 2.0 * M_PI / cfg.wavelength;
  StabTrace trace;
  double actuator = 0.0, prev_e = 0.0;
  bool first = true;
  double sum = 0.0, sum2 = 0.0;
  for (double t = t0; t <= t1 + 0.5 * dt; t += dt) {
    const double target = target_at(t);
    const double phase = k_phase * (target - actuator);
    // Fringe model with detector balance gamma: I1 = 1 + V sin(phase),
    // gamma*I2 = 1 - V sin(phase); E reduces to V sin(phase) + noise.
    const double i1 = 1.0 + cfg.visibility * std::sin(phase);
    const double i2 = (1.0 - cfg.visibility * std::sin(phase)) / cfg.gamma_scale;
    double e = error_signal(i1, i2, cfg.gamma_scale);
    if (cfg.noise_std > 0.0) e += noise(rng);
    if (first) {
      prev_e = e;
      first = false;
    }
    actuator += cfg.kp * (e - prev_e) + cfg.ki * e * dt;
    prev_e = e;
    if (std::abs(actuator) > cfg.actuator_range) {
      actuator = std::copysign(cfg.actuator_range, actuator);
      trace.actuator_saturated = true;
    }
    StabSample s;
    s.t = t;
    s.target = target;
    s.actuator = actuator;
    s.residual_phase = k_phase * (target - actuator);
    s.qber_penalty = 0.5 * (1.0 - std::cos(s.residual_phase));
    trace.samples.push_back(s);
    sum += s.qber_penalty;
    sum2 += s.qber_penalty * s.qber_penalty;
    trace.qber_peak = std::max(trace.qber_peak, s.qber_penalty);
  }
  const double n = double(trace.samples.size());
  trace.qber_mean = sum / n;
  trace.qber_std = std::sqrt(std::max(0.0, sum2 / n - trace.qber_mean * trace.qber_mean));
  return trace;
}

inline void write_stab_trace_csv(std::ostream& os, const StabTrace& trace) {
  os << "t_s,target_um,actuator_um,residual_mrad,"
        "qber_22,qber_24,qber_42,qber_44,qber_11\n";
  for (const auto& s : trace.samples) {
    os << s.t << "," << s.target * 1e6 << "," << s.actuator * 1e6 << ","
       << s.residual_phase * 1e3;
    for (int k = 0; k < 4; ++k) os << "," << s.qber_penalty;
    os << ",0\n";  // basis-1 pairs take no penalty by construction
  }
}

}  // namespace heqkd
