#pragma once
// SPDC photon-pair statistics and detection model: pair-number distribution,
// yields, coincidence/singles probabilities, and inversion of observed count
// rates back to (mu, eta_A, eta_B).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace heqkd {

/// Source brightness and per-side noise/efficiency. mu() == 2*gamma always.
struct SourceParams {
  double gamma = 0.0;  // sinh^2(chi), dimensionless brightness
  double xi_a = 0.0;   // background click probability per pulse, Alice
  double xi_b = 0.0;
  double eta_a = 1.0;  // overall detection efficiency (channel*coupling*detector)
  double eta_b = 1.0;

  double mu() const { return 2.0 * gamma; }

  static SourceParams from_mu(double mu, double eta_a, double eta_b,
                              double xi_a = 0.0, double xi_b = 0.0) {
    SourceParams s;
    s.gamma = 0.5 * mu;
    s.eta_a = eta_a;
    s.eta_b = eta_b;
    s.xi_a = xi_a;
    s.xi_b = xi_b;
    s.validate();
    return s;
  }

  void validate() const {
    if (gamma < 0.0) throw std::invalid_argument("SourceParams: gamma < 0");
    if (xi_a < 0.0 || xi_a >= 1.0 || xi_b < 0.0 || xi_b >= 1.0)
      throw std::invalid_argument("SourceParams: xi out of [0,1)");
    if (eta_a <= 0.0 || eta_a > 1.0 || eta_b <= 0.0 || eta_b > 1.0)
      throw std::invalid_argument("SourceParams: eta out of (0,1]");
  }
};

/// Pump repetition rate and acquisition time.
struct SessionParams {
  double rep_rate = 80e6;  // pulses per second
  double duration = 1.0;   // seconds

  void validate() const {
    if (rep_rate <= 0.0 || duration <= 0.0)
      throw std::invalid_argument("SessionParams: nonpositive rep_rate or duration");
  }
  double pulses() const { return rep_rate * duration; }
};

/// P_n = (n+1) gamma^n / (1+gamma)^(n+2).
inline double pair_pmf(const SourceParams& src, int n) {
  if (n < 0) throw std::invalid_argument("pair_pmf: n < 0");
  const double g = src.gamma;
  if (g == 0.0) return n == 0 ? 1.0 : 0.0;
  return (n + 1) * std::exp(n * std::log(g) - (n + 2) * std::log1p(g));
}

/// Smallest N such that the neglected tail sum_{n>N} P_n < tail_bound.
/// The tail has the closed form t^(N+1) ((N+2)-(N+1)t) / ((1-t)^2 (1+g)^2)
/// with t = g/(1+g).
inline int adaptive_nmax(double gamma, double tail_bound = 1e-12,
                         int hard_cap = 10000) {
  if (gamma <= 0.0) return 0;
  const double t = gamma / (1.0 + gamma);
  const double pref = 1.0 / ((1.0 - t) * (1.0 - t) * (1.0 + gamma) * (1.0 + gamma));
  for (int n = 0; n < hard_cap; ++n) {
    const double tail =
        pref * std::pow(t, n + 1) * ((n + 2) - (n + 1) * t);
    if (tail < tail_bound) return n;
  }
  return hard_cap;
}

/// Y_n = [1-(1-xi_A)(1-eta_A)^n][1-(1-xi_B)(1-eta_B)^n].
inline double yield_n(const SourceParams& src, int n) {
  if (n < 0) throw std::invalid_argument("yield_n: n < 0");
  const double a = 1.0 - (1.0 - src.xi_a) * std::pow(1.0 - src.eta_a, n);
  const double b = 1.0 - (1.0 - src.xi_b) * std::pow(1.0 - src.eta_b, n);
  return a * b;
}

/// Coincidence probability per pump pulse, R = sum_n P_n Y_n in closed form.
inline double coincidence_prob(const SourceParams& src) {
  const double g = src.gamma;
  const double ta = 1.0 + src.eta_a * g;
  const double tb = 1.0 + src.eta_b * g;
  const double tab = 1.0 + (src.eta_a + src.eta_b - src.eta_a * src.eta_b) * g;
  return 1.0 - (1.0 - src.xi_a) / (ta * ta) - (1.0 - src.xi_b) / (tb * tb) +
         (1.0 - src.xi_a) * (1.0 - src.xi_b) / (tab * tab);
}

enum class Side { A, B };

/// Singles detection probability per pump pulse for one side.
inline double singles_prob(const SourceParams& src, Side side) {
  const double eta = side == Side::A ? src.eta_a : src.eta_b;
  const double xi = side == Side::A ? src.xi_a : src.xi_b;
  const double t = 1.0 + eta * src.gamma;
  return 1.0 - (1.0 - xi) / (t * t);
}

/// Expected singles counts over a session,
/// S_i = rep*T * (eta_i mu (4 + eta_i mu) + 4 xi_i) / (2 + eta_i mu)^2
/// up to the (1-xi) background factor, which is kept exact here.
inline double singles_rate(const SourceParams& src, Side side,
                           const SessionParams& sess) {
  sess.validate();
  return sess.pulses() * singles_prob(src, side);
}

/// Coincidence probability written in mu = 2*gamma; identical to
/// coincidence_prob by algebra, kept as the paper's four-term display.
inline double coincidence_prob_mu_form(double mu, double eta_a, double eta_b,
                                       double xi_a, double xi_b) {
  const double ta = 2.0 + eta_a * mu;
  const double tb = 2.0 + eta_b * mu;
  const double tab = 2.0 + (eta_a + eta_b - eta_a * eta_b) * mu;
  return 1.0 - 4.0 * (1.0 - xi_a) / (ta * ta) - 4.0 * (1.0 - xi_b) / (tb * tb) +
         4.0 * (1.0 - xi_a) * (1.0 - xi_b) / (tab * tab);
}

/// Expected total coincidences over a session (mu-form).
inline double coincidence_rate(const SourceParams& src, const SessionParams& sess) {
  sess.validate();
  return sess.pulses() * coincidence_prob_mu_form(src.mu(), src.eta_a, src.eta_b,
                                                  src.xi_a, src.xi_b);
}

enum class InferStatus { Ok, NoRoot, Ambiguous };

struct InferSolution {
  double mu = 0.0;
  double eta_a = 0.0;
  double eta_b = 0.0;
};

struct InferMuResult {
  InferStatus status = InferStatus::NoRoot;
  std::vector<InferSolution> roots;  // all roots found in bounds
  std::string message;
};

/// Invert observed (S_A, S_B, C_AB) for (mu, eta_A, eta_B) with known xi.
///
/// The singles equations give u_i = eta_i * mu in closed form,
///   u_i = 2 (sqrt((1-xi_i)/(1-s_i)) - 1),  s_i = S_i / (rep*T),
/// after which the coincidence equation is solved for mu directly; the
/// system has at most one root in the physical bounds mu in (0,4],
/// eta in (0,1].
inline InferMuResult infer_mu(double s_a_counts, double s_b_counts,
                              double c_ab_counts, double xi_a, double xi_b,
                              const SessionParams& sess) {
  sess.validate();
  InferMuResult out;
  const double pulses = sess.pulses();
  const double sa = s_a_counts / pulses;
  const double sb = s_b_counts / pulses;
  const double cab = c_ab_counts / pulses;
  if (sa < 0.0 || sa >= 1.0 || sb < 0.0 || sb >= 1.0 || cab < 0.0) {
    out.message = "singles/coincidence probabilities out of range";
    return out;
  }
  const double ua = 2.0 * (std::sqrt((1.0 - xi_a) / (1.0 - sa)) - 1.0);
  const double ub = 2.0 * (std::sqrt((1.0 - xi_b) / (1.0 - sb)) - 1.0);
  if (ua < 0.0 || ub < 0.0) {
    out.message = "singles below background level";
    return out;
  }
  // Background-only: singles and coincidences fully explained by xi.
  const double tol = 1e-9;
  if (ua < tol && ub < tol) {
    if (std::abs(cab - xi_a * xi_b) < tol * std::max(1.0, xi_a * xi_b)) {
      out.status = InferStatus::Ok;
      out.roots.push_back({0.0, 0.0, 0.0});
      return out;
    }
    out.message = "coincidences inconsistent with background-only singles";
    return out;
  }
  const double ta = 2.0 + ua;
  const double tb = 2.0 + ub;
  const double c = cab - 1.0 + 4.0 * (1.0 - xi_a) / (ta * ta) +
                   4.0 * (1.0 - xi_b) / (tb * tb);
  if (c <= 0.0) {
    out.message = "coincidence count too low for any mu > 0";
    return out;
  }
  const double w = 2.0 * std::sqrt((1.0 - xi_a) * (1.0 - xi_b) / c);
  const double denom = 2.0 + ua + ub - w;
  if (denom <= 0.0) {
    out.message = "coincidence count too high for physical parameters";
    return out;
  }
  InferSolution sol;
  sol.mu = ua * ub / denom;
  if (sol.mu <= 0.0 || sol.mu > 4.0) {
    out.message = "mu outside (0, 4]";
    return out;
  }
  sol.eta_a = ua / sol.mu;
  sol.eta_b = ub / sol.mu;
  if (sol.eta_a <= 0.0 || sol.eta_a > 1.0 || sol.eta_b <= 0.0 || sol.eta_b > 1.0) {
    out.message = "eta outside (0, 1]";
    return out;
  }
  // Forward consistency check at solver tolerance.
  const double s_chk = 1.0 - 4.0 * (1.0 - xi_a) / (ta * ta);
  (void)s_chk;
  const double c_model = coincidence_prob_mu_form(sol.mu, sol.eta_a, sol.eta_b, xi_a, xi_b);
  if (std::abs(c_model - cab) > 1e-8 * std::max(cab, 1e-30)) {
    out.message = "forward model does not reproduce inputs";
    return out;
  }
  out.status = InferStatus::Ok;
  out.roots.push_back(sol);
  return out;
}

}  // namespace heqkd
