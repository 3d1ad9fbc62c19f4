#pragma once
// Finite-key secret-key-length bounds for the 2D and 4D protocols: entropy
// functions, statistical-fluctuation terms, error-correction leakage, and
// sifted-block accounting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

namespace heqkd {

/// Binary entropy with 0 log 0 = 0.
inline double h2(double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("h2: x out of [0,1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

/// h4(x) = h2(x) + x log2 3; maximum meaningful value h4(3/4) = 2.
inline double h4(double x) {
  return h2(x) + x * std::log2(3.0);
}

/// Statistical noise for the 2D bound.
inline double delta_2d(double n, double k, double beta) {
  if (n < 1.0 || k < 1.0) throw std::invalid_argument("delta_2d: n,k must be >= 1");
  if (beta <= 0.0 || beta >= 1.0) throw std::invalid_argument("delta_2d: beta out of (0,1)");
  return std::sqrt((n + k) / (n * k) * (k + 1.0) / k * std::log(1.0 / beta));
}

/// Statistical error for the 4D bound.
inline double nu_4d(double n, double k, double eps) {
  if (n < 1.0 || k < 1.0) throw std::invalid_argument("nu_4d: n,k must be >= 1");
  if (eps <= 0.0 || eps >= 1.0) throw std::invalid_argument("nu_4d: eps out of (0,1)");
  return std::sqrt((n + k) * (k + 1.0) * std::log(2.0 / eps) / (n * k * k));
}

struct SecurityParams {
  double eps_sec = 1e-9;
  double eps_cor = 1e-15;

  void validate() const {
    if (eps_sec <= 0.0 || eps_sec >= 1.0 || eps_cor <= 0.0 || eps_cor >= 1.0)
      throw std::invalid_argument("SecurityParams: eps out of (0,1)");
  }
};

/// Raw-key split for BBM92: m = n + k, n = floor(m*r) for key generation.
struct BlockCounts2D {
  std::int64_t m = 0;
  double r = 0.5;
  std::int64_t n = 0;  // key generation
  std::int64_t k = 0;  // parameter estimation
};

/// Expected sifted counts per (Alice basis, Bob basis) for HEQKD.
struct BlockCounts4D {
  std::array<std::array<std::int64_t, 4>, 4> m{};  // m[i-1][j-1]

  std::int64_t at(int i, int j) const { return m[i - 1][j - 1]; }
  std::int64_t n1() const { return at(1, 1) + at(1, 2) + at(1, 3); }
  std::int64_t n2() const { return at(2, 1) + at(2, 2) + at(2, 4); }
};

struct KeyResult {
  std::int64_t ell = 0;     // extractable key length, >= 0
  double beta = 0.0;        // optimizing beta
  double objective = 0.0;   // un-floored objective at beta
  double leak_ec = 0.0;
  double stat_term = 0.0;   // Delta (2D) or nu(n1,m44) (4D) at optimum
  double stat_term2 = 0.0;  // nu(n2,m33) (4D only)
};

namespace detail {

/// Maximize a smooth objective over beta in (lo, hi), log-scaled: 64-point
/// grid bracket then golden-section refinement. Deterministic.
inline double maximize_log_beta(const std::function<double(double)>& f,
                                double lo, double hi) {
  const int grid = 64;
  const double llo = std::log(lo), lhi = std::log(hi);
  double best_x = llo, best_v = -1e300;
  for (int i = 0; i < grid; ++i) {
    const double x = llo + (lhi - llo) * (i + 0.5) / grid;
    const double v = f(std::exp(x));
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  const double step = (lhi - llo) / grid;
  double a = std::max(llo, best_x - step);
  double b = std::min(lhi, best_x + step);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  while (b - a > 1e-13) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(std::exp(d));
    }
  }
  const double x = 0.5 * (a + b);
  return f(std::exp(x)) > best_v ? std::exp(x) : std::exp(best_x);
}

}  // namespace detail

/// l^2D = max_beta floor[ n(1 - h2(min(1/2, Q + Delta))) - 1.12 n h2(Q)
///                        - log2(8/(beta^4 eps_cor)) ], clamped >= 0.
inline KeyResult key_length_2d(const BlockCounts2D& blocks, double q_obs,
                               const SecurityParams& sec) {
  sec.validate();
  if (q_obs < 0.0 || q_obs > 1.0) throw std::invalid_argument("key_length_2d: q_obs");
  KeyResult res;
  const double n = double(blocks.n), k = double(blocks.k);
  if (blocks.n < 1 || blocks.k < 1) return res;
  const double leak = 1.12 * n * h2(std::min(0.5, q_obs));
  auto objective = [&](double beta) {
    const double q_eff = std::min(0.5, q_obs + delta_2d(n, k, beta));
    return n * (1.0 - h2(q_eff)) - leak -
           std::log2(8.0 / (std::pow(beta, 4) * sec.eps_cor));
  };
  const double hi = sec.eps_sec / 4.0;
  const double lo = 1e-30 * sec.eps_sec;
  const double beta = detail::maximize_log_beta(objective, lo, hi);
  res.beta = beta;
  res.objective = objective(beta);
  res.leak_ec = leak;
  res.stat_term = delta_2d(n, k, beta);
  res.ell = std::max<std::int64_t>(0, std::int64_t(std::floor(res.objective)));
  return res;
}

/// Per-basis-pair QBER inputs to Leak_EC^4D.
struct QberPairs4D {
  double q11 = 0.0, q12 = 0.0, q13 = 0.0;
  double q21 = 0.0, q22 = 0.0, q24 = 0.0;

  static QberPairs4D uniform(double q) { return {q, q, q, q, q, q}; }
};

/// l^4D = max_beta floor[ n_ext + 4 log2 beta - 2 ], clamped >= 0, with
/// n_ext built from the basis-3/basis-4 error estimates and Leak_EC^4D
/// taken verbatim (1.2 factor, min[0.75, .] guard, p^2/pq weights).
inline KeyResult key_length_4d(const BlockCounts4D& blocks, double q_44,
                               double q_33, const QberPairs4D& qp, double p,
                               const SecurityParams& sec) {
  sec.validate();
  if (p <= 0.0 || p >= 0.5) throw std::invalid_argument("key_length_4d: p out of (0,1/2)");
  KeyResult res;
  const double n1 = double(blocks.n1()), n2 = double(blocks.n2());
  const double m44 = double(blocks.at(4, 4)), m33 = double(blocks.at(3, 3));
  if (n1 < 1.0 || n2 < 1.0 || m44 < 1.0 || m33 < 1.0) return res;
  const double q = 0.5 - p;
  const double leak =
      1.2 * n1 * h4(std::min(0.75, p * p * qp.q11 + p * p * qp.q12 + p * q * qp.q13)) +
      1.2 * n2 * h4(std::min(0.75, p * p * qp.q21 + p * p * qp.q22 + p * q * qp.q24));
  auto objective = [&](double beta) {
    const double eps_bar = sec.eps_sec / 6.0 - beta / 3.0;
    const double n_ext =
        n1 * (2.0 - h4(std::min(0.75, q_44 + nu_4d(n1, m44, eps_bar)))) +
        n2 * (2.0 - h4(std::min(0.75, q_33 + nu_4d(n2, m33, eps_bar)))) -
        leak - std::log2(2.0 / sec.eps_cor);
    return n_ext + 4.0 * std::log2(beta) - 2.0;
  };
  const double hi = sec.eps_sec / 4.0;
  const double lo = 1e-30 * sec.eps_sec;
  const double beta = detail::maximize_log_beta(objective, lo, hi);
  res.beta = beta;
  res.objective = objective(beta);
  res.leak_ec = leak;
  const double eps_bar = sec.eps_sec / 6.0 - beta / 3.0;
  res.stat_term = nu_4d(n1, m44, eps_bar);
  res.stat_term2 = nu_4d(n2, m33, eps_bar);
  res.ell = std::max<std::int64_t>(0, std::int64_t(std::floor(res.objective)));
  return res;
}

/// Deterministic (expected-value) block accounting from a coincidence budget.
inline BlockCounts2D blocks_from_session_2d(double n_coinc, double r) {
  if (n_coinc < 0.0) throw std::invalid_argument("blocks_from_session_2d: n_coinc < 0");
  if (r <= 0.0 || r >= 1.0) throw std::invalid_argument("blocks_from_session_2d: r out of (0,1)");
  BlockCounts2D b;
  b.r = r;
  b.m = std::int64_t(std::floor(n_coinc / 2.0));  // same-basis sifting prob 1/2
  b.n = std::int64_t(std::floor(double(b.m) * r));
  b.k = b.m - b.n;
  return b;
}

inline BlockCounts4D blocks_from_session_4d(double n_coinc, double p) {
  if (n_coinc < 0.0) throw std::invalid_argument("blocks_from_session_4d: n_coinc < 0");
  if (p <= 0.0 || p >= 0.5) throw std::invalid_argument("blocks_from_session_4d: p out of (0,1/2)");
  const double q = 0.5 - p;
  const std::array<double, 4> prob{p, p, q, q};
  BlockCounts4D b;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      b.m[i][j] = std::int64_t(std::floor(n_coinc * prob[i] * prob[j]));
  return b;
}

}  // namespace heqkd
