#pragma once
// Stochastic event-level session simulator: independent oracle for the
// analytic coincidence and QBER formulas, empirical crosstalk matrices, and
// sifted keys, including the intercept-resend eavesdropper.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "heqkd/pair_source.hpp"
#include "heqkd/quantum_state.hpp"

namespace heqkd {

enum class Eavesdropper { None, HvIntercept };

struct McConfig {
  int d = 4;
  SourceParams src;
  double e_d = 0.0;        // intrinsic error per coincidence, same-basis
  double basis_p = 0.25;   // p for d = 4 (bases 3,4 get q = 1/2 - p); d = 2 uses 1/2
  std::int64_t n_pulses = 1000000;
  std::uint64_t seed = 1;
  Eavesdropper eve = Eavesdropper::None;

  void validate() const {
    if (d != 2 && d != 4) throw std::invalid_argument("McConfig: d must be 2 or 4");
    src.validate();
    if (e_d < 0.0 || e_d > double(d - 1) / d)
      throw std::invalid_argument("McConfig: e_d out of range");
    if (d == 4 && (basis_p <= 0.0 || basis_p >= 0.5))
      throw std::invalid_argument("McConfig: basis_p out of (0,1/2)");
    if (n_pulses < 1) throw std::invalid_argument("McConfig: n_pulses < 1");
  }
};

/// Per-photon misrouting rate f such that two independent uniform-wrong
/// flips produce a same-basis mismatch probability of exactly e_d:
/// 1 - (1-f)^2 - f^2/(d-1) = e_d.
inline double misroute_rate(double e_d, int d) {
  const double a = double(d) / (d - 1);
  const double disc = 1.0 - a * e_d;
  if (disc < 0.0) throw std::invalid_argument("misroute_rate: e_d too large");
  return (1.0 - std::sqrt(disc)) / a;
}

struct McEvent {
  std::uint8_t basis_a, basis_b;  // 1-indexed
  std::uint8_t out_a, out_b;      // 0-indexed outcomes
};

struct McPairStat {
  double qber = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  std::int64_t count = 0;
};

struct McReport {
  int d = 2;
  std::int64_t n_pulses = 0;
  std::int64_t coincidences = 0;
  double coincidence_fraction = 0.0;
  double coincidence_se = 0.0;
  // counts[i-1][j-1](a,b): coincidence counts per basis pair and outcome
  std::vector<Eigen::MatrixXd> count_blocks;  // nb*nb blocks
  std::vector<McEvent> events;
  std::array<std::array<McPairStat, 4>, 4> pair_stats{};

  const Eigen::MatrixXd& counts(int i, int j) const {
    const int nb = d == 2 ? 2 : 4;
    return count_blocks[(i - 1) * nb + (j - 1)];
  }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// One named substream per physical process so adding a process does not
/// perturb the others' streams.
struct McStreams {
  std::mt19937_64 basis, pairs, outcome, detect, background, misroute, multiclick;
  explicit McStreams(std::uint64_t seed)
      : basis(splitmix64(seed ^ 0x1001)),
        pairs(splitmix64(seed ^ 0x1002)),
        outcome(splitmix64(seed ^ 0x1003)),
        detect(splitmix64(seed ^ 0x1004)),
        background(splitmix64(seed ^ 0x1005)),
        misroute(splitmix64(seed ^ 0x1006)),
        multiclick(splitmix64(seed ^ 0x1007)) {}
};

inline int sample_cdf(const std::vector<double>& cdf, double u) {
  int lo = 0, hi = int(cdf.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (u <= cdf[mid])
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

}  // namespace detail

inline double empirical_pair_qber(const Eigen::MatrixXd& counts, int d, int i, int j,
                                  std::int64_t* total_out = nullptr) {
  const double total = counts.sum();
  if (total_out) *total_out = std::int64_t(total);
  if (total <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  if (i == j) {
    double agree = 0.0;
    for (int a = 0; a < d; ++a) agree += counts(a, a);
    return 1.0 - agree / total;
  }
  const PairBitMap map = pair_bit_map(i, j);
  double err = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (map.bit_a[a] != map.bit_b[b]) err += counts(a, b);
  return err / total;
}

inline McReport simulate(const McConfig& cfg) {
  cfg.validate();
  const int d = cfg.d;
  const int nb = d == 2 ? 2 : 4;
  const BasisSet bases = BasisSet::standard(d);
  JointState state = ideal_state(d);
  if (cfg.eve == Eavesdropper::HvIntercept)
    state = dephase_polarization(state, Side::B);
  const CrosstalkMatrix xt = crosstalk(state, bases);

  // Basis-choice CDF.
  std::vector<double> basis_cdf;
  if (d == 2) {
    basis_cdf = {0.5, 1.0};
  } else {
    const double p = cfg.basis_p, q = 0.5 - p;
    basis_cdf = {p, 2 * p, 2 * p + q, 1.0};
  }
  // Pair-number CDF (adaptive truncation, tail folded into the last bin).
  const int nmax = std::max(1, adaptive_nmax(cfg.src.gamma));
  std::vector<double> pn_cdf(nmax + 1);
  double acc = 0.0;
  for (int n = 0; n <= nmax; ++n) {
    acc += pair_pmf(cfg.src, n);
    pn_cdf[n] = acc;
  }
  pn_cdf.back() = 1.0;
  // Joint-outcome CDF per basis pair (each full block sums to 1).
  std::vector<std::vector<double>> block_cdf(nb * nb, std::vector<double>(d * d));
  for (int i = 1; i <= nb; ++i)
    for (int j = 1; j <= nb; ++j) {
      const Eigen::MatrixXd& blk = xt.block(i, j);
      double c = 0.0;
      auto& cdf = block_cdf[(i - 1) * nb + (j - 1)];
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          c += blk(a, b);
          cdf[a * d + b] = c;
        }
      cdf.back() = 1.0;
    }

  const double flip = misroute_rate(cfg.e_d, d);
  detail::McStreams st(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  McReport rep;
  rep.d = d;
  rep.n_pulses = cfg.n_pulses;
  rep.count_blocks.assign(nb * nb, Eigen::MatrixXd::Zero(d, d));

  std::array<bool, 4> click_a{}, click_b{};
  for (std::int64_t pulse = 0; pulse < cfg.n_pulses; ++pulse) {
    const int ba = detail::sample_cdf(basis_cdf, uni(st.basis)) + 1;
    const int bb = detail::sample_cdf(basis_cdf, uni(st.basis)) + 1;
    const int n = detail::sample_cdf(pn_cdf, uni(st.pairs));
    click_a.fill(false);
    click_b.fill(false);
    int na = 0, nbc = 0;
    const auto& cdf = block_cdf[(ba - 1) * nb + (bb - 1)];
    for (int pair = 0; pair < n; ++pair) {
      const int joint = detail::sample_cdf(cdf, uni(st.outcome));
      int a = joint / d, b = joint % d;
      if (uni(st.detect) < cfg.src.eta_a) {
        if (flip > 0.0 && uni(st.misroute) < flip)
          a = (a + 1 + int(uni(st.misroute) * (d - 1))) % d;
        if (!click_a[a]) ++na;
        click_a[a] = true;
      }
      if (uni(st.detect) < cfg.src.eta_b) {
        if (flip > 0.0 && uni(st.misroute) < flip)
          b = (b + 1 + int(uni(st.misroute) * (d - 1))) % d;
        if (!click_b[b]) ++nbc;
        click_b[b] = true;
      }
    }
    if (cfg.src.xi_a > 0.0 && uni(st.background) < cfg.src.xi_a) {
      const int a = int(uni(st.background) * d) % d;
      if (!click_a[a]) ++na;
      click_a[a] = true;
    }
    if (cfg.src.xi_b > 0.0 && uni(st.background) < cfg.src.xi_b) {
      const int b = int(uni(st.background) * d) % d;
      if (!click_b[b]) ++nbc;
      click_b[b] = true;
    }
    if (na == 0 || nbc == 0) continue;
    auto resolve = [&](const std::array<bool, 4>& clicks, int count) {
      int pick = count == 1 ? 0 : int(uni(st.multiclick) * count) % count;
      for (int o = 0; o < d; ++o) {
        if (clicks[o]) {
          if (pick == 0) return o;
          --pick;
        }
      }
      return 0;  // unreachable
    };
    const int a_out = resolve(click_a, na);
    const int b_out = resolve(click_b, nbc);
    rep.count_blocks[(ba - 1) * nb + (bb - 1)](a_out, b_out) += 1.0;
    rep.events.push_back({std::uint8_t(ba), std::uint8_t(bb), std::uint8_t(a_out),
                          std::uint8_t(b_out)});
    ++rep.coincidences;
  }

  rep.coincidence_fraction = double(rep.coincidences) / double(rep.n_pulses);
  rep.coincidence_se = std::sqrt(rep.coincidence_fraction *
                                 (1.0 - rep.coincidence_fraction) /
                                 double(rep.n_pulses));
  for (int i = 1; i <= nb; ++i)
    for (int j = 1; j <= nb; ++j) {
      if (!pair_measured(d, i, j)) continue;
      std::int64_t cnt = 0;
      const double q = empirical_pair_qber(rep.counts(i, j), d, i, j, &cnt);
      McPairStat ps;
      ps.count = cnt;
      ps.qber = q;
      if (cnt > 0) ps.se = std::sqrt(std::max(q * (1.0 - q), 1e-12) / double(cnt));
      rep.pair_stats[i - 1][j - 1] = ps;
    }
  return rep;
}

/// Sifted output: aligned symbol strings ('0'..'3') plus per-set counts.
struct SiftResult {
  std::string alice;
  std::string bob;
  std::array<std::array<std::int64_t, 4>, 4> m{};  // all coincidences by basis pair
};

inline SiftResult sift(const McReport& rep) {
  SiftResult out;
  for (const McEvent& ev : rep.events) {
    out.m[ev.basis_a - 1][ev.basis_b - 1] += 1;
    if (ev.basis_a == ev.basis_b) {
      out.alice.push_back(char('0' + ev.out_a));
      out.bob.push_back(char('0' + ev.out_b));
    } else if (pair_used(rep.d, ev.basis_a, ev.basis_b)) {
      const PairBitMap map = pair_bit_map(ev.basis_a, ev.basis_b);
      out.alice.push_back(char('0' + map.bit_a[ev.out_a]));
      out.bob.push_back(char('0' + map.bit_b[ev.out_b]));
    }
    // other pairs (incl. (3,4)/(4,3)) are discarded
  }
  return out;
}

/// Empirical crosstalk export in the same layout as quantum_state's.
inline CrosstalkMatrix empirical_crosstalk(const McReport& rep) {
  const int nb = rep.d == 2 ? 2 : 4;
  CrosstalkMatrix xt;
  xt.d = rep.d;
  xt.nb = nb;
  xt.blocks.reserve(nb * nb);
  for (const auto& blk : rep.count_blocks) {
    const double tot = blk.sum();
    xt.blocks.push_back(tot > 0.0 ? Eigen::MatrixXd(blk / tot)
                                  : Eigen::MatrixXd::Zero(rep.d, rep.d));
  }
  return xt;
}

}  // namespace heqkd
