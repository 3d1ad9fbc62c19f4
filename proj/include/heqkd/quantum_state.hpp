#pragma once
// Exact state/measurement linear algebra in dimension 2 and 4: basis
// projectors, crosstalk matrices, the polarization dephasing channel, and
// per-basis-pair QBER extraction including the 1-bit pair mappings.

#include <Eigen/Dense>
#include <array>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "heqkd/pair_source.hpp"  // Side

namespace heqkd {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

struct UnusedPairError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ZeroBlockError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Measurement bases. Encoding for d = 4:
/// |0> = |H t1>, |1> = |V t2>, |2> = |V t1>, |3> = |H t2>.
struct BasisSet {
  int d = 2;
  // bases[b][o] is outcome vector o of basis b (0-indexed storage, bases
  // referred to 1-indexed in the API).
  std::vector<std::vector<CVec>> bases;

  int num_bases() const { return int(bases.size()); }
  const CVec& vec(int basis, int outcome) const { return bases[basis - 1][outcome]; }

  static BasisSet standard(int d) {
    BasisSet bs;
    bs.d = d;
    auto e = [d](int i) {
      CVec v = CVec::Zero(d);
      v(i) = 1.0;
      return v;
    };
    const double s = 1.0 / std::sqrt(2.0);
    if (d == 2) {
      bs.bases.push_back({e(0), e(1)});
      bs.bases.push_back({s * (e(0) + e(1)), s * (e(0) - e(1))});
    } else if (d == 4) {
      bs.bases.push_back({e(0), e(1), e(2), e(3)});
      bs.bases.push_back({s * (e(0) + e(1)), s * (e(0) - e(1)),
                          s * (e(2) + e(3)), s * (e(2) - e(3))});
      bs.bases.push_back({s * (e(0) + e(2)), s * (e(0) - e(2)),
                          s * (e(1) + e(3)), s * (e(1) - e(3))});
      bs.bases.push_back({0.5 * (e(0) + e(1) + e(2) - e(3)),
                          0.5 * (e(0) + e(1) - e(2) + e(3)),
                          0.5 * (e(0) - e(1) + e(2) + e(3)),
                          0.5 * (e(0) - e(1) - e(2) - e(3))});
    } else {
      throw std::invalid_argument("BasisSet: d must be 2 or 4");
    }
    return bs;
  }
};

/// Bipartite density operator on the d^2-dimensional space, index (a*d+b).
struct JointState {
  int d = 2;
  CMat rho;
};

/// Pure maximally correlated state sum_i |ii> / sqrt(d).
inline JointState ideal_state(int d) {
  if (d != 2 && d != 4) throw std::invalid_argument("ideal_state: d must be 2 or 4");
  CVec psi = CVec::Zero(d * d);
  for (int i = 0; i < d; ++i) psi(i * d + i) = 1.0 / std::sqrt(double(d));
  JointState st;
  st.d = d;
  st.rho = psi * psi.adjoint();
  return st;
}

/// Per-(basis i, basis j) matrix of outcome probabilities, each block
/// normalized to sum 1.
struct CrosstalkMatrix {
  int d = 2;
  int nb = 2;
  std::vector<Eigen::MatrixXd> blocks;  // nb*nb blocks, row-major (i,j)

  const Eigen::MatrixXd& block(int i, int j) const {
    return blocks[(i - 1) * nb + (j - 1)];
  }
  Eigen::MatrixXd& block(int i, int j) { return blocks[(i - 1) * nb + (j - 1)]; }
};

inline CrosstalkMatrix crosstalk(const JointState& st, const BasisSet& bs) {
  if (bs.d != st.d) throw std::invalid_argument("crosstalk: dimension mismatch");
  const int d = st.d, nb = bs.num_bases();
  CrosstalkMatrix xt;
  xt.d = d;
  xt.nb = nb;
  xt.blocks.assign(nb * nb, Eigen::MatrixXd::Zero(d, d));
  for (int i = 1; i <= nb; ++i) {
    for (int j = 1; j <= nb; ++j) {
      Eigen::MatrixXd& blk = xt.block(i, j);
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b < d; ++b) {
          CVec ab = CVec::Zero(d * d);
          const CVec& va = bs.vec(i, a);
          const CVec& vb = bs.vec(j, b);
          for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y) ab(x * d + y) = va(x) * vb(y);
          blk(a, b) = std::max(0.0, std::real(Cplx(ab.adjoint() * st.rho * ab)));
        }
      }
      const double tot = blk.sum();
      if (tot <= 0.0) throw ZeroBlockError("crosstalk: block with zero probability");
      blk /= tot;
    }
  }
  return xt;
}

namespace detail {
/// H/V sector membership under the d = 4 encoding; H = {|0>,|3>}, V = {|1>,|2>}.
inline bool is_h_sector(int d, int i) { return d == 4 ? (i == 0 || i == 3) : i == 0; }
}  // namespace detail

/// Zero coherences between the H and V polarization sectors on one side.
/// Equivalent, for error statistics, to an intercept-resend attack in H/V.
inline JointState dephase_polarization(const JointState& st, Side side) {
  const int d = st.d;
  CMat ph = CMat::Zero(d, d), pv = CMat::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    if (detail::is_h_sector(d, i))
      ph(i, i) = 1.0;
    else
      pv(i, i) = 1.0;
  }
  const CMat eye = CMat::Identity(d, d);
  auto lift = [&](const CMat& op) {
    CMat full = CMat::Zero(d * d, d * d);
    // Kronecker product, Alice slot first.
    const CMat& left = side == Side::A ? op : eye;
    const CMat& right = side == Side::A ? eye : op;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        full.block(i * d, j * d, d, d) = left(i, j) * right;
    return full;
  };
  const CMat lh = lift(ph), lv = lift(pv);
  JointState out;
  out.d = d;
  out.rho = lh * st.rho * lh + lv * st.rho * lv;
  return out;
}

/// Basis-pair usage per the protocol table. Same-basis pairs always used;
/// for d = 4 the partially correlated pairs (1,2),(2,1),(1,3),(3,1),(2,4),
/// (4,2) are used as well.
inline bool pair_used(int d, int i, int j) {
  if (i == j) return true;
  if (d == 2) return false;
  auto is = [&](int a, int b) { return i == a && j == b; };
  return is(1, 2) || is(2, 1) || is(1, 3) || is(3, 1) || is(2, 4) || is(4, 2);
}

/// 1-bit groupings for the partially correlated d = 4 pairs. bit_a[o] and
/// bit_b[o] assign outcome o to a pair-block; derived once from the ideal
/// state's correlations and frozen. (3,4)/(4,3) have a grouping too; the
/// protocol just never sifts them.
struct PairBitMap {
  std::array<int, 4> bit_a;
  std::array<int, 4> bit_b;
};

inline PairBitMap pair_bit_map(int i, int j) {
  auto is = [&](int a, int b) { return i == a && j == b; };
  if (is(1, 2)) return {{0, 0, 1, 1}, {0, 0, 1, 1}};
  if (is(2, 1)) return {{0, 0, 1, 1}, {0, 0, 1, 1}};
  if (is(1, 3)) return {{0, 1, 0, 1}, {0, 0, 1, 1}};
  if (is(3, 1)) return {{0, 0, 1, 1}, {0, 1, 0, 1}};
  if (is(2, 4)) return {{0, 1, 1, 0}, {0, 0, 1, 1}};
  if (is(4, 2)) return {{0, 0, 1, 1}, {0, 1, 1, 0}};
  if (is(3, 4)) return {{0, 1, 1, 0}, {0, 1, 0, 1}};
  if (is(4, 3)) return {{0, 1, 0, 1}, {0, 1, 1, 0}};
  throw UnusedPairError("pair_bit_map: not a partially correlated pair");
}

/// Pairs with a defined error rate: everything except the fully unbiased
/// combinations (1,4)/(4,1)/(2,3)/(3,2), whose outcomes share no structure.
inline bool pair_measured(int d, int i, int j) {
  if (i == j) return true;
  if (d == 2) return false;
  auto is = [&](int a, int b) { return (i == a && j == b) || (i == b && j == a); };
  return !(is(1, 4) || is(2, 3));
}

/// QBER for a measured basis pair from a normalized crosstalk block.
/// Same-basis pairs compare full outcomes; the rest compare the 1-bit
/// mapping.
inline double qber_from_crosstalk(const CrosstalkMatrix& xt, int i, int j) {
  if (!pair_measured(xt.d, i, j))
    throw UnusedPairError("qber_from_crosstalk: unbiased basis pair");
  const Eigen::MatrixXd& blk = xt.block(i, j);
  if (i == j) {
    double agree = 0.0;
    for (int a = 0; a < xt.d; ++a) agree += blk(a, a);
    return 1.0 - agree;
  }
  const PairBitMap map = pair_bit_map(i, j);
  double err = 0.0;
  for (int a = 0; a < xt.d; ++a)
    for (int b = 0; b < xt.d; ++b)
      if (map.bit_a[a] != map.bit_b[b]) err += blk(a, b);
  return err;
}

/// Fig. 2-style CSV export: a (nb*d) x (nb*d) grid of per-block normalized
/// probabilities, Alice on rows, Bob on columns.
inline void write_crosstalk_csv(std::ostream& os, const CrosstalkMatrix& xt) {
  os << "alice_basis,alice_outcome";
  for (int j = 1; j <= xt.nb; ++j)
    for (int b = 0; b < xt.d; ++b) os << ",b" << j << "_o" << b;
  os << "\n";
  for (int i = 1; i <= xt.nb; ++i) {
    for (int a = 0; a < xt.d; ++a) {
      os << i << "," << a;
      for (int j = 1; j <= xt.nb; ++j)
        for (int b = 0; b < xt.d; ++b) os << "," << xt.block(i, j)(a, b);
      os << "\n";
    }
  }
}

}  // namespace heqkd
