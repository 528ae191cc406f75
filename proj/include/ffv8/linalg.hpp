#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

namespace ffv8 {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using Vec = Eigen::VectorXcd;

/// Pfaffian of a skew-symmetric matrix via Parlett-Reid tridiagonalization
/// with partial pivoting. Works for real and complex scalar types.
/// The input is taken by value; it is destroyed during elimination.
template <typename Scalar>
Scalar pfaffian(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a) {
  const Eigen::Index n = a.rows();
  assert(a.cols() == n);
  if (n % 2 != 0) return Scalar(0);
  if (n == 0) return Scalar(1);

  Scalar pf(1);
  for (Eigen::Index k = 0; k + 1 < n; k += 2) {
    // Pivot: bring the largest entry of column k below the diagonal to (k+1,k).
    Eigen::Index kp = k + 1;
    double best = std::abs(a(k + 1, k));
    for (Eigen::Index i = k + 2; i < n; ++i) {
      if (std::abs(a(i, k)) > best) {
        best = std::abs(a(i, k));
        kp = i;
      }
    }
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    if (a(k + 1, k) == Scalar(0)) return Scalar(0);
    pf *= a(k, k + 1);
    if (k + 2 < n) {
      const Eigen::Index m = n - k - 2;
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau =
          a.row(k).segment(k + 2, m).transpose() / a(k, k + 1);
      Eigen::Matrix<Scalar, Eigen::Dynamic, 1> col =
          a.col(k + 1).segment(k + 2, m);
      a.block(k + 2, k + 2, m, m) += tau * col.transpose();
      a.block(k + 2, k + 2, m, m) -= col * tau.transpose();
    }
  }
  return pf;
}

inline double pfaffian_real(const RMat& a) { return pfaffian<double>(a); }
inline cplx pfaffian_cplx(const Mat& a) { return pfaffian<cplx>(a); }

/// max |entry| of (a*b - I); used as an inverse/identity residual.
inline double identity_residual(const Mat& a, const Mat& b) {
  Mat r = a * b;
  r -= Mat::Identity(a.rows(), a.cols());
  return r.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// GF(2) linear algebra on bit-packed rows. Used for Kasteleyn orientation
// constraints and for enumerating cycle spaces of dual graphs.
// ---------------------------------------------------------------------------

struct BitVec {
  std::vector<std::uint64_t> w;
  int nbits = 0;

  explicit BitVec(int n = 0) : w((n + 63) / 64, 0), nbits(n) {}
  bool get(int i) const { return (w[i >> 6] >> (i & 63)) & 1u; }
  void set(int i, bool v) {
    if (v)
      w[i >> 6] |= (std::uint64_t(1) << (i & 63));
    else
      w[i >> 6] &= ~(std::uint64_t(1) << (i & 63));
  }
  void flip(int i) { w[i >> 6] ^= (std::uint64_t(1) << (i & 63)); }
  BitVec& operator^=(const BitVec& o) {
    for (size_t j = 0; j < w.size(); ++j) w[j] ^= o.w[j];
    return *this;
  }
  bool any() const {
    for (auto x : w)
      if (x) return true;
    return false;
  }
  int lowest_set() const {
    for (size_t j = 0; j < w.size(); ++j)
      if (w[j]) return int(j) * 64 + __builtin_ctzll(w[j]);
    return -1;
  }
};

/// Gaussian elimination over GF(2). Rows are constraint vectors of length
/// nvars with an attached rhs bit. solve() returns any solution, or nullopt
/// if the system is inconsistent. nullspace() returns a basis of solutions
/// of the homogeneous system.
class Gf2System {
 public:
  explicit Gf2System(int nvars) : nvars_(nvars) {}

  void add_row(const BitVec& row, bool rhs) {
    rows_.push_back(row);
    rhs_.push_back(rhs);
  }

  std::optional<std::vector<bool>> solve() const {
    auto rows = rows_;
    auto rhs = rhs_;
    std::vector<int> pivot_col;
    size_t rank = 0;
    for (int c = 0; c < nvars_ && rank < rows.size(); ++c) {
      size_t p = rank;
      while (p < rows.size() && !rows[p].get(c)) ++p;
      if (p == rows.size()) continue;
      std::swap(rows[p], rows[rank]);
      std::swap(rhs[p], rhs[rank]);
      for (size_t i = 0; i < rows.size(); ++i) {
        if (i != rank && rows[i].get(c)) {
          rows[i] ^= rows[rank];
          rhs[i] = rhs[i] != rhs[rank];
        }
      }
      pivot_col.push_back(c);
      ++rank;
    }
    for (size_t i = rank; i < rows.size(); ++i)
      if (rhs[i]) return std::nullopt;
    std::vector<bool> x(nvars_, false);
    for (size_t r = 0; r < rank; ++r) x[pivot_col[r]] = rhs[r];
    return x;
  }

  std::vector<BitVec> nullspace() const {
    auto rows = rows_;
    std::vector<int> pivot_col;
    std::vector<bool> is_pivot(nvars_, false);
    size_t rank = 0;
    for (int c = 0; c < nvars_ && rank < rows.size(); ++c) {
      size_t p = rank;
      while (p < rows.size() && !rows[p].get(c)) ++p;
      if (p == rows.size()) continue;
      std::swap(rows[p], rows[rank]);
      for (size_t i = 0; i < rows.size(); ++i)
        if (i != rank && rows[i].get(c)) rows[i] ^= rows[rank];
      pivot_col.push_back(c);
      is_pivot[c] = true;
      ++rank;
    }
    std::vector<BitVec> basis;
    for (int c = 0; c < nvars_; ++c) {
      if (is_pivot[c]) continue;
      BitVec v(nvars_);
      v.set(c, true);
      for (size_t r = 0; r < rank; ++r)
        if (rows[r].get(c)) v.set(pivot_col[r], true);
      basis.push_back(v);
    }
    return basis;
  }

  int nvars() const { return nvars_; }

 private:
  int nvars_;
  std::vector<BitVec> rows_;
  std::vector<bool> rhs_;
};

}  // namespace ffv8
