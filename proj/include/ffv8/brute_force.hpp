#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "ffv8/linalg.hpp"
#include "ffv8/quad_graph.hpp"
#include "ffv8/weights.hpp"

namespace ffv8 {

enum class LocalType : int { A = 0, B = 1, C = 2, D = 3 };

/// Exhaustive enumeration oracle for 8V configurations (even subsets of the
/// dual edge set), partition functions, correlators, Ising sums and the
/// Z2 1-form algebra. Everything here is ground truth for the faster paths.
class BruteForce {
 public:
  explicit BruteForce(const Quadrangulation& q) : q_(&q) {
    dual_ = q.dual_edges();
    if (int(dual_.size()) > 63) throw std::invalid_argument("too many dual edges for bitmask oracle");
    // Map: face -> its four incident dual edges in boundary-position order.
    std::map<int, int> primal_to_dual;
    {
      int di = 0;
      for (int e = 0; e < q.n_edges(); ++e)
        if (q.edge_left_face[e] >= 0 && q.edge_right_face[e] >= 0) primal_to_dual[e] = di++;
    }
    face_dual_.assign(q.n_faces(), {});
    for (int f = 0; f < q.n_faces(); ++f)
      for (int i = 0; i < 4; ++i) {
        int e = q.faces[f].edge[i];
        auto it = primal_to_dual.find(e);
        face_dual_[f][i] = (it == primal_to_dual.end()) ? -1 : it->second;
      }
    enumerate();
  }

  int n_dual_edges() const { return int(dual_.size()); }
  const std::vector<std::uint64_t>& configs() const { return configs_; }

  int config_index(std::uint64_t mask) const {
    auto it = index_.find(mask);
    if (it == index_.end()) throw std::invalid_argument("not an 8V configuration");
    return it->second;
  }

  /// Local type of configuration mask at face f. Positions i = 0..3 are the
  /// dual edges crossing boundary edge i of the face cycle (b, w, b', w');
  /// pairs meeting at a white corner are type A, at a black corner type B,
  /// diagonal pairs type D, empty/full type C.
  LocalType face_type(std::uint64_t mask, int f) const {
    int bits = 0;
    for (int i = 0; i < 4; ++i) {
      int d = face_dual_[f][i];
      if (d >= 0 && ((mask >> d) & 1)) bits |= (1 << i);
    }
    switch (bits) {
      case 0b0000:
      case 0b1111:
        return LocalType::C;
      case 0b0011:
      case 0b1100:
        return LocalType::A;
      case 0b0110:
      case 0b1001:
        return LocalType::B;
      case 0b0101:
      case 0b1010:
        return LocalType::D;
      default:
        throw std::invalid_argument("odd number of dual edges at a face");
    }
  }

  double config_weight(const WeightField& x, std::uint64_t mask) const {
    double w = 1;
    for (int f = 0; f < q_->n_faces(); ++f) {
      switch (face_type(mask, f)) {
        case LocalType::A: w *= x[f].A; break;
        case LocalType::B: w *= x[f].B; break;
        case LocalType::C: w *= x[f].C; break;
        case LocalType::D: w *= x[f].D; break;
      }
    }
    return w;
  }

  int d_face_count(std::uint64_t mask) const {
    int n = 0;
    for (int f = 0; f < q_->n_faces(); ++f)
      if (face_type(mask, f) == LocalType::D) ++n;
    return n;
  }

  double partition_fn(const WeightField& x) const {
    double z = 0;
    for (auto m : configs_) z += config_weight(x, m);
    return z;
  }

  std::vector<double> boltzmann(const WeightField& x) const {
    std::vector<double> p(configs_.size());
    double z = 0;
    for (size_t i = 0; i < configs_.size(); ++i) {
      p[i] = config_weight(x, configs_[i]);
      if (p[i] < -1e-14) throw std::invalid_argument("negative weight in probability mode");
      z += p[i];
    }
    if (z <= 0) throw std::invalid_argument("nonpositive partition function in probability mode");
    for (auto& v : p) v /= z;
    return p;
  }

  /// Mixed correlator <sigma(B0) sigma(W0) mu(B1) mu(W1)> = Z(X'_gamma).
  double correlator(const WeightField& x, const PathSets& gamma) const {
    return partition_fn(apply_disorder_ops(x, gamma));
  }

  /// Probability of a single edge subset under the Boltzmann measure:
  /// P(all legs of `edges` occupied).
  double edge_marginal(const WeightField& x, const std::vector<int>& primal_edges) const {
    std::map<int, int> primal_to_dual;
    int di = 0;
    for (int e = 0; e < q_->n_edges(); ++e)
      if (q_->edge_left_face[e] >= 0 && q_->edge_right_face[e] >= 0) primal_to_dual[e] = di++;
    std::uint64_t need = 0;
    for (int e : primal_edges) need |= (std::uint64_t(1) << primal_to_dual.at(e));
    double z = 0, zin = 0;
    for (auto m : configs_) {
      double w = config_weight(x, m);
      z += w;
      if ((m & need) == need) zin += w;
    }
    return zin / z;
  }

  /// Exact law of tau1 XOR tau2 for independent Boltzmann-distributed
  /// configurations.
  std::vector<double> xor_distribution(const WeightField& x1, const WeightField& x2) const {
    auto p1 = boltzmann(x1), p2 = boltzmann(x2);
    std::vector<double> out(configs_.size(), 0.0);
    for (size_t i = 0; i < configs_.size(); ++i)
      for (size_t j = 0; j < configs_.size(); ++j)
        out[config_index(configs_[i] ^ configs_[j])] += p1[i] * p2[j];
    return out;
  }

  const Quadrangulation& graph() const { return *q_; }

 private:
  void enumerate() {
    int ne = n_dual_edges();
    Gf2System sys(ne);
    for (int f = 0; f < q_->n_faces(); ++f) {
      BitVec row(ne);
      bool complete = true;
      for (int i = 0; i < 4; ++i) {
        if (face_dual_[f][i] < 0) complete = false;
        else row.flip(face_dual_[f][i]);
      }
      if (complete) sys.add_row(row, false);
    }
    auto basis = sys.nullspace();
    if (basis.size() > 26) throw std::invalid_argument("cycle space too large to enumerate");
    std::vector<std::uint64_t> bm;
    for (auto& b : basis) {
      std::uint64_t m = 0;
      for (int i = 0; i < ne; ++i)
        if (b.get(i)) m |= (std::uint64_t(1) << i);
      bm.push_back(m);
    }
    configs_.resize(std::size_t(1) << bm.size());
    for (std::size_t s = 0; s < configs_.size(); ++s) {
      std::uint64_t m = 0;
      for (size_t k = 0; k < bm.size(); ++k)
        if ((s >> k) & 1) m ^= bm[k];
      configs_[s] = m;
    }
    for (size_t i = 0; i < configs_.size(); ++i) index_[configs_[i]] = int(i);
  }

  const Quadrangulation* q_;
  std::vector<std::array<int, 2>> dual_;
  std::vector<std::array<int, 4>> face_dual_;
  std::vector<std::uint64_t> configs_;
  std::map<std::uint64_t, int> index_;
};

// ---------------------------------------------------------------------------
// Ising models on the black / white diagonal graphs.
// ---------------------------------------------------------------------------

/// Coupling constants of the spin-vertex correspondence:
///   J_B(f) = (1/2) ln((1+sin alpha)/cos alpha),
///   J_W(f) = (1/2) ln((1+cos beta)/sin beta).
inline double coupling_black(double alpha) { return 0.5 * std::log((1 + std::sin(alpha)) / std::cos(alpha)); }
inline double coupling_white(double beta) { return 0.5 * std::log((1 + std::cos(beta)) / std::sin(beta)); }

/// Ising partition function on the diagonal graph of the given color: spins
/// live on that color class, one coupling per face between its two
/// same-colored corners. Couplings may be complex (disorder insertions).
inline cplx ising_partition(const Quadrangulation& q, const std::vector<cplx>& J, Color side) {
  std::vector<int> verts;
  for (int v = 0; v < q.n_vertices(); ++v)
    if (q.color[v] == side) verts.push_back(v);
  if (verts.size() > 24) throw std::invalid_argument("too many spins to enumerate");
  std::vector<int> pos(q.n_vertices(), -1);
  for (size_t i = 0; i < verts.size(); ++i) pos[verts[i]] = int(i);
  int off = (side == Color::Black) ? 0 : 1;
  cplx z = 0;
  for (std::uint64_t s = 0; s < (std::uint64_t(1) << verts.size()); ++s) {
    cplx e = 0;
    for (int f = 0; f < q.n_faces(); ++f) {
      int u = q.faces[f].cycle[off], v = q.faces[f].cycle[off + 2];
      int su = ((s >> pos[u]) & 1) ? -1 : 1;
      int sv = ((s >> pos[v]) & 1) ? -1 : 1;
      e += J[f] * double(su * sv);
    }
    z += std::exp(e);
  }
  return z;
}

/// Couplings modified by order/disorder lines: add i pi/2 on the order path,
/// then multiply by -1 on the disorder path.
inline std::vector<cplx> modified_couplings(const std::vector<double>& J, const std::vector<int>& order_path,
                                            const std::vector<int>& disorder_path) {
  std::vector<cplx> Jc(J.begin(), J.end());
  for (int f : order_path) Jc[f] += cplx(0, kPi / 2);
  for (int f : disorder_path) Jc[f] = -Jc[f];
  return Jc;
}

/// The 8V weights of the spin-vertex correspondence,
/// X = (e^{J_B - J_W}, e^{-J_B + J_W}, e^{J_B + J_W}, e^{-J_B - J_W}).
inline WeightField spin_vertex_weights(const AngleField& a) {
  WeightField x;
  x.w.resize(a.n_faces());
  for (int f = 0; f < a.n_faces(); ++f) {
    double jb = coupling_black(a.alpha[f]), jw = coupling_white(a.beta[f]);
    x[f] = {std::exp(jb - jw), std::exp(-jb + jw), std::exp(jb + jw), std::exp(-jb - jw)};
  }
  return x;
}

/// BFS path between two same-colored vertices on the diagonal graph of that
/// color; returns the sequence of faces whose diagonals form the path.
inline std::vector<int> diagonal_path(const Quadrangulation& q, int from, int to) {
  if (q.color[from] != q.color[to]) throw std::invalid_argument("endpoints differ in color");
  int off = (q.color[from] == Color::Black) ? 0 : 1;
  std::vector<int> prev_face(q.n_vertices(), -1), prev_vert(q.n_vertices(), -1);
  std::vector<int> queue = {from};
  std::vector<char> seen(q.n_vertices(), 0);
  seen[from] = 1;
  for (size_t h = 0; h < queue.size() && !seen[to]; ++h) {
    int v = queue[h];
    for (int f = 0; f < q.n_faces(); ++f) {
      int a = q.faces[f].cycle[off], b = q.faces[f].cycle[off + 2];
      int nxt = (a == v) ? b : (b == v) ? a : -1;
      if (nxt >= 0 && !seen[nxt]) {
        seen[nxt] = 1;
        prev_face[nxt] = f;
        prev_vert[nxt] = v;
        queue.push_back(nxt);
        if (nxt == to) break;
      }
    }
  }
  if (!seen[to]) throw std::invalid_argument("no diagonal path between endpoints");
  std::vector<int> faces;
  for (int v = to; v != from; v = prev_vert[v]) faces.push_back(prev_face[v]);
  return faces;
}

// ---------------------------------------------------------------------------
// Z2 1-forms: spin configurations, closed forms, Fourier transform.
// Forms live in (Z2 x Z2)^F, stored as two face bitmasks (alpha, beta);
// alpha_f = 1 for local types B and D, beta_f = 1 for types A and D.
// ---------------------------------------------------------------------------

struct OneForm {
  std::uint32_t alpha = 0;  // black-spin mismatch bits per face
  std::uint32_t beta = 0;   // white-spin mismatch bits per face

  bool operator==(const OneForm&) const = default;
};

/// Symplectic pairing <tau | tau'> = sum_f (alpha_f beta'_f + alpha'_f beta_f).
inline int form_pairing(const OneForm& a, const OneForm& b) {
  return (__builtin_popcount(a.alpha & b.beta) + __builtin_popcount(b.alpha & a.beta)) & 1;
}

/// Phi: spin configuration (bitmask over vertices) -> 1-form.
inline OneForm phi_map(const Quadrangulation& q, std::uint64_t spins) {
  OneForm t;
  for (int f = 0; f < q.n_faces(); ++f) {
    const auto& c = q.faces[f].cycle;
    int ab = ((spins >> c[0]) ^ (spins >> c[2])) & 1;
    int bw = ((spins >> c[1]) ^ (spins >> c[3])) & 1;
    if (ab) t.alpha |= (1u << f);
    if (bw) t.beta |= (1u << f);
  }
  return t;
}

/// Psi: 1-form -> vertex chain; at black vertices sum beta over incident
/// faces, at white vertices sum alpha.
inline std::uint64_t psi_map(const Quadrangulation& q, const OneForm& t) {
  std::uint64_t out = 0;
  for (int v = 0; v < q.n_vertices(); ++v) {
    int s = 0;
    for (int f = 0; f < q.n_faces(); ++f) {
      const auto& c = q.faces[f].cycle;
      bool touches = (c[0] == v || c[1] == v || c[2] == v || c[3] == v);
      if (!touches) continue;
      s ^= int(((q.is_black(v) ? t.beta : t.alpha) >> f) & 1);
    }
    if (s) out |= (std::uint64_t(1) << v);
  }
  return out;
}

inline OneForm config_to_form(const BruteForce& bf, std::uint64_t mask) {
  OneForm t;
  const auto& q = bf.graph();
  for (int f = 0; f < q.n_faces(); ++f) {
    LocalType ty = bf.face_type(mask, f);
    if (ty == LocalType::B || ty == LocalType::D) t.alpha |= (1u << f);
    if (ty == LocalType::A || ty == LocalType::D) t.beta |= (1u << f);
  }
  return t;
}

/// Weight of a 1-form: product over faces of the local weight of the type
/// encoded by (alpha_f, beta_f).
inline double form_weight(const WeightField& x, const OneForm& t, int n_faces) {
  double w = 1;
  for (int f = 0; f < n_faces; ++f) {
    int a = (t.alpha >> f) & 1, b = (t.beta >> f) & 1;
    if (a && b) w *= x[f].D;
    else if (a) w *= x[f].B;
    else if (b) w *= x[f].A;
    else w *= x[f].C;
  }
  return w;
}

/// All 4^F forms, indexed by (alpha | beta << F).
inline std::size_t form_table_size(int n_faces) { return std::size_t(1) << (2 * n_faces); }

inline OneForm form_from_index(std::size_t idx, int n_faces) {
  OneForm t;
  t.alpha = std::uint32_t(idx & ((1u << n_faces) - 1));
  t.beta = std::uint32_t(idx >> n_faces);
  return t;
}

inline std::size_t form_to_index(const OneForm& t, int n_faces) {
  return std::size_t(t.alpha) | (std::size_t(t.beta) << n_faces);
}

/// Discrete Fourier transform on (Z2^2)^F with the symplectic pairing:
/// ghat(t) = 2^{-F} sum_{t'} (-1)^{<t|t'>} g(t'). An involution.
inline std::vector<double> fourier(const std::vector<double>& g, int n_faces) {
  if (n_faces > 8) throw std::invalid_argument("form table too large");
  std::size_t n = form_table_size(n_faces);
  if (g.size() != n) throw std::invalid_argument("bad table size");
  std::vector<double> out(n, 0.0);
  double norm = 1.0 / double(std::size_t(1) << n_faces);
  for (std::size_t i = 0; i < n; ++i) {
    OneForm ti = form_from_index(i, n_faces);
    double acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      OneForm tj = form_from_index(j, n_faces);
      acc += (form_pairing(ti, tj) ? -1.0 : 1.0) * g[j];
    }
    out[i] = norm * acc;
  }
  return out;
}

}  // namespace ffv8
