#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ffv8/linalg.hpp"
#include "ffv8/quad_graph.hpp"
#include "ffv8/weights.hpp"

namespace ffv8 {

/// The decorated dimer graph G^T: one K4 per face of Q joined by legs across
/// the primal edges. Decoration vertex i of face f (id 4f+i) sits next to
/// boundary edge i of the face cycle; it is black when the face lies on the
/// left of that edge oriented black->white. Built once, immutable.
struct DecoratedGraph {
  enum class EdgeKind : int { Leg, SideA, SideB, Diagonal };

  struct Edge {
    int u = -1, v = -1;  // decoration vertex ids
    EdgeKind kind = EdgeKind::Leg;
    int face = -1;         // owning face for decoration edges
    int primal_edge = -1;  // crossed edge of Q for legs
    int wrap_x = 0, wrap_y = 0;  // winding across the fundamental domain (torus)
  };

  Quadrangulation q;  // own a copy: decorated graphs outlive their builders
  std::vector<Color> color;        // per decoration vertex
  std::vector<int> nearest_edge;   // primal edge whose leg touches the vertex
  std::vector<int> leg_partner;    // opposite end of that leg; -1 on patch boundary
  std::vector<double> leg_phi;     // phi of the nearest edge
  std::vector<Edge> edges;
  std::vector<std::vector<int>> vertex_edges;  // incident edge ids per vertex

  // Oriented faces of G^T with black (resp. white) diagonals removed, as
  // coherent boundary cycles of decoration vertices; used for Kasteleyn
  // parity constraints. On the sphere the last face of each list is exempt.
  std::vector<std::vector<int>> faces_no_black_diag;
  std::vector<std::vector<int>> faces_no_white_diag;

  // Admissible orientation: direction bit per edge; false = u->v.
  std::vector<bool> orient;

  int n_vertices() const { return 4 * q.n_faces(); }
  int decor(int face, int corner) const { return 4 * face + corner; }
  bool is_black(int x) const { return color[x] == Color::Black; }
};

namespace detail {

/// Make the face boundary cycles coherent: every edge traversed once in each
/// direction across the collection. Returns false if impossible.
inline bool orient_faces_coherently(std::vector<std::vector<int>>& faces,
                                    const std::map<std::pair<int, int>, int>& edge_of_pair) {
  std::map<int, std::vector<std::pair<int, bool>>> uses;  // edge -> (face, direction)
  for (size_t fi = 0; fi < faces.size(); ++fi) {
    auto& c = faces[fi];
    for (size_t i = 0; i < c.size(); ++i) {
      int a = c[i], b = c[(i + 1) % c.size()];
      auto it = edge_of_pair.find({std::min(a, b), std::max(a, b)});
      if (it == edge_of_pair.end()) return false;
      uses[it->second].push_back({int(fi), a < b});
    }
  }
  for (auto& [e, us] : uses)
    if (us.size() != 2) return false;
  // BFS, flipping faces so the two usages of every edge disagree.
  std::vector<int> state(faces.size(), 0);  // 0 unvisited, 1 keep, 2 flipped
  for (size_t start = 0; start < faces.size(); ++start) {
    if (state[start]) continue;
    state[start] = 1;
    std::vector<int> stack = {int(start)};
    while (!stack.empty()) {
      int f = stack.back();
      stack.pop_back();
      auto& c = faces[f];
      for (size_t i = 0; i < c.size(); ++i) {
        int a = c[i], b = c[(i + 1) % c.size()];
        int e = edge_of_pair.at({std::min(a, b), std::max(a, b)});
        for (auto& [g, fwd] : uses[e]) {
          if (g == f) continue;
          // Face f currently uses edge e in direction (a->b). Face g must use
          // it in the opposite direction after flips.
          bool f_fwd = (state[f] == 1) ? (a < b) : (a > b);
          bool g_fwd_raw = fwd;
          int need = (g_fwd_raw == f_fwd) ? 2 : 1;  // flip g iff same direction
          if (state[g] == 0) {
            state[g] = need;
            stack.push_back(g);
          } else if (state[g] != need) {
            return false;
          }
        }
      }
    }
  }
  for (size_t fi = 0; fi < faces.size(); ++fi)
    if (state[fi] == 2) std::reverse(faces[fi].begin(), faces[fi].end());
  return true;
}

}  // namespace detail

enum class KFlavor { SkewSymmetric, SkewHermitian };

inline Mat assemble_K(const DecoratedGraph& gt, const WeightField& x, KFlavor flavor,
                      cplx z = cplx(1, 0), cplx w = cplx(1, 0));
inline Vec gauge_conjugation(const DecoratedGraph& gt, const Mat& Ktilde, const Mat& K);

/// Build the decorated graph with its leg angles and the face structures of
/// G^T_B and G^T_W, then construct an admissible orientation (both
/// restrictions Kasteleyn) by solving the parity constraints over GF(2).
/// On the torus the orientation is further aligned, by flipping the edges
/// crossing the fundamental-domain cuts, to the homology sector in which the
/// skew-hermitian flavor is a diagonal conjugate of the skew-symmetric one;
/// the parity of every face is unchanged by such flips.
inline DecoratedGraph build_decorated_graph(const Quadrangulation& qin, const CornerAngles& ca) {
  DecoratedGraph gt;
  gt.q = qin;
  const Quadrangulation& q = gt.q;
  int nF = q.n_faces();
  gt.color.resize(4 * nF);
  gt.nearest_edge.assign(4 * nF, -1);
  gt.leg_partner.assign(4 * nF, -1);
  gt.leg_phi.assign(4 * nF, 0.0);

  for (int f = 0; f < nF; ++f) {
    const auto& fc = q.faces[f];
    for (int i = 0; i < 4; ++i) {
      int x = gt.decor(f, i);
      int u = fc.cycle[i];
      // The face is left of boundary edge i (oriented black->white) iff
      // cycle[i] is black, and the adjacent decoration vertex is then black.
      gt.color[x] = q.color[u];
      gt.nearest_edge[x] = fc.edge[i];
      if (fc.edge[i] >= 0) gt.leg_phi[x] = ca.phi[fc.edge[i]];
    }
  }

  auto add_edge = [&](int u, int v, DecoratedGraph::EdgeKind kind, int face, int pe) {
    DecoratedGraph::Edge e;
    e.u = u;
    e.v = v;
    e.kind = kind;
    e.face = face;
    e.primal_edge = pe;
    gt.edges.push_back(e);
  };

  for (int f = 0; f < nF; ++f) {
    // Sides: (d_i, d_{i+1}) meet at primal corner cycle[(i+1)%4]; the side is
    // type A at white corners and type B at black corners.
    for (int i = 0; i < 4; ++i) {
      int shared = q.faces[f].cycle[(i + 1) % 4];
      add_edge(gt.decor(f, i), gt.decor(f, (i + 1) % 4),
               q.is_black(shared) ? DecoratedGraph::EdgeKind::SideB : DecoratedGraph::EdgeKind::SideA,
               f, -1);
    }
    add_edge(gt.decor(f, 0), gt.decor(f, 2), DecoratedGraph::EdgeKind::Diagonal, f, -1);  // black
    add_edge(gt.decor(f, 1), gt.decor(f, 3), DecoratedGraph::EdgeKind::Diagonal, f, -1);  // white
  }

  // Legs, with winding bookkeeping across the fundamental domain. Each edge
  // carries wrap = round((rho(u) + delta - rho(v)) / period), where rho is
  // the canonical reduced position of the vertex and delta the geometric
  // displacement; this makes wraps an exact cocycle (cycle sums = windings).
  auto corner_of_edge = [&](int face, int e) {
    for (int i = 0; i < 4; ++i)
      if (q.faces[face].edge[i] == e) return i;
    throw std::logic_error("edge not on face");
  };
  auto decor_pos = [&](int face, int i) -> Vector2d {
    const auto& fc = q.faces[face];
    Vector2d c = (fc.lift[0] + fc.lift[1] + fc.lift[2] + fc.lift[3]) / 4.0;
    Vector2d mid = (fc.lift[i] + fc.lift[(i + 1) % 4]) / 2.0;
    return c + 0.55 * (mid - c);
  };
  const bool toric = (q.surface == Surface::Torus);
  auto reduce = [&](Vector2d p) {
    if (!toric) return p;
    return Vector2d(p.x() - q.period_x * std::floor(p.x() / q.period_x),
                    p.y() - q.period_y * std::floor(p.y() / q.period_y));
  };
  std::vector<Vector2d> rho(4 * nF);
  for (int f = 0; f < nF; ++f)
    for (int i = 0; i < 4; ++i) rho[gt.decor(f, i)] = reduce(decor_pos(f, i));
  auto set_wrap = [&](DecoratedGraph::Edge& e, Vector2d pu, Vector2d delta) {
    if (!toric) return;
    Vector2d r = reduce(pu) + delta - rho[e.v];
    e.wrap_x = int(std::lround(r.x() / q.period_x));
    e.wrap_y = int(std::lround(r.y() / q.period_y));
  };
  // Decoration edges live inside one chart.
  for (auto& e : gt.edges) {
    int f = e.face;
    set_wrap(e, decor_pos(f, e.u - 4 * f), decor_pos(f, e.v - 4 * f) - decor_pos(f, e.u - 4 * f));
  }
  for (int e = 0; e < q.n_edges(); ++e) {
    int fl = q.edge_left_face[e], fr = q.edge_right_face[e];
    if (fl < 0 || fr < 0) continue;
    int il = corner_of_edge(fl, e), ir = corner_of_edge(fr, e);
    int xb = gt.decor(fl, il), xw = gt.decor(fr, ir);
    gt.leg_partner[xb] = xw;
    gt.leg_partner[xw] = xb;
    DecoratedGraph::Edge leg;
    leg.u = xw;  // white endpoint first
    leg.v = xb;
    leg.kind = DecoratedGraph::EdgeKind::Leg;
    leg.primal_edge = e;
    Vector2d pu = decor_pos(fr, ir);
    Vector2d pv = decor_pos(fl, il) + q.chart_shift(fr, fl, e);
    set_wrap(leg, pu, pv - pu);
    gt.edges.push_back(leg);
  }

  gt.vertex_edges.assign(gt.n_vertices(), {});
  for (size_t ei = 0; ei < gt.edges.size(); ++ei) {
    gt.vertex_edges[gt.edges[ei].u].push_back(int(ei));
    gt.vertex_edges[gt.edges[ei].v].push_back(int(ei));
  }

  // ---- Faces of G^T_B and G^T_W ------------------------------------------
  // Two triangles per decoration (cut by the remaining diagonal) plus one
  // face around every primal vertex, alternating sides and legs.
  auto vertex_face = [&](int v) {
    std::vector<int> cyc;
    // walk the star of v: (face, edge at v) -> cross leg -> next face
    int f0 = -1, e0 = -1;
    for (int f = 0; f < nF && f0 < 0; ++f)
      for (int i = 0; i < 4; ++i)
        if (q.faces[f].cycle[i] == v) {
          f0 = f;
          e0 = q.faces[f].edge[i];  // boundary edge from v to cycle[i+1]
        }
    int f = f0, e = e0;
    do {
      // corner index j with cycle[j] == v
      int j = -1;
      for (int i = 0; i < 4; ++i)
        if (q.faces[f].cycle[i] == v) j = i;
      int e_next = q.faces[f].edge[j];            // edge (v, cycle[j+1])
      int e_prev = q.faces[f].edge[(j + 3) % 4];  // edge (cycle[j-1], v)
      int ein = e, eout = (e == e_next) ? e_prev : e_next;
      cyc.push_back(gt.decor(f, corner_of_edge(f, ein)));
      cyc.push_back(gt.decor(f, corner_of_edge(f, eout)));
      // cross the leg over eout
      int fl = q.edge_left_face[eout], fr = q.edge_right_face[eout];
      int g = (fl == f) ? fr : fl;
      if (g < 0) return std::vector<int>{};  // open star on a patch boundary
      f = g;
      e = eout;
    } while (!(f == f0 && e == e0));
    return cyc;
  };

  std::map<std::pair<int, int>, int> edge_of_pair;
  for (size_t ei = 0; ei < gt.edges.size(); ++ei) {
    auto key = std::minmax(gt.edges[ei].u, gt.edges[ei].v);
    edge_of_pair[{key.first, key.second}] = int(ei);
  }
  // Note: on small tori a decoration-vertex pair could in principle repeat;
  // decoration edges are unique per face, and legs join distinct face pairs
  // or distinct corners, so pairs stay unique for the graphs handled here.
  if (edge_of_pair.size() != gt.edges.size())
    throw std::runtime_error("decorated graph has coincident vertex pairs");

  std::vector<std::vector<int>> common;  // vertex faces
  for (int v = 0; v < q.n_vertices(); ++v) {
    auto c = vertex_face(v);
    if (!c.empty()) common.push_back(c);
  }
  gt.faces_no_black_diag = common;
  gt.faces_no_white_diag = common;
  for (int f = 0; f < nF; ++f) {
    int d0 = gt.decor(f, 0), d1 = gt.decor(f, 1), d2 = gt.decor(f, 2), d3 = gt.decor(f, 3);
    // white diagonal (d1,d3) kept when black diagonals removed
    gt.faces_no_black_diag.push_back({d1, d2, d3});
    gt.faces_no_black_diag.push_back({d3, d0, d1});
    gt.faces_no_white_diag.push_back({d0, d1, d2});
    gt.faces_no_white_diag.push_back({d2, d3, d0});
  }
  if (!detail::orient_faces_coherently(gt.faces_no_black_diag, edge_of_pair))
    throw std::runtime_error("G^T_B face structure not coherently orientable");
  if (!detail::orient_faces_coherently(gt.faces_no_white_diag, edge_of_pair))
    throw std::runtime_error("G^T_W face structure not coherently orientable");

  // ---- Admissible orientation over GF(2) ----------------------------------
  // Variable per edge: 0 = oriented u->v. For each constrained face, the
  // number of boundary steps traversed against the edge orientation is odd.
  Gf2System sys(int(gt.edges.size()));
  auto add_face_constraints = [&](const std::vector<std::vector<int>>& faces) {
    size_t limit = faces.size();
    if (q.surface == Surface::Sphere) --limit;  // one exempt face
    for (size_t fi = 0; fi < limit; ++fi) {
      const auto& c = faces[fi];
      BitVec row(int(gt.edges.size()));
      bool rhs = true;
      for (size_t i = 0; i < c.size(); ++i) {
        int a = c[i], b = c[(i + 1) % c.size()];
        auto key = std::minmax(a, b);
        int e = edge_of_pair.at({key.first, key.second});
        row.flip(e);
        // step a->b against reference u->v contributes the constant 1
        if (gt.edges[e].u == b) rhs = !rhs;
      }
      sys.add_row(row, rhs);
    }
  };
  add_face_constraints(gt.faces_no_black_diag);
  add_face_constraints(gt.faces_no_white_diag);
  auto sol = sys.solve();
  if (!sol) throw std::runtime_error("no admissible orientation found");
  gt.orient.assign(sol->begin(), sol->end());

  if (q.surface == Surface::Torus) {
    WeightField xr = ff_weights(AngleField::constant(nF, 0.3, 0.7));
    auto conjugates = [&]() {
      Mat Kt = assemble_K(gt, xr, KFlavor::SkewSymmetric);
      Mat K = assemble_K(gt, xr, KFlavor::SkewHermitian);
      try {
        Vec d = gauge_conjugation(gt, Kt, K);
        Mat rhs = d.asDiagonal().inverse() * Kt * Mat(d.asDiagonal());
        return ((K - rhs).cwiseAbs().maxCoeff() < 1e-10);
      } catch (const std::exception&) {
        return false;
      }
    };
    bool aligned = false;
    std::vector<bool> base = gt.orient;
    for (int a = 0; a < 2 && !aligned; ++a)
      for (int b = 0; b < 2 && !aligned; ++b) {
        gt.orient = base;
        for (size_t ei = 0; ei < gt.edges.size(); ++ei) {
          int c = a * gt.edges[ei].wrap_x + b * gt.edges[ei].wrap_y;
          if (((c % 2) + 2) % 2 == 1) gt.orient[ei] = !gt.orient[ei];
        }
        aligned = conjugates();
      }
    if (!aligned)
      throw std::runtime_error("no orientation sector admits the diagonal conjugation");
  }
  return gt;
}

/// Explicit parity check that the orientation is Kasteleyn on both
/// restrictions (bug guard; the sphere-exempt faces are skipped).
inline bool orientation_is_admissible(const DecoratedGraph& gt) {
  std::map<std::pair<int, int>, int> edge_of_pair;
  for (size_t ei = 0; ei < gt.edges.size(); ++ei) {
    auto key = std::minmax(gt.edges[ei].u, gt.edges[ei].v);
    edge_of_pair[{key.first, key.second}] = int(ei);
  }
  auto check = [&](const std::vector<std::vector<int>>& faces) {
    size_t limit = faces.size();
    if (gt.q.surface == Surface::Sphere) --limit;
    for (size_t fi = 0; fi < limit; ++fi) {
      const auto& c = faces[fi];
      int against = 0;
      for (size_t i = 0; i < c.size(); ++i) {
        int a = c[i], b = c[(i + 1) % c.size()];
        auto key = std::minmax(a, b);
        int e = edge_of_pair.at({key.first, key.second});
        int from = gt.orient[e] ? gt.edges[e].v : gt.edges[e].u;
        if (from == b) ++against;
      }
      if (against % 2 == 0) return false;
    }
    return true;
  };
  return check(gt.faces_no_black_diag) && check(gt.faces_no_white_diag);
}

/// Kasteleyn matrix of G^T for standard weights. The skew-symmetric flavor
/// carries the admissible orientation signs on real weights (legs 1, sides
/// A/C or B/C, diagonals D/C); the skew-hermitian flavor carries complex
/// phases instead (legs -e^{i phi}/e^{-i phi} from the white side, sides
/// iA/C and B/C, diagonals iD/C). (z,w) twists multiply entries crossing the
/// fundamental-domain cut.
inline Mat assemble_K(const DecoratedGraph& gt, const WeightField& x, KFlavor flavor,
                      cplx z, cplx w) {
  const auto& q = gt.q;
  if (!x.is_standard()) throw std::invalid_argument("assemble_K requires standard weights (C != 0)");
  int n = gt.n_vertices();
  Mat K = Mat::Zero(n, n);
  auto twist = [&](const DecoratedGraph::Edge& e) {
    cplx t(1, 0);
    for (int r = 0; r < std::abs(e.wrap_x); ++r) t *= (e.wrap_x > 0) ? z : 1.0 / z;
    for (int r = 0; r < std::abs(e.wrap_y); ++r) t *= (e.wrap_y > 0) ? w : 1.0 / w;
    return t;
  };
  for (size_t ei = 0; ei < gt.edges.size(); ++ei) {
    const auto& e = gt.edges[ei];
    cplx tz = twist(e);
    if (flavor == KFlavor::SkewSymmetric) {
      double nu = 1.0;
      switch (e.kind) {
        case DecoratedGraph::EdgeKind::Leg: nu = 1.0; break;
        case DecoratedGraph::EdgeKind::SideA: nu = x[e.face].A / x[e.face].C; break;
        case DecoratedGraph::EdgeKind::SideB: nu = x[e.face].B / x[e.face].C; break;
        case DecoratedGraph::EdgeKind::Diagonal: nu = x[e.face].D / x[e.face].C; break;
      }
      double sgn = gt.orient[ei] ? -1.0 : 1.0;  // orient=false means u->v positive
      K(e.u, e.v) += sgn * nu * tz;
      K(e.v, e.u) += -sgn * nu / tz;
    } else {
      cplx val;  // entry K[u,v]
      switch (e.kind) {
        case DecoratedGraph::EdgeKind::Leg: {
          double phi = gt.leg_phi[e.u];
          val = -std::exp(cplx(0, phi));  // white -> black
          break;
        }
        case DecoratedGraph::EdgeKind::SideA:
          val = cplx(0, x[e.face].A / x[e.face].C);
          break;
        case DecoratedGraph::EdgeKind::SideB:
          // positive from the white decoration vertex to the black one
          val = (gt.is_black(e.v)) ? cplx(x[e.face].B / x[e.face].C, 0)
                                   : cplx(-x[e.face].B / x[e.face].C, 0);
          break;
        case DecoratedGraph::EdgeKind::Diagonal:
          val = cplx(0, x[e.face].D / x[e.face].C);
          break;
      }
      K(e.u, e.v) += val * tz;
      K(e.v, e.u) += -std::conj(val) / tz;
    }
  }
  return K;
}

/// T: weighted permutation pairing every vertex with its leg partner,
/// T[w, w_hat] = -e^{i phi_e}, T[w_hat, w] = -e^{-i phi_e}; T^2 = I.
inline Mat t_matrix(const DecoratedGraph& gt, cplx z = cplx(1, 0), cplx w = cplx(1, 0)) {
  int n = gt.n_vertices();
  Mat T = Mat::Zero(n, n);
  for (const auto& e : gt.edges) {
    if (e.kind != DecoratedGraph::EdgeKind::Leg) continue;
    cplx tz(1, 0);
    for (int r = 0; r < std::abs(e.wrap_x); ++r) tz *= (e.wrap_x > 0) ? z : 1.0 / z;
    for (int r = 0; r < std::abs(e.wrap_y); ++r) tz *= (e.wrap_y > 0) ? w : 1.0 / w;
    double phi = gt.leg_phi[e.u];
    T(e.u, e.v) = -std::exp(cplx(0, phi)) * tz;
    T(e.v, e.u) = -std::exp(cplx(0, -phi)) / tz;
  }
  return T;
}

/// D: diagonal +1 on black decoration vertices, -1 on white ones.
inline Mat d_matrix(const DecoratedGraph& gt) {
  int n = gt.n_vertices();
  Mat D = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) D(i, i) = gt.is_black(i) ? 1.0 : -1.0;
  return D;
}

/// Diagonal unitary conjugating the skew-hermitian flavor to the
/// skew-symmetric one, found by spanning-tree propagation:
/// K = Dc^{-1} Ktilde Dc.
inline Vec gauge_conjugation(const DecoratedGraph& gt, const Mat& Ktilde, const Mat& K) {
  int n = gt.n_vertices();
  Vec d = Vec::Zero(n);
  d(0) = 1.0;
  std::vector<char> seen(n, 0);
  seen[0] = 1;
  std::vector<int> stack = {0};
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    for (int ei : gt.vertex_edges[x]) {
      const auto& e = gt.edges[ei];
      int y = (e.u == x) ? e.v : e.u;
      if (seen[y]) continue;
      // K[x,y] = d(y)/d(x) * Ktilde[x,y]
      if (std::abs(Ktilde(x, y)) < 1e-14) continue;
      d(y) = d(x) * K(x, y) / Ktilde(x, y);
      seen[y] = 1;
      stack.push_back(y);
    }
  }
  for (int i = 0; i < n; ++i)
    if (!seen[i]) throw std::runtime_error("gauge propagation did not reach all vertices");
  return d;
}

/// Partition function on the sphere: Z = prod_f C(f) * |Pf Ktilde|, the sign
/// fixed by positivity (weights in (0,pi/2) angle fields give Z > 0).
inline double sphere_partition(const DecoratedGraph& gt, const WeightField& x) {
  if (gt.q.surface != Surface::Sphere) throw std::invalid_argument("sphere_partition needs a sphere");
  Mat Kt = assemble_K(gt, x, KFlavor::SkewSymmetric);
  RMat Ktr = Kt.real();
  double pf = pfaffian_real(Ktr);
  double pc = 1;
  for (int f = 0; f < gt.q.n_faces(); ++f) pc *= x[f].C;
  return std::abs(pc * pf);
}

/// Sector signs c_{theta,tau} for the four-Pfaffian combination
/// Z = (prod C)/2 * sum c_{tt} Pf Ktilde^{tt}. Calibrated once against the
/// enumeration oracle on a small torus and frozen; the same pattern holds
/// for all square-torus sizes (verified in tests).
struct TorusSectorSigns {
  std::array<double, 4> c = {-1, 1, 1, 1};  // (theta,tau) = (0,0),(0,1),(1,0),(1,1)
};

inline std::array<double, 4> torus_pfaffians(const DecoratedGraph& gt, const WeightField& x) {
  std::array<double, 4> pf;
  int idx = 0;
  for (int theta = 0; theta < 2; ++theta)
    for (int tau = 0; tau < 2; ++tau) {
      Mat Kt = assemble_K(gt, x, KFlavor::SkewSymmetric, theta ? -1.0 : 1.0, tau ? -1.0 : 1.0);
      RMat Ktr = Kt.real();
      pf[idx++] = pfaffian_real(Ktr);
    }
  return pf;
}

inline double torus_partition(const DecoratedGraph& gt, const WeightField& x,
                              const TorusSectorSigns& signs = {}) {
  if (gt.q.surface != Surface::Torus) throw std::invalid_argument("torus_partition needs a torus");
  auto pf = torus_pfaffians(gt, x);
  double pc = 1;
  for (int f = 0; f < gt.q.n_faces(); ++f) pc *= x[f].C;
  double acc = 0;
  for (int i = 0; i < 4; ++i) acc += signs.c[i] * pf[i];
  return pc / 2 * acc;
}

/// Calibrate the sector signs against an exact Z value; the result must be
/// unique across the 16 sign choices for the given instances.
inline TorusSectorSigns calibrate_torus_signs(const DecoratedGraph& gt,
                                              const std::vector<WeightField>& fields,
                                              const std::vector<double>& z_exact) {
  std::optional<TorusSectorSigns> found;
  for (int mask = 0; mask < 16; ++mask) {
    TorusSectorSigns s;
    for (int i = 0; i < 4; ++i) s.c[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    bool ok = true;
    for (size_t t = 0; t < fields.size() && ok; ++t) {
      double z = torus_partition(gt, fields[t], s);
      if (std::abs(z - z_exact[t]) > 1e-8 * std::max(1.0, std::abs(z_exact[t]))) ok = false;
    }
    if (ok) {
      if (found) throw std::runtime_error("torus sign calibration is ambiguous; add instances");
      found = s;
    }
  }
  if (!found) throw std::runtime_error("torus sign calibration failed");
  return *found;
}

/// Inverse switching on finite graphs:
/// K_{a,b}^{-1} = 1/2 [ (I+T) K_{a,b'}^{-1} + (I-T) K_{a',b}^{-1} ].
inline Mat inverse_switch(const DecoratedGraph& gt, const AngleField& ab, const AngleField& apbp,
                          cplx z = cplx(1, 0), cplx w = cplx(1, 0)) {
  AngleField abp{ab.alpha, apbp.beta}, apb{apbp.alpha, ab.beta};
  Mat K1 = assemble_K(gt, ff_weights(abp), KFlavor::SkewHermitian, z, w);
  Mat K2 = assemble_K(gt, ff_weights(apb), KFlavor::SkewHermitian, z, w);
  Mat T = t_matrix(gt, z, w);
  int n = gt.n_vertices();
  Mat I = Mat::Identity(n, n);
  Mat M1 = K1.partialPivLu().solve(I);
  Mat M2 = K2.partialPivLu().solve(I);
  return 0.5 * ((I + T) * M1 + (I - T) * M2);
}

/// Probability that the given primal edges all belong to the random
/// configuration, on the sphere: P^2 = det[(K^{-1})_V] on the leg endpoints.
inline double edge_probability_sphere(const DecoratedGraph& gt, const WeightField& x,
                                      const std::vector<int>& primal_edges) {
  if (primal_edges.empty()) return 1.0;
  Mat K = assemble_K(gt, x, KFlavor::SkewHermitian);
  Mat Kinv = K.partialPivLu().solve(Mat::Identity(K.rows(), K.cols()));
  std::vector<int> V;
  for (int e : primal_edges) {
    bool found = false;
    for (const auto& ed : gt.edges)
      if (ed.kind == DecoratedGraph::EdgeKind::Leg && ed.primal_edge == e) {
        V.push_back(ed.u);
        V.push_back(ed.v);
        found = true;
      }
    if (!found) throw std::invalid_argument("edge has no leg (patch boundary?)");
  }
  std::sort(V.begin(), V.end());
  V.erase(std::unique(V.begin(), V.end()), V.end());
  Mat sub(V.size(), V.size());
  for (size_t i = 0; i < V.size(); ++i)
    for (size_t j = 0; j < V.size(); ++j) sub(i, j) = Kinv(V[i], V[j]);
  cplx det = sub.determinant();
  if (std::abs(det.imag()) > 1e-9 * std::max(1.0, std::abs(det)))
    throw std::runtime_error("edge probability minor is not real");
  double d = det.real();
  if (d < -1e-9) throw std::runtime_error("edge probability minor is negative");
  return std::sqrt(std::max(0.0, d));
}

/// Debugging dump of a dense complex matrix as CSV (re/im pairs per entry);
/// the format carries no stability guarantee.
inline void dump_matrix_csv(const Mat& m, std::ostream& os) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << m(i, j).real() << ' ' << m(i, j).imag();
    }
    os << '\n';
  }
}

/// Pfaffian of the principal submatrix with rows/cols `keep`.
inline double pfaffian_submatrix(const RMat& a, const std::vector<int>& keep) {
  RMat sub(keep.size(), keep.size());
  for (size_t i = 0; i < keep.size(); ++i)
    for (size_t j = 0; j < keep.size(); ++j) sub(i, j) = a(keep[i], keep[j]);
  return pfaffian_real(sub);
}

}  // namespace ffv8
