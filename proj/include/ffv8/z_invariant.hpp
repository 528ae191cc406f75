#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ffv8/elliptic.hpp"
#include "ffv8/kasteleyn.hpp"
#include "ffv8/weights.hpp"

namespace ffv8 {

// ---------------------------------------------------------------------------
// Elliptic checkerboard weights
// ---------------------------------------------------------------------------

/// Z-invariant weights at a face of half-angle theta for moduli (k,l):
///   A = sn(theta_k|k) + sn(theta_l|l)        B = cn(theta_k|k) + cn(theta_l|l)
///   C = 1 + sn sn + cn cn                    D = cn(theta_k) sn(theta_l) - sn(theta_k) cn(theta_l).
inline FaceWeights zinv_face_weights(double theta, const Elliptic& ek, const Elliptic& el) {
  if (!(theta > 0 && theta < kPi / 2)) throw std::invalid_argument("theta outside (0, pi/2)");
  double sk = ek.sn(cplx(ek.scale(theta), 0)).real();
  double ck = ek.cn(cplx(ek.scale(theta), 0)).real();
  double sl = el.sn(cplx(el.scale(theta), 0)).real();
  double cl = el.cn(cplx(el.scale(theta), 0)).real();
  FaceWeights w;
  w.A = sk + sl;
  w.B = ck + cl;
  w.C = 1 + sk * sl + ck * cl;
  w.D = ck * sl - sk * cl;
  return w;
}

/// The corresponding angle pair: alpha = am(theta_k|k), beta = am(theta_l|l).
inline std::pair<double, double> zinv_angles(double theta, const Elliptic& ek, const Elliptic& el) {
  return {ek.am(ek.scale(theta)), el.am(el.scale(theta))};
}

inline WeightField zinv_weights(const Quadrangulation& q, double k2, double l2) {
  if (q.theta.empty()) throw std::invalid_argument("graph carries no lozenge half-angles");
  Elliptic ek(k2), el(l2);
  WeightField x;
  for (int f = 0; f < q.n_faces(); ++f) x.w.push_back(zinv_face_weights(q.theta[f], ek, el));
  return x;
}

// ---------------------------------------------------------------------------
// Checkerboard Yang-Baxter equations
// ---------------------------------------------------------------------------

/// The sixteen distinct star-triangle proportionality relations between
/// weights (a,b,c,d)_i at half-angles theta_i and (a',b',c',d')_i at the
/// complementary half-angles pi/2 - theta_i, normalized by the constant
/// fitted from the fully symmetric equation. Residuals are relative to the
/// largest left-hand side.
inline std::array<double, 16> ybe_residuals(const std::array<FaceWeights, 3>& w,
                                            const std::array<FaceWeights, 3>& wp) {
  auto a = [&](int i) { return w[i].A; };
  auto b = [&](int i) { return w[i].B; };
  auto c = [&](int i) { return w[i].C; };
  auto d = [&](int i) { return w[i].D; };
  auto ap = [&](int i) { return wp[i].A; };
  auto bp = [&](int i) { return wp[i].B; };
  auto cp = [&](int i) { return wp[i].C; };
  auto dp = [&](int i) { return wp[i].D; };

  std::vector<std::pair<double, double>> eqs;  // (lhs, rhs)
  eqs.push_back({c(0) * c(1) * c(2) + a(0) * a(1) * a(2), cp(0) * cp(1) * cp(2) + bp(0) * bp(1) * bp(2)});
  const std::array<std::array<int, 3>, 3> cyc = {{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}};
  for (auto [i, j, k] : cyc) {
    eqs.push_back({a(i) * c(j) * c(k) + c(i) * a(j) * a(k), cp(i) * ap(j) * ap(k) + bp(i) * dp(j) * dp(k)});
    eqs.push_back({c(i) * b(j) * b(k) + a(i) * d(j) * d(k), bp(i) * cp(j) * cp(k) + cp(i) * bp(j) * bp(k)});
    eqs.push_back({c(i) * d(j) * d(k) + a(i) * b(j) * b(k), cp(i) * dp(j) * dp(k) + bp(i) * ap(j) * ap(k)});
  }
  const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  for (auto [i, j, k] : perms)
    eqs.push_back({c(i) * b(j) * d(k) + a(i) * d(j) * b(k), dp(i) * ap(j) * cp(k) + ap(i) * dp(j) * bp(k)});

  double lam = eqs[0].first / eqs[0].second;
  double scale = 0;
  for (auto& [lhs, rhs] : eqs) scale = std::max({scale, std::abs(lhs), std::abs(lam * rhs)});
  std::array<double, 16> res;
  for (size_t i = 0; i < eqs.size(); ++i)
    res[i] = std::abs(eqs[i].first - lam * eqs[i].second) / scale;
  return res;
}

inline std::array<double, 16> ybe_residuals(double th1, double th2, double th3, double k2, double l2) {
  if (std::abs(th1 + th2 + th3 - kPi / 2) > 1e-12)
    throw std::invalid_argument("star-triangle angles must sum to pi/2");
  Elliptic ek(k2), el(l2);
  std::array<FaceWeights, 3> w = {zinv_face_weights(th1, ek, el), zinv_face_weights(th2, ek, el),
                                  zinv_face_weights(th3, ek, el)};
  std::array<FaceWeights, 3> wp = {zinv_face_weights(kPi / 2 - th1, ek, el),
                                   zinv_face_weights(kPi / 2 - th2, ek, el),
                                   zinv_face_weights(kPi / 2 - th3, ek, el)};
  return ybe_residuals(w, wp);
}

// ---------------------------------------------------------------------------
// Rhombus paths and the discrete massive exponential
// ---------------------------------------------------------------------------

/// A path from the midpoint of the edge nearest a black decoration vertex to
/// the midpoint of the edge nearest a white one: half step at angle
/// angles.front(), full unit steps in between, half step at angles.back().
/// The interior steps join the lattice vertices a_1 .. a_{n-1}.
struct RhombusPath {
  std::vector<double> angles;   // alpha_1 .. alpha_n, n >= 2
  bool a1_black = true;         // color of a_1
  bool aend_black = true;       // color of a_{n-1}
  double r = 0;                 // |a_1 - a_{n-1}|
  double theta_w = kPi / 4;     // half-angle of the face containing w
  double sector_center = 0;     // center of the pole-free contour placement
  // Direction from the black decoration vertex to the white one; selects the
  // pole-free arc for the contour when the step angles span a full closed
  // half-circle (adjacent entries), where two arcs exist and they differ by
  // a residue.
  double contour_hint = std::numeric_limits<double>::quiet_NaN();

  int n_steps() const { return int(angles.size()); }
  /// Interior full-step angles alpha_2 .. alpha_{n-1}.
  std::vector<double> interior() const {
    return std::vector<double>(angles.begin() + 1, angles.end() - 1);
  }
};

/// Synthetic path carrying only the decay data (interior angles and r);
/// used for the decay-rate scans that do not touch Kasteleyn entries.
inline RhombusPath synthetic_path(std::vector<double> interior_angles, double r) {
  RhombusPath p;
  p.angles.push_back(interior_angles.empty() ? 0.0 : interior_angles.front());
  for (double a : interior_angles) p.angles.push_back(a);
  p.angles.push_back(p.angles.front());
  p.r = r;
  double mn = 1e300, mx = -1e300;
  for (double a : interior_angles) {
    mn = std::min(mn, a);
    mx = std::max(mx, a);
  }
  p.sector_center = interior_angles.empty() ? 0.0 : (mn + mx) / 2;
  return p;
}

/// Discrete k-massive exponential: prod over interior steps of
/// i sqrt(k') sc( ((u - alpha_j)/2)_k | k ). Empty product = 1.
inline cplx massive_exp(const RhombusPath& p, cplx u, const Elliptic& ek) {
  cplx acc(1, 0);
  double sk = std::sqrt(ek.kprime());
  for (double aj : p.interior()) {
    cplx v = ek.K() / kPi * (u - aj);  // ((u - alpha_j)/2)_k
    acc *= cplx(0, 1) * sk * ek.sc(v);
  }
  return acc;
}

/// Endpoint factor of the local kernel; the four cases select nc or dc at
/// the two half steps according to the colors of a_1 and a_{n-1}.
inline cplx h_fn(const RhombusPath& p, cplx u, const Elliptic& ek) {
  cplx v1 = ek.K() / kPi * (u - p.angles.front());
  cplx vn = ek.K() / kPi * (u - p.angles.back());
  double kp = ek.kprime(), skp = std::sqrt(kp);
  if (p.a1_black && p.aend_black) return ek.nc(v1) * ek.nc(vn) * (-kp);
  if (p.a1_black && !p.aend_black) return ek.nc(v1) * ek.dc(vn) * (-skp);
  if (!p.a1_black && p.aend_black) return ek.dc(v1) * ek.nc(vn) * skp;
  return ek.dc(v1) * ek.dc(vn);
}

/// f_{b,w}(u|k) = e^{i theta(w)} e^{-i(alpha_n - alpha_1)/2} h(u|k) e(u|k);
/// meromorphic on T(k) with poles only on the lines Re u = alpha_i + pi.
inline cplx f_bw(const RhombusPath& p, cplx u, const Elliptic& ek) {
  cplx phase = std::exp(cplx(0, p.theta_w)) * std::exp(cplx(0, -(p.angles.back() - p.angles.front()) / 2));
  return phase * h_fn(p, u, ek) * massive_exp(p, u, ek);
}

/// Vertical-contour abscissa: the midpoint of the pole-free arc of R/2piZ
/// (poles sit at alpha_i + pi) containing the contour hint when one is set,
/// otherwise of the largest arc.
inline double contour_abscissa(const RhombusPath& p) {
  std::vector<double> poles;
  for (double a : p.angles) {
    double q = std::fmod(a + kPi, 2 * kPi);
    if (q < 0) q += 2 * kPi;
    poles.push_back(q);
  }
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(),
                          [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              poles.end());
  double best_gap = -1, best_mid = 0;
  bool use_hint = !std::isnan(p.contour_hint);
  for (size_t i = 0; i < poles.size(); ++i) {
    double a = poles[i];
    double b = (i + 1 < poles.size()) ? poles[i + 1] : poles[0] + 2 * kPi;
    if (use_hint) {
      double h = std::fmod(p.contour_hint - a, 2 * kPi);
      if (h < 0) h += 2 * kPi;
      if (h < b - a) return (a + b) / 2;
    }
    if (b - a > best_gap) {
      best_gap = b - a;
      best_mid = (a + b) / 2;
    }
  }
  return best_mid;
}

/// Local inverse operator entry of the six-vertex block:
///   Kinv_k[b,w] = K(k)/(2 i pi^2) * integral over a vertical contour of f.
/// The contour winds once in the imaginary direction of T(k); the integrand
/// is analytic there, and the periodic trapezoid rule is doubled until the
/// value stabilizes. x0 overrides the contour abscissa when finite.
inline cplx kinv6v_entry(const RhombusPath& p, const Elliptic& ek,
                         double x0 = std::numeric_limits<double>::quiet_NaN(),
                         double tol = 1e-11) {
  if (!(ek.k2() > 0)) throw std::domain_error("local inverse needs k in (0,1)");
  double abscissa = std::isnan(x0) ? contour_abscissa(p) : x0;
  // guard: distance from the contour to every pole line
  for (double a : p.angles) {
    double d = std::remainder(abscissa - (a + kPi), 2 * kPi);
    if (std::abs(d) < kPi / 12 - 1e-9)
      throw std::invalid_argument("contour too close to a pole of the kernel");
  }
  double period = 2 * kPi * ek.tau_im();
  cplx prev(0, 0);
  cplx val(0, 0);
  for (int N = 32; N <= 8192; N *= 2) {
    cplx acc(0, 0);
    for (int j = 0; j < N; ++j) {
      double y = period * (j + 0.5) / N;
      acc += f_bw(p, cplx(abscissa, y), ek);
    }
    val = acc * cplx(0, 1) * (period / N);  // du = i dy along the contour
    if (N > 32 && std::abs(val - prev) <= tol * (1 + std::abs(val))) break;
    prev = val;
  }
  return ek.K() / (2.0 * cplx(0, 1) * kPi * kPi) * val;
}

// ---------------------------------------------------------------------------
// The square-lattice plane: local Kasteleyn rows and inverse entries
// ---------------------------------------------------------------------------

/// Decoration vertices of the infinite square-lattice quadrangulation
/// (faces are unit squares, all half-angles pi/4, phi = pi/4 on every edge).
/// Face (fx,fy) has corners ((fx,fy),(fx+1,fy),(fx+1,fy+1),(fx,fy+1)),
/// rotated to start at a black lattice vertex ((x+y) even); corner i of the
/// cycle owns boundary edge i and is black iff i is even.
class SquarePlane {
 public:
  SquarePlane(double k2, double l2) : ek_(k2), el_(l2), k2_(k2), l2_(l2) {
    wk_ = zinv_face_weights(kPi / 4, ek_, ek_);
    wl_ = zinv_face_weights(kPi / 4, el_, el_);
    wkl_ = zinv_face_weights(kPi / 4, ek_, el_);
  }

  struct V {
    long fx = 0, fy = 0;  // face
    int c = 0;            // corner 0..3 of the face cycle

    bool operator<(const V& o) const {
      return std::tie(fx, fy, c) < std::tie(o.fx, o.fy, o.c);
    }
    bool operator==(const V& o) const = default;
  };

  static bool is_black(const V& v) { return v.c % 2 == 0; }

  /// Lattice corners of face (fx,fy) in cycle order.
  static std::array<std::array<long, 2>, 4> cycle(long fx, long fy) {
    std::array<std::array<long, 2>, 4> corner = {{{fx, fy}, {fx + 1, fy}, {fx + 1, fy + 1}, {fx, fy + 1}}};
    int start = int(((fx + fy) % 2 + 2) % 2);
    std::array<std::array<long, 2>, 4> out;
    for (int i = 0; i < 4; ++i) out[i] = corner[(start + i) % 4];
    return out;
  }

  /// Endpoints of the boundary edge owned by corner c.
  static std::array<std::array<long, 2>, 2> edge_of(const V& v) {
    auto cyc = cycle(v.fx, v.fy);
    return {cyc[v.c], cyc[(v.c + 1) % 4]};
  }

  /// The decoration vertex on the other side of the leg.
  static V leg_partner(const V& v) {
    auto e = edge_of(v);
    // the edge is axis aligned; the two faces sharing it differ by one step
    long gx, gy;
    if (e[0][1] == e[1][1]) {  // horizontal edge at y = e[0][1]
      long y = e[0][1];
      gx = std::min(e[0][0], e[1][0]);
      gy = (y == v.fy) ? v.fy - 1 : v.fy + 1;
    } else {  // vertical edge at x = e[0][0]
      long x = e[0][0];
      gy = std::min(e[0][1], e[1][1]);
      gx = (x == v.fx) ? v.fx - 1 : v.fx + 1;
    }
    V w{gx, gy, 0};
    auto norm = [](std::array<std::array<long, 2>, 2> ed) {
      if (ed[1] < ed[0]) std::swap(ed[0], ed[1]);
      return ed;
    };
    auto target = norm(e);
    for (int c = 0; c < 4; ++c) {
      w.c = c;
      if (norm(edge_of(w)) == target) return w;
    }
    throw std::logic_error("leg partner not found");
  }

  /// Nonzero entries of the K_{k,l} row at x: the leg partner and the three
  /// other decoration vertices of its face.
  std::vector<std::pair<V, cplx>> k_row(const V& x) const {
    std::vector<std::pair<V, cplx>> row;
    const FaceWeights& fw = wkl_;
    double phi = kPi / 4;
    V partner = leg_partner(x);
    row.push_back({partner, is_black(x) ? std::exp(cplx(0, -phi)) : -std::exp(cplx(0, phi))});
    for (int d = 1; d < 4; ++d) {
      V y{x.fx, x.fy, (x.c + d) % 4};
      cplx val;
      if (d == 2) {
        val = cplx(0, fw.D / fw.C);
      } else {
        int i = (d == 1) ? x.c : y.c;  // side (d_i, d_{i+1})
        bool a_side = (i % 2 == 0);    // shared corner cycle[i+1] is white
        if (a_side)
          val = cplx(0, fw.A / fw.C);
        else
          val = is_black(y) ? cplx(fw.B / fw.C, 0) : cplx(-fw.B / fw.C, 0);
      }
      row.push_back({y, val});
    }
    return row;
  }

  /// Position of a decoration vertex inside its face.
  static Vector2d decor_pos(const V& v) {
    auto cyc = cycle(v.fx, v.fy);
    Vector2d c(0, 0);
    for (auto& p : cyc) c += Vector2d(p[0], p[1]);
    c /= 4.0;
    Vector2d mid = (Vector2d(cyc[v.c][0], cyc[v.c][1]) +
                    Vector2d(cyc[(v.c + 1) % 4][0], cyc[(v.c + 1) % 4][1])) /
                   2.0;
    return c + 0.55 * (mid - c);
  }

  /// Path from the edge nearest b (black) to the edge nearest w (white),
  /// staircase with all step angles inside an open pi-sector.
  RhombusPath path(const V& b, const V& w) const {
    if (!is_black(b) || is_black(w)) throw std::invalid_argument("path endpoints need colors (black, white)");
    auto eb = edge_of(b), ew = edge_of(w);
    Vector2d mb = Vector2d(eb[0][0] + eb[1][0], eb[0][1] + eb[1][1]) / 2.0;
    Vector2d mw = Vector2d(ew[0][0] + ew[1][0], ew[0][1] + ew[1][1]) / 2.0;
    RhombusPath best;
    double best_width = 1e300;
    size_t best_len = size_t(-1);
    for (int sb = 0; sb < 2; ++sb)
      for (int sw = 0; sw < 2; ++sw) {
        Vector2d a1(eb[sb][0], eb[sb][1]);
        Vector2d ae(ew[sw][0], ew[sw][1]);
        RhombusPath p;
        Vector2d h1 = a1 - mb;
        p.angles.push_back(std::atan2(h1.y(), h1.x()));
        long dx = std::lround(ae.x() - a1.x()), dy = std::lround(ae.y() - a1.y());
        double ax = dx >= 0 ? 0 : kPi;
        double ay = dy >= 0 ? kPi / 2 : -kPi / 2;
        // interleave to stay taut; order is irrelevant to the kernel
        for (long i = 0; i < std::abs(dx); ++i) p.angles.push_back(ax);
        for (long i = 0; i < std::abs(dy); ++i) p.angles.push_back(ay);
        Vector2d hn = mw - ae;
        p.angles.push_back(std::atan2(hn.y(), hn.x()));
        // sector width: smallest arc containing all angles
        double width, center;
        sector(p.angles, width, center);
        bool better = (width < best_width - 1e-12) ||
                      (width < best_width + 1e-12 && p.angles.size() < best_len);
        if (!better) continue;
        best_width = width;
        best_len = p.angles.size();
        p.sector_center = center;
        p.a1_black = ((std::lround(a1.x()) + std::lround(a1.y())) % 2 + 2) % 2 == 0;
        p.aend_black = ((std::lround(ae.x()) + std::lround(ae.y())) % 2 + 2) % 2 == 0;
        p.r = (ae - a1).norm();
        p.theta_w = kPi / 4;
        Vector2d db = decor_pos(b), dw = decor_pos(w);
        p.contour_hint = std::atan2(dw.y() - db.y(), dw.x() - db.x());
        best = p;
      }
    if (best.angles.empty()) throw std::runtime_error("no sector-compatible path found");
    return best;
  }

  /// Six-vertex local inverse entry for modulus k or l between decoration
  /// vertices (b in B^T rows, w in W^T columns).
  cplx kinv6v(const V& b, const V& w, bool use_l) const {
    auto p = path(b, w);
    return kinv6v_entry(p, use_l ? el_ : ek_);
  }

  /// Entry of the local inverse of K_{k,l} between arbitrary decoration
  /// vertices, assembled from the two six-vertex inverses:
  ///   [w,b]  = -i/2 (Kk^{-1}[b,w] + Kl^{-1}[b,w])
  ///   [b,w]  = -i/2 (conj Kk^{-1}[b,w] + conj Kl^{-1}[b,w])
  ///   [w,w'] = i e^{i theta}/2 (conj Kk^{-1}[w^,w'] - conj Kl^{-1}[w^,w'])
  ///   [b,b'] = i e^{-i theta}/2 (Kk^{-1}[b',b^] - Kl^{-1}[b',b^]).
  cplx kinv(const V& x, const V& y) const {
    if (!is_black(x) && is_black(y)) {  // [w, b]
      cplx a = kinv6v(y, x, false), b = kinv6v(y, x, true);
      return cplx(0, -0.5) * (a + b);
    }
    if (is_black(x) && !is_black(y)) {  // [b, w]
      cplx a = kinv6v(x, y, false), b = kinv6v(x, y, true);
      return cplx(0, -0.5) * (std::conj(a) + std::conj(b));
    }
    if (!is_black(x) && !is_black(y)) {  // [w, w']
      V xhat = leg_partner(x);
      cplx a = kinv6v(xhat, y, false), b = kinv6v(xhat, y, true);
      return cplx(0, 0.5) * std::exp(cplx(0, kPi / 4)) * (std::conj(a) - std::conj(b));
    }
    V xhat = leg_partner(x);  // [b, b']
    cplx a = kinv6v(y, xhat, false), b = kinv6v(y, xhat, true);
    return cplx(0, 0.5) * std::exp(cplx(0, -kPi / 4)) * (a - b);
  }

  const Elliptic& ell_k() const { return ek_; }
  const Elliptic& ell_l() const { return el_; }
  const FaceWeights& face_weights() const { return wkl_; }
  double k2() const { return k2_; }
  double l2() const { return l2_; }

 private:
  static void sector(const std::vector<double>& angles, double& width, double& center) {
    // normalize directions to the circle and find the smallest containing arc
    std::vector<double> a;
    for (double x : angles) {
      double y = std::fmod(x, 2 * kPi);
      if (y < 0) y += 2 * kPi;
      a.push_back(y);
    }
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
            a.end());
    if (a.size() <= 1) {
      width = 0;
      center = a.empty() ? 0 : a[0];
      return;
    }
    double best_gap = -1, gap_mid = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      double lo = a[i], hi = (i + 1 < a.size()) ? a[i + 1] : a[0] + 2 * kPi;
      if (hi - lo > best_gap) {
        best_gap = hi - lo;
        gap_mid = (lo + hi) / 2;
      }
    }
    width = 2 * kPi - best_gap;
    center = gap_mid + kPi;  // opposite of the gap center
  }

  Elliptic ek_, el_;
  double k2_, l2_;
  FaceWeights wk_, wl_, wkl_;
};

// ---------------------------------------------------------------------------
// Decay rates: chi, u0, asymptotics
// ---------------------------------------------------------------------------

/// chi(u,k) = (1/r) sum_j g(u - alpha_j, k) over the interior step angles.
inline double chi_fn(const RhombusPath& p, double u, const Elliptic& ek) {
  double s = 0;
  for (double aj : p.interior()) s += g_fn(std::remainder(u - aj, 2 * kPi), ek);
  return s / p.r;
}

inline double chi_du(const RhombusPath& p, double u, const Elliptic& ek) {
  double s = 0;
  double k2 = ek.k2(), K = ek.K();
  for (double aj : p.interior()) {
    double v = K / kPi * std::remainder(u - aj, 2 * kPi);
    double sn = ek.sn(cplx(v, 0)).real(), cn = ek.cn(cplx(v, 0)).real(), dn = ek.dn(cplx(v, 0)).real();
    s += (K / kPi) * k2 * sn * cn / dn;
  }
  return s / p.r;
}

inline double chi_duu(const RhombusPath& p, double u, const Elliptic& ek) {
  double s = 0;
  double k2 = ek.k2(), K = ek.K();
  for (double aj : p.interior()) {
    double v = K / kPi * std::remainder(u - aj, 2 * kPi);
    double sn = ek.sn(cplx(v, 0)).real(), cn = ek.cn(cplx(v, 0)).real(), dn = ek.dn(cplx(v, 0)).real();
    s += (K / kPi) * (K / kPi) * k2 * (dn * dn * (cn * cn - sn * sn) + k2 * sn * sn * cn * cn) / (dn * dn);
  }
  return s / p.r;
}

/// The unique critical point of chi(.,k) in sector_center + (-pi/2, pi/2):
/// bracketed bisection followed by Newton. Checked against the Landen-
/// transformed characterization sum_j sn((u0 - alpha_j)_k~ | k~) = 0.
inline double u0_minimizer(const RhombusPath& p, const Elliptic& ek, double* check_residual = nullptr) {
  double c = p.sector_center;
  double lo = c - kPi / 2 + 1e-6, hi = c + kPi / 2 - 1e-6;
  double flo = chi_du(p, lo, ek), fhi = chi_du(p, hi, ek);
  if (!(flo < 0 && fhi > 0)) throw std::runtime_error("u0 not bracketed in the sector");
  while (hi - lo > 1e-3) {
    double mid = (lo + hi) / 2, fm = chi_du(p, mid, ek);
    (fm < 0 ? lo : hi) = mid;
  }
  double u = (lo + hi) / 2;
  for (int it = 0; it < 60; ++it) {
    double f = chi_du(p, u, ek), fp = chi_duu(p, u, ek);
    double step = f / fp;
    u -= step;
    if (u < lo || u > hi) {  // fall back to bisection territory
      u = std::clamp(u, lo, hi);
    }
    if (std::abs(step) < 1e-13) break;
  }
  if (check_residual) {
    double kp = ek.kprime();
    double kt = (1 - kp) / (1 + kp);
    Elliptic et(kt * kt);
    double s = 0;
    for (double aj : p.interior()) s += et.sn(cplx(et.scale(std::remainder(u - aj, 2 * kPi)), 0)).real();
    *check_residual = std::abs(s);
  }
  return u;
}

/// Strict cardinal inequality of the two step-angle classes around u0, after
/// recentring the sector at zero and mirroring so that u0 >= 0.
inline bool cardinal_check(const RhombusPath& p, const Elliptic& ek) {
  double u0 = u0_minimizer(p, ek);
  std::vector<double> rel;
  for (double aj : p.interior()) rel.push_back(std::remainder(aj - p.sector_center, 2 * kPi));
  double u = std::remainder(u0 - p.sector_center, 2 * kPi);
  if (u < 0) {
    u = -u;
    for (auto& a : rel) a = -a;
  }
  int below = 0, above = 0;
  for (double a : rel) {
    if (a < u - kPi / 2) ++below;
    if (a > u) ++above;
  }
  return below < above;
}

/// Closed-form prediction for Kinv_k[b,w] at large r. Saddle point of the
/// contour integral on the vertical line through u0: the shifted factors
/// give (-1)^{n-2} e^{r chi}, the Gaussian in the imaginary offset yields
/// sqrt(2 pi / (r chi'')), and with the K/(2 i pi^2) prefactor
///   Kinv ~ K e^{i theta(w)} e^{-i(alpha_n-alpha_1)/2} h(u0 + i pi K'/K)
///          (-1)^{n-2} e^{r chi(u0)} / sqrt(2 pi^3 r chi''(u0)).
inline cplx asymptotic_prediction(const RhombusPath& p, const Elliptic& ek,
                                  double hypothesis_eps = 1e-2) {
  double u0 = u0_minimizer(p, ek);
  if (std::abs(std::remainder(u0 - p.angles.front(), 2 * kPi)) < hypothesis_eps ||
      std::abs(std::remainder(u0 - p.angles.back(), 2 * kPi)) < hypothesis_eps)
    throw std::runtime_error("asymptotic hypothesis violated: u0 too close to a boundary angle");
  cplx hval = h_fn(p, cplx(u0, kPi * ek.tau_im()), ek);
  cplx phase = std::exp(cplx(0, p.theta_w)) * std::exp(cplx(0, -(p.angles.back() - p.angles.front()) / 2));
  double parity = (p.interior().size() % 2 == 0) ? 1.0 : -1.0;
  double curit = chi_duu(p, u0, ek);
  return ek.K() * phase * hval * parity / std::sqrt(2 * kPi * kPi * kPi * p.r * curit) *
         std::exp(p.r * chi_fn(p, u0, ek));
}

struct ExponentScanRow {
  double k;
  double chi0;       // chi(u0(k), k)
  double chi0_over_k2;
};

inline std::vector<ExponentScanRow> critical_exponent_scan(const RhombusPath& p,
                                                           const std::vector<double>& ks) {
  std::vector<ExponentScanRow> rows;
  for (double k : ks) {
    Elliptic ek(k * k);
    double u0 = u0_minimizer(p, ek);
    double c = chi_fn(p, u0, ek);
    rows.push_back({k, c, c / (k * k)});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Periodic-graph oracle: inverse entries from the fundamental domain
// ---------------------------------------------------------------------------

/// Independent oracle for the local inverse: the dense inverse of the
/// N-torus Kasteleyn matrix equals the average of twisted fundamental-domain
/// inverses over N'-th roots of unity (N' = N/2 fundamental domains); the
/// average converges to the full-plane inverse as N' grows since the model
/// is massive for k > 0. The character exponent convention is pinned by a
/// test against a literal dense torus inverse.
class TorusAverageOracle {
 public:
  TorusAverageOracle(double k2, double l2) {
    auto q = build_square_torus(2, 2);
    gt_ = build_decorated_graph(q, corner_angles(q));
    x_ = zinv_weights(gt_.q, k2, l2);
  }

  /// Average over an N' x N' character grid, one sweep for all pairs.
  std::vector<cplx> kinv_batch(const std::vector<std::pair<SquarePlane::V, SquarePlane::V>>& pairs,
                               int nhalf) const {
    std::vector<cplx> out(pairs.size(), 0.0);
    Mat I = Mat::Identity(gt_.n_vertices(), gt_.n_vertices());
    for (int j = 0; j < nhalf; ++j)
      for (int k = 0; k < nhalf; ++k) {
        cplx z = std::polar(1.0, 2 * kPi * j / nhalf);
        cplx w = std::polar(1.0, 2 * kPi * k / nhalf);
        Mat K = assemble_K(gt_, x_, KFlavor::SkewHermitian, z, w);
        Mat Kinv = K.partialPivLu().solve(I);
        for (size_t t = 0; t < pairs.size(); ++t) {
          const auto& [x, y] = pairs[t];
          long tx = dom(y.fx) - dom(x.fx), ty = dom(y.fy) - dom(x.fy);
          out[t] += Kinv(vertex_id(x), vertex_id(y)) * std::pow(z, double(-tx)) * std::pow(w, double(-ty));
        }
      }
    for (auto& v : out) v /= double(nhalf) * double(nhalf);
    return out;
  }

  /// Doubled until every requested entry is stable.
  std::vector<cplx> kinv_converged(const std::vector<std::pair<SquarePlane::V, SquarePlane::V>>& pairs,
                                   double tol = 1e-8, int max_nhalf = 1024) const {
    auto prev = kinv_batch(pairs, 32);
    for (int n = 64; n <= max_nhalf; n *= 2) {
      auto val = kinv_batch(pairs, n);
      double worst = 0;
      for (size_t t = 0; t < pairs.size(); ++t)
        worst = std::max(worst, std::abs(val[t] - prev[t]) / (1 + std::abs(val[t])));
      if (worst < tol) return val;
      prev = val;
    }
    return prev;
  }

  cplx kinv_one(const SquarePlane::V& x, const SquarePlane::V& y, double tol = 1e-8) const {
    return kinv_converged({{x, y}}, tol)[0];
  }

  const DecoratedGraph& graph() const { return gt_; }
  const WeightField& weights() const { return x_; }

  static int vertex_id(const SquarePlane::V& v) {
    int fx0 = int(((v.fx % 2) + 2) % 2), fy0 = int(((v.fy % 2) + 2) % 2);
    return 4 * (fy0 * 2 + fx0) + v.c;
  }

 private:
  static long dom(long f) { return (f - (((f % 2) + 2) % 2)) / 2; }

  DecoratedGraph gt_;
  WeightField x_;
};

// ---------------------------------------------------------------------------
// Infinite-volume probabilities from the local inverse
// ---------------------------------------------------------------------------

/// P(e_1..e_m in tau) = sqrt(det[(Kinv_{k,l})_V]) over the leg endpoints of
/// the listed edges, each edge given by one of its decoration vertices.
inline double edge_probabilities_planar(const SquarePlane& sp, const std::vector<SquarePlane::V>& legs) {
  if (legs.empty()) return 1.0;
  if (!(sp.k2() >= 0 && sp.k2() < sp.l2() && sp.l2() < 1))
    throw std::invalid_argument("probability formula needs 0 <= k < l < 1");
  std::vector<SquarePlane::V> V;
  for (auto& v : legs) {
    V.push_back(v);
    V.push_back(SquarePlane::leg_partner(v));
  }
  Mat sub(V.size(), V.size());
  for (size_t i = 0; i < V.size(); ++i)
    for (size_t j = 0; j < V.size(); ++j) sub(i, j) = sp.kinv(V[i], V[j]);
  cplx det = sub.determinant();
  if (std::abs(det.imag()) > 1e-7 * std::max(1.0, std::abs(det)))
    throw std::runtime_error("probability minor is not real");
  if (det.real() < -1e-9) throw std::runtime_error("probability minor is negative");
  return std::sqrt(std::max(0.0, det.real()));
}

}  // namespace ffv8
