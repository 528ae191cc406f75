#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ffv8/quad_graph.hpp"

namespace ffv8 {

/// Local vertex weights at one face, in the order A, B, C, D.
struct FaceWeights {
  double A = 0, B = 0, C = 0, D = 0;

  double free_fermion_residual() const {
    double lhs = A * A + B * B, rhs = C * C + D * D;
    double scale = std::max({std::abs(lhs), std::abs(rhs), 1.0});
    return std::abs(lhs - rhs) / scale;
  }
  bool is_standard(double tol = 1e-12) const {
    double scale = std::max({std::abs(A), std::abs(B), std::abs(C), std::abs(D), 1.0});
    return std::abs(C) > tol * scale;
  }
};

/// Per-face angles (alpha, beta) parametrizing the free-fermion manifold.
struct AngleField {
  std::vector<double> alpha, beta;

  int n_faces() const { return int(alpha.size()); }

  static AngleField constant(int n_faces, double a, double b) {
    AngleField f;
    f.alpha.assign(n_faces, a);
    f.beta.assign(n_faces, b);
    return f;
  }

  /// Standard iff alpha - beta != pi (mod 2pi) at every face, with an explicit
  /// floating-point band.
  bool is_standard(double tol = 1e-10) const {
    for (int f = 0; f < n_faces(); ++f) {
      double d = std::remainder(alpha[f] - beta[f] - kPi, 2 * kPi);
      if (std::abs(d) <= tol) return false;
    }
    return true;
  }

  /// 0 < alpha <= beta < pi/2 at every face: Boltzmann weights are a
  /// probability measure.
  bool in_probability_regime() const {
    for (int f = 0; f < n_faces(); ++f)
      if (!(0 < alpha[f] && alpha[f] <= beta[f] && beta[f] < kPi / 2)) return false;
    return true;
  }

  AngleField swapped() const {
    AngleField s = *this;
    std::swap(s.alpha, s.beta);
    return s;
  }
};

/// A, B, C, D on every face of an attached quadrangulation.
struct WeightField {
  std::vector<FaceWeights> w;

  int n_faces() const { return int(w.size()); }
  FaceWeights& operator[](int f) { return w[f]; }
  const FaceWeights& operator[](int f) const { return w[f]; }

  double free_fermion_residual() const {
    double r = 0;
    for (auto& fw : w) r = std::max(r, fw.free_fermion_residual());
    return r;
  }
  bool is_standard(double tol = 1e-12) const {
    for (auto& fw : w)
      if (!fw.is_standard(tol)) return false;
    return true;
  }
};

/// Free-fermion weights of an angle pair:
///   A = sin a + sin b, B = cos a + cos b,
///   C = 1 + sin a sin b + cos a cos b, D = cos a sin b - sin a cos b.
/// These satisfy 2C = A^2 + B^2 = C^2 + D^2.
inline FaceWeights ff_face_weights(double a, double b) {
  FaceWeights fw;
  fw.A = std::sin(a) + std::sin(b);
  fw.B = std::cos(a) + std::cos(b);
  fw.C = 1 + std::sin(a) * std::sin(b) + std::cos(a) * std::cos(b);
  fw.D = std::cos(a) * std::sin(b) - std::sin(a) * std::cos(b);
  return fw;
}

inline WeightField ff_weights(const AngleField& angles) {
  WeightField x;
  x.w.resize(angles.n_faces());
  for (int f = 0; f < angles.n_faces(); ++f) x.w[f] = ff_face_weights(angles.alpha[f], angles.beta[f]);
  return x;
}

/// Inverse of ff_face_weights up to gauge: returns (alpha, beta) such that
/// ff_face_weights(alpha, beta) is proportional to the input. Uses the
/// homogeneous form [sin u : cos u : cos v : -sin v], u=(a+b)/2, v=(a-b)/2,
/// normalized to u in [0, pi).
inline std::pair<double, double> homogeneous_params(const FaceWeights& fw, double tol = 1e-9) {
  if (!fw.is_standard()) throw std::invalid_argument("homogeneous_params: C = 0");
  if (fw.free_fermion_residual() > tol)
    throw std::invalid_argument("homogeneous_params: weights are not free-fermion");
  double u = std::atan2(fw.A, fw.B);
  double v = std::atan2(-fw.D, fw.C);
  if (u < 0) {
    u += kPi;
    v += kPi;
  }
  auto mod2pi = [](double x) {
    double y = std::fmod(x, 2 * kPi);
    return y < 0 ? y + 2 * kPi : y;
  };
  return {mod2pi(u + v), mod2pi(u - v)};
}

/// Multiply all four weights at each face by lambda(f) != 0.
inline WeightField gauge(const WeightField& x, const std::function<double(int)>& lambda) {
  WeightField y = x;
  for (int f = 0; f < y.n_faces(); ++f) {
    double l = lambda(f);
    if (l == 0.0) throw std::invalid_argument("gauge factor must be nonzero");
    y[f].A *= l;
    y[f].B *= l;
    y[f].C *= l;
    y[f].D *= l;
  }
  return y;
}

/// Kramers-Wannier duality: (A,B,C,D) -> ((A-B+C-D)/2, (-A+B+C-D)/2,
/// (A+B+C+D)/2, (-A-B+C+D)/2). An involution that exchanges order and
/// disorder.
inline FaceWeights duality_hat_face(const FaceWeights& w) {
  FaceWeights h;
  h.A = (w.A - w.B + w.C - w.D) / 2;
  h.B = (-w.A + w.B + w.C - w.D) / 2;
  h.C = (w.A + w.B + w.C + w.D) / 2;
  h.D = (-w.A - w.B + w.C + w.D) / 2;
  return h;
}

inline WeightField duality_hat(const WeightField& x) {
  WeightField y = x;
  for (auto& fw : y.w) fw = duality_hat_face(fw);
  return y;
}

inline WeightField negate_D(const WeightField& x) {
  WeightField y = x;
  for (auto& fw : y.w) fw.D = -fw.D;
  return y;
}

// ---------------------------------------------------------------------------
// Order / disorder weight-modification operators.
//   nu_B:  (A,B,C,D) -> (A,-B,C,-D)      nu_W:  (A,B,C,D) -> (-A,B,C,-D)
//   xi_B:  (A,B,C,D) -> (C,D,A,B)        xi_W:  (A,B,C,D) -> (D,C,B,A)
// Order operators (nu) are applied before disorder ones (xi); nu and xi of
// opposite colors anticommute, so the order matters up to a global sign.
// ---------------------------------------------------------------------------

inline FaceWeights nu_black(const FaceWeights& w) { return {w.A, -w.B, w.C, -w.D}; }
inline FaceWeights nu_white(const FaceWeights& w) { return {-w.A, w.B, w.C, -w.D}; }
inline FaceWeights xi_black(const FaceWeights& w) { return {w.C, w.D, w.A, w.B}; }
inline FaceWeights xi_white(const FaceWeights& w) { return {w.D, w.C, w.B, w.A}; }

/// Path sets for mixed correlators; each entry is a set of faces crossed by
/// order lines (index 0) and disorder lines (index 1) of each color.
struct PathSets {
  std::vector<int> order_black;     // gamma_{B0}
  std::vector<int> order_white;     // gamma_{W0}
  std::vector<int> disorder_black;  // gamma_{B1}
  std::vector<int> disorder_white;  // gamma_{W1}
};

inline WeightField apply_disorder_ops(const WeightField& x, const PathSets& g) {
  WeightField y = x;
  auto check = [&](const std::vector<int>& faces) {
    for (int f : faces)
      if (f < 0 || f >= y.n_faces()) throw std::invalid_argument("path face out of range");
  };
  check(g.order_black);
  check(g.order_white);
  check(g.disorder_black);
  check(g.disorder_white);
  for (int f : g.order_white) y[f] = nu_white(y[f]);
  for (int f : g.order_black) y[f] = nu_black(y[f]);
  for (int f : g.disorder_white) y[f] = xi_white(y[f]);
  for (int f : g.disorder_black) y[f] = xi_black(y[f]);
  return y;
}

// ---------------------------------------------------------------------------
// Constants built from products of C over faces.
// ---------------------------------------------------------------------------

/// c_{alpha,beta} = prod_f C_{alpha,beta}(f).
inline double c_product(const AngleField& a) {
  double c = 1;
  for (int f = 0; f < a.n_faces(); ++f) c *= ff_face_weights(a.alpha[f], a.beta[f]).C;
  return c;
}

/// c0 = (1/2) prod_f sqrt(cos alpha sin beta C_{alpha,beta}).
inline double c0_constant(const AngleField& a) {
  double c = 0.5;
  for (int f = 0; f < a.n_faces(); ++f) {
    double t = std::cos(a.alpha[f]) * std::sin(a.beta[f]) * ff_face_weights(a.alpha[f], a.beta[f]).C;
    c *= std::sqrt(t);
  }
  return c;
}

/// c1 = sqrt(c_{a,b} c_{a',b'} / (c_{a,b'} c_{a',b})).
inline double c1_constant(const AngleField& ab, const AngleField& apbp) {
  AngleField abp{ab.alpha, apbp.beta}, apb{apbp.alpha, ab.beta};
  return std::sqrt(c_product(ab) * c_product(apbp) / (c_product(abp) * c_product(apb)));
}

/// c2 = (c_{a,b'} c_{a',b}) / (c_{a,b} c_{a',b'}).
inline double c2_constant(const AngleField& ab, const AngleField& apbp) {
  AngleField abp{ab.alpha, apbp.beta}, apb{apbp.alpha, ab.beta};
  return c_product(abp) * c_product(apb) / (c_product(ab) * c_product(apbp));
}

/// |c~| = prod_f 2 / |C_{alpha,beta}(f)|.
inline double ctilde_abs(const AngleField& a) {
  double c = 1;
  for (int f = 0; f < a.n_faces(); ++f) c *= 2.0 / std::abs(ff_face_weights(a.alpha[f], a.beta[f]).C);
  return c;
}

}  // namespace ffv8
