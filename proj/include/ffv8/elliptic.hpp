#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "ffv8/quad_graph.hpp"  // kPi

namespace ffv8 {

using cplx = std::complex<double>;

/// Jacobi elliptic functions and complete/incomplete elliptic integrals for
/// moduli k with k^2 in (-inf, 1). Complete integrals use the AGM; sn, cn,
/// dn are backed by theta-function series in the nome with argument
/// reduction, so they are accurate for complex arguments anywhere on the
/// torus C / (4K Z + 2iK' Z). Moduli with k^2 < 0 are routed through the
/// imaginary-modulus transformation to an equivalent modulus in (0,1).
class Elliptic {
 public:
  explicit Elliptic(double k2) : k2_(k2) {
    if (!(k2 < 1.0)) throw std::domain_error("elliptic modulus needs k^2 < 1");
    if (k2 >= 0.0) {
      init_real(std::sqrt(k2));
    } else {
      // k = i kappa: sn(z|k) = k1' sd(z/k1'|k1), cn = cd, dn = nd,
      // with k1 = kappa/sqrt(1+kappa^2), k1' = 1/sqrt(1+kappa^2).
      double s = -k2;
      imag_scale_ = 1.0 / std::sqrt(1.0 + s);
      init_real(std::sqrt(s / (1.0 + s)));
    }
  }

  double k2() const { return k2_; }
  /// Complementary modulus k' = sqrt(1-k^2), real positive for all k^2 < 1.
  double kprime() const { return std::sqrt(1.0 - k2_); }

  double K() const { return (k2_ >= 0) ? bigK_ : imag_scale_ * bigK_; }
  double Kprime() const {
    require_real("K'");
    return bigKp_;
  }
  double nome() const {
    require_real("nome");
    return q_;
  }
  /// Imaginary period ratio of the torus T(k) = C/(2pi Z + 2i pi (K'/K) Z).
  double tau_im() const {
    require_real("tau");
    return bigKp_ / bigK_;
  }

  /// theta_k = (2K/pi) theta.
  double scale(double theta) const { return 2.0 * K() / kPi * theta; }

  cplx sn(cplx u) const {
    if (k2_ >= 0) return sn_real(u);
    auto [s, c, d] = scd_real(u / imag_scale_);
    return imag_scale_ * s / d;
  }
  cplx cn(cplx u) const {
    if (k2_ >= 0) return cn_real(u);
    auto [s, c, d] = scd_real(u / imag_scale_);
    return c / d;
  }
  cplx dn(cplx u) const {
    if (k2_ >= 0) return dn_real(u);
    auto [s, c, d] = scd_real(u / imag_scale_);
    return 1.0 / d;
  }

  cplx sc(cplx u) const { return ratio(sn(u), cn(u)); }
  cplx nc(cplx u) const { return ratio(1.0, cn(u)); }
  cplx dc(cplx u) const { return ratio(dn(u), cn(u)); }
  cplx nd(cplx u) const { return ratio(1.0, dn(u)); }
  cplx sd(cplx u) const { return ratio(sn(u), dn(u)); }
  cplx cd(cplx u) const { return ratio(cn(u), dn(u)); }

  /// Jacobi amplitude for real argument; continuous and increasing, with
  /// am(0) = 0, am(K) = pi/2, am(u + 2K) = am(u) + pi.
  double am(double u) const {
    double Kr = K();
    double n = std::round(u / (2 * Kr));
    double ur = u - 2 * n * Kr;
    double s = std::clamp(sn(cplx(ur, 0)).real(), -1.0, 1.0);
    return n * kPi + std::asin(s);
  }

  static double complete_K(double k2) { return Elliptic(k2).K(); }
  static double complete_E(double k2) {
    if (!(k2 < 1.0)) throw std::domain_error("elliptic modulus needs k^2 < 1");
    if (k2 >= 0) return agm_E(std::sqrt(k2));
    double s = -k2;
    return agm_E(std::sqrt(s / (1 + s))) * std::sqrt(1 + s);
  }

  /// Incomplete elliptic integral of the second kind in Jacobi form,
  /// E(v,k) = int_0^v dn^2(t|k) dt, by panel quadrature (real v).
  double incomplete_E(double v) const {
    auto f = [&](double t) {
      cplx d = dn(cplx(t, 0));
      return (d * d).real();
    };
    // 16-point Gauss-Legendre panels, doubled until stable.
    static const double gx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                 0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double gw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                 0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    double prev = 0;
    for (int panels = 1; panels <= 4096; panels *= 2) {
      double acc = 0;
      double h = v / panels;
      for (int p = 0; p < panels; ++p) {
        double mid = (p + 0.5) * h, half = h / 2;
        for (int i = 0; i < 8; ++i)
          acc += half * gw[i] * (f(mid + half * gx[i]) + f(mid - half * gx[i]));
      }
      if (panels > 1 && std::abs(acc - prev) <= 1e-13 * (1 + std::abs(acc))) return acc;
      prev = acc;
    }
    return prev;
  }

 private:
  void require_real(const char* what) const {
    if (k2_ < 0)
      throw std::domain_error(std::string(what) + " undefined for k^2 < 0 in this context");
  }

  void init_real(double k) {
    k_ = k;
    double kp = std::sqrt(1.0 - k * k);
    bigK_ = agm_K(k);
    bigKp_ = (k == 0.0) ? std::numeric_limits<double>::infinity() : agm_K(kp);
    q_ = (k == 0.0) ? 0.0 : std::exp(-kPi * bigKp_ / bigK_);
    if (q_ > 0) {
      th2_ = theta2_zero();
      th3_ = theta3_zero();
      th4_ = theta4_zero();
      // Internal consistency of the nome expansion.
      double kk = (th2_ * th2_) / (th3_ * th3_);
      if (std::abs(kk * kk - k * k) > 1e-12 * std::max(1.0, k * k))
        throw std::runtime_error("theta constants inconsistent with modulus");
    }
  }

  static double agm_K(double k) {
    if (!(k >= 0 && k < 1)) throw std::domain_error("agm_K needs k in [0,1)");
    double a = 1.0, b = std::sqrt(1.0 - k * k);
    for (int it = 0; it < 64 && std::abs(a - b) > 4e-16 * a; ++it) {
      double an = (a + b) / 2;
      b = std::sqrt(a * b);
      a = an;
    }
    return kPi / (2 * a);
  }

  static double agm_E(double k) {
    double a = 1.0, b = std::sqrt(1.0 - k * k), c = k;
    double sum = c * c / 2, pow2 = 1.0;
    for (int it = 0; it < 64 && std::abs(c) > 4e-17; ++it) {
      double an = (a + b) / 2;
      c = (a - b) / 2;
      b = std::sqrt(a * b);
      a = an;
      pow2 *= 2;
      sum += pow2 * c * c / 2;
    }
    return kPi / (2 * a) * (1.0 - sum);
  }

  static cplx ratio(cplx num, cplx den) {
    if (std::abs(den) < 1e-8)
      throw std::domain_error("jacobi ratio evaluated too close to a pole");
    return num / den;
  }

  double theta2_zero() const {
    double acc = 0;
    for (int j = 0;; ++j) {
      double t = std::pow(q_, (j + 0.5) * (j + 0.5));
      acc += t;
      if (t < 1e-18 * (1 + std::abs(acc))) break;
    }
    return 2 * acc;
  }
  double theta3_zero() const {
    double acc = 1;
    for (int j = 1;; ++j) {
      double t = std::pow(q_, double(j) * j);
      acc += 2 * t;
      if (t < 1e-18) break;
    }
    return acc;
  }
  double theta4_zero() const {
    double acc = 1;
    double sign = -1;
    for (int j = 1;; ++j) {
      double t = std::pow(q_, double(j) * j);
      acc += 2 * sign * t;
      sign = -sign;
      if (t < 1e-18) break;
    }
    return acc;
  }

  cplx theta1(cplx z) const {
    cplx acc = 0;
    double sign = 1;
    for (int j = 0; j < 64; ++j) {
      double c = std::pow(q_, (j + 0.5) * (j + 0.5));
      cplx t = sign * c * std::sin(double(2 * j + 1) * z);
      acc += t;
      if (c * std::exp((2.0 * j + 1) * std::abs(z.imag())) < 1e-18 * (1 + std::abs(acc))) break;
      sign = -sign;
    }
    return 2.0 * acc;
  }
  cplx theta2(cplx z) const {
    cplx acc = 0;
    for (int j = 0; j < 64; ++j) {
      double c = std::pow(q_, (j + 0.5) * (j + 0.5));
      acc += c * std::cos(double(2 * j + 1) * z);
      if (c * std::exp((2.0 * j + 1) * std::abs(z.imag())) < 1e-18 * (1 + std::abs(acc))) break;
    }
    return 2.0 * acc;
  }
  cplx theta3(cplx z) const {
    cplx acc = 1;
    for (int j = 1; j < 64; ++j) {
      double c = std::pow(q_, double(j) * j);
      acc += 2.0 * c * std::cos(double(2 * j) * z);
      if (c * std::exp(2.0 * j * std::abs(z.imag())) < 1e-18 * (1 + std::abs(acc))) break;
    }
    return acc;
  }
  cplx theta4(cplx z) const {
    cplx acc = 1;
    double sign = -1;
    for (int j = 1; j < 64; ++j) {
      double c = std::pow(q_, double(j) * j);
      acc += 2.0 * sign * c * std::cos(double(2 * j) * z);
      sign = -sign;
      if (c * std::exp(2.0 * j * std::abs(z.imag())) < 1e-18 * (1 + std::abs(acc))) break;
    }
    return acc;
  }

  /// sn, cn, dn at the internal (real, in [0,1)) modulus via theta ratios
  /// with argument reduction into the fundamental cell.
  std::array<cplx, 3> scd_real(cplx u) const {
    if (k_ == 0.0) return {std::sin(u), std::cos(u), cplx(1, 0)};
    cplx v = kPi * u / (2 * bigK_);
    double ti = kPi * bigKp_ / bigK_;
    long m = std::lround(v.real() / kPi);
    long n = std::lround(v.imag() / ti);
    cplx v0 = v - double(m) * kPi - cplx(0, double(n) * ti);
    double sm = (m % 2 == 0) ? 1 : -1;
    double sn_ = (n % 2 == 0) ? 1 : -1;
    cplx t1 = theta1(v0), t2 = theta2(v0), t3 = theta3(v0), t4 = theta4(v0);
    cplx s = sm * (th3_ / th2_) * t1 / t4;
    cplx c = sm * sn_ * (th4_ / th2_) * t2 / t4;
    cplx d = sn_ * (th4_ / th3_) * t3 / t4;
    return {s, c, d};
  }
  cplx sn_real(cplx u) const { return scd_real(u)[0]; }
  cplx cn_real(cplx u) const { return scd_real(u)[1]; }
  cplx dn_real(cplx u) const { return scd_real(u)[2]; }

  double k2_ = 0, k_ = 0;
  double bigK_ = 0, bigKp_ = 0, q_ = 0;
  double th2_ = 0, th3_ = 0, th4_ = 0;
  double imag_scale_ = 1.0;  // k1' of the imaginary-modulus transformation
};

// ---------------------------------------------------------------------------
// Decay-rate building blocks: g and its k-derivative.
// ---------------------------------------------------------------------------

/// g(u,k) = log( sqrt(k') nd( (u/2)_k | k ) ) for u in [-pi, pi], k in (0,1).
inline double g_fn(double u, const Elliptic& ell) {
  double v = ell.K() / kPi * u;  // (u/2)_k
  double nd = ell.nd(cplx(v, 0)).real();
  return std::log(std::sqrt(ell.kprime()) * nd);
}

/// dg/dk in closed form,
///   dg/dk = -k/(2k'^2) + (k/k'^2) [ (v/K)E(k) - E(v,k) + (sn dn / cn)(v) ]
///           * (sn cn / dn)(v),    v = (u/2)_k,
/// valid on |u| <= pi/2 and extended to (pi/2, pi] by the exact symmetry
/// g(pi - u, k) = -g(u, k).
inline double dg_dk(double u, const Elliptic& ell) {
  double au = std::abs(u);
  if (au > kPi + 1e-12) throw std::domain_error("dg_dk: u outside [-pi, pi]");
  if (au > kPi / 2) return -dg_dk(kPi - au, ell);
  double k = std::sqrt(ell.k2());
  double kp2 = 1 - ell.k2();
  double v = ell.K() / kPi * au;
  double E = Elliptic::complete_E(ell.k2());
  double Ev = ell.incomplete_E(v);
  double s = ell.sn(cplx(v, 0)).real();
  double c = ell.cn(cplx(v, 0)).real();
  double d = ell.dn(cplx(v, 0)).real();
  return -k / (2 * kp2) + (k / kp2) * (v / ell.K() * E - Ev + s * d / c) * (s * c / d);
}

}  // namespace ffv8
