#include "ffv8/torus_spectral.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "ffv8/brute_force.hpp"

using namespace ffv8;

namespace {

AngleField random_angles(const Quadrangulation& q, std::mt19937_64& rng, double lo = 0.05,
                         double hi = kPi / 2 - 0.05) {
  std::uniform_real_distribution<double> u(lo, hi);
  AngleField a;
  for (int f = 0; f < q.n_faces(); ++f) {
    a.alpha.push_back(u(rng));
    a.beta.push_back(u(rng));
  }
  return a;
}

std::vector<std::pair<cplx, cplx>> random_samples(std::mt19937_64& rng, int n, double rlo = 0.5,
                                                  double rhi = 2.0) {
  std::uniform_real_distribution<double> mod(std::log(rlo), std::log(rhi));
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  std::vector<std::pair<cplx, cplx>> s;
  for (int i = 0; i < n; ++i)
    s.push_back({std::polar(std::exp(mod(rng)), ph(rng)), std::polar(std::exp(mod(rng)), ph(rng))});
  return s;
}

}  // namespace

TEST_CASE("both flavors have the same determinant at twisted arguments") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(3);
  auto x = ff_weights(random_angles(q, rng));
  for (auto& [z, w] : random_samples(rng, 10)) {
    cplx d1 = assemble_K(gt, x, KFlavor::SkewSymmetric, z, w).determinant();
    cplx d2 = assemble_K(gt, x, KFlavor::SkewHermitian, z, w).determinant();
    REQUIRE(std::abs(d1 - d2) < 1e-9 * std::max(1.0, std::abs(d1)));
  }
}

TEST_CASE("characteristic polynomial at (1,1) is the square of the untwisted pfaffian") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(5);
  auto a = random_angles(q, rng);
  SpectralSampler s(gt, ff_weights(a));
  auto pf = torus_pfaffians(gt, ff_weights(a));
  cplx p = s.det_eval(1.0, 1.0);
  REQUIRE(std::abs(p.imag()) < 1e-9 * std::max(1.0, std::abs(p)));
  REQUIRE(p.real() == Catch::Approx(pf[0] * pf[0]).epsilon(1e-8));
}

TEST_CASE("coefficient cache and w-roots") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(7);
  auto a = random_angles(q, rng);
  SpectralSampler s(gt, ff_weights(a));  // constructor validates the cache
  for (auto& [z, wdummy] : random_samples(rng, 3)) {
    (void)wdummy;
    for (cplx w : s.w_roots(z)) {
      REQUIRE(std::abs(s.poly_eval(z, w)) < 1e-7 * std::max(1.0, std::abs(s.poly_eval(z, 1.3 * w))));
    }
  }
}

TEST_CASE("six-vertex factor: inversion symmetry and the squared relation") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(11);
  auto a = random_angles(q, rng);
  for (auto& [z, w] : random_samples(rng, 8)) {
    cplx p1 = p6v_eval(gt, a, z, w);
    cplx p2 = p6v_eval(gt, a, 1.0 / z, 1.0 / w);
    REQUIRE(std::abs(p1 - p2) < 1e-9 * std::max(1.0, std::abs(p1)));
    // P^{8V}_{alpha,alpha} = c3 (P^{6V}_alpha)^2 with |c3| = 1
    AngleField aa{a.alpha, a.alpha};
    double p8 = std::abs(assemble_K(gt, ff_weights(aa), KFlavor::SkewHermitian, z, w).determinant());
    REQUIRE(p8 == Catch::Approx(std::abs(p1) * std::abs(p1)).epsilon(1e-8));
  }
  // at alpha = beta the diagonals vanish and the matrix is block bipartite
  AngleField aa{a.alpha, a.alpha};
  Mat K = assemble_K(gt, ff_weights(aa), KFlavor::SkewHermitian, cplx(0.8, 0.4), cplx(1.3, -0.2));
  double cross = 0;
  for (int i = 0; i < gt.n_vertices(); ++i)
    for (int j = 0; j < gt.n_vertices(); ++j)
      if (gt.is_black(i) == gt.is_black(j)) cross = std::max(cross, std::abs(K(i, j)));
  REQUIRE(cross == 0.0);
}

TEST_CASE("polynomial switching identity") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(13);
  auto ab = random_angles(q, rng);
  // identity quadruple: c2 = 1 and the residual vanishes
  auto rep0 = poly_switch_check(gt, ab, ab, random_samples(rng, 10));
  REQUIRE(rep0.c2 == Catch::Approx(1.0).epsilon(1e-12));
  REQUIRE(rep0.max_residual < 1e-12);

  auto apbp = random_angles(q, rng);
  auto rep = poly_switch_check(gt, ab, apbp, random_samples(rng, 100));
  REQUIRE(rep.max_residual < 1e-8);
}

TEST_CASE("factorization into two six-vertex polynomials") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(17);
  auto ab = random_angles(q, rng);
  auto rep = factorization_check(gt, ab, random_samples(rng, 40));
  REQUIRE(rep.fitted_ctilde == Catch::Approx(rep.expected_ctilde).epsilon(1e-8));
  REQUIRE(rep.max_residual < 1e-8);
}

TEST_CASE("free energy: gauge covariance and quadrature stability") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  AngleField a = AngleField::constant(q.n_faces(), 0.5, 0.9);
  SpectralSampler s(gt, ff_weights(a));
  auto rep = free_energy(s);
  REQUIRE(rep.converged);

  double lam = 1.7;
  SpectralSampler s2(gt, gauge(ff_weights(a), [&](int) { return lam; }));
  auto rep2 = free_energy(s2);
  REQUIRE(rep2.value == Catch::Approx(rep.value - q.n_faces() * std::log(lam)).margin(1e-6));
}

TEST_CASE("free energy approximates the toric exhaustion") {
  AngleField a1 = AngleField::constant(4, 0.5, 0.9);
  auto q1 = build_square_torus(2, 2);
  auto gt1 = build_decorated_graph(q1, corner_angles(q1));
  SpectralSampler s(gt1, ff_weights(a1));
  auto rep = free_energy(s, 1e-8);

  // In the massive phase Z_n = 2 e^{-n^2 F}(1 + o(1)): the two-pure-state
  // degeneracy contributes exactly log 2, and the four-sector combination
  // cancels the slow per-sector corrections.
  std::vector<double> diffs, corrected;
  for (int nn = 1; nn <= 3; ++nn) {
    auto qn = build_square_torus(2 * nn, 2 * nn);
    auto gtn = build_decorated_graph(qn, corner_angles(qn));
    AngleField an = AngleField::constant(qn.n_faces(), 0.5, 0.9);
    double z = torus_partition(gtn, ff_weights(an));
    diffs.push_back(std::abs(-std::log(z) / double(nn * nn) - rep.value));
    corrected.push_back(std::abs(-(std::log(z) - std::log(2.0)) / double(nn * nn) - rep.value));
  }
  REQUIRE(diffs[1] < diffs[0]);
  REQUIRE(diffs[2] < diffs[1]);
  REQUIRE(corrected[2] < 1e-3);
}

TEST_CASE("amoeba: the 8V cloud is the union of the two 6V clouds") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  AngleField ab = AngleField::constant(q.n_faces(), 0.45, 0.8);
  SpectralSampler s8(gt, ff_weights(ab));
  auto s6a = sampler_6v(gt, ab.alpha);
  auto s6b = sampler_6v(gt, ab.beta);

  auto cloud8 = amoeba_sample(s8, -1.5, 1.5, -1.5, 1.5, 21, 16, 0);
  auto cloud_a = amoeba_sample(s6a, -1.5, 1.5, -1.5, 1.5, 21, 16, 1);
  auto cloud_b = amoeba_sample(s6b, -1.5, 1.5, -1.5, 1.5, 21, 16, 2);
  REQUIRE(!cloud8.empty());
  REQUIRE(!cloud_a.empty());
  // every 8V amoeba point is near a 6V point of one of the factors
  for (auto& p : cloud8) {
    double best = 1e9;
    for (auto& c : cloud_a) if (std::abs(c.x - p.x) < 1e-9) best = std::min(best, std::abs(c.y - p.y));
    for (auto& c : cloud_b) if (std::abs(c.x - p.x) < 1e-9) best = std::min(best, std::abs(c.y - p.y));
    REQUIRE(best < 1e-5);
  }
  // central symmetry of the amoeba under (x,y) -> (-x,-y): resample at -x
  for (auto& p : cloud8) {
    auto mirror = amoeba_sample(s8, -p.x, -p.x, -1.5, 1.5, 1, 16, 0);
    double best = 1e9;
    for (auto& c : mirror) best = std::min(best, std::abs(c.y + p.y));
    REQUIRE(best < 1e-5);
  }
}

TEST_CASE("torus edge probabilities match brute force") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  BruteForce bf(q);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.1, kPi / 2 - 0.1);
  AngleField a;
  for (int f = 0; f < q.n_faces(); ++f) {
    double x1 = u(rng), x2 = u(rng);
    a.alpha.push_back(std::min(x1, x2));
    a.beta.push_back(std::max(x1, x2));
  }
  auto x = ff_weights(a);
  REQUIRE(edge_probability_torus(gt, x, {}) == 1.0);
  for (int e : {0, 2, 5}) {
    double p = edge_probability_torus(gt, x, {e});
    REQUIRE(p == Catch::Approx(bf.edge_marginal(x, {e})).epsilon(1e-9));
    // zero-field symmetry: single-edge marginals are exactly 1/2
    REQUIRE(p == Catch::Approx(0.5).epsilon(1e-9));
  }
  std::vector<int> all_edges;
  for (int e = 0; e < q.n_edges(); ++e) all_edges.push_back(e);
  double pall = edge_probability_torus(gt, x, all_edges);
  REQUIRE(pall == Catch::Approx(bf.edge_marginal(x, all_edges)).epsilon(1e-8));
}

TEST_CASE("torus inverse switching at twisted arguments") {
  auto q = build_square_torus(2, 2);
  auto gt = build_decorated_graph(q, corner_angles(q));
  std::mt19937_64 rng(29);
  int n = gt.n_vertices();
  Mat I = Mat::Identity(n, n);
  auto ab = random_angles(q, rng), apbp = random_angles(q, rng);
  for (auto& [z, w] : random_samples(rng, 5)) {
    auto [M1, M2] = torus_inverse_switch(gt, ab, apbp, z, w);
    Mat K1 = assemble_K(gt, ff_weights(ab), KFlavor::SkewHermitian, z, w);
    Mat K2 = assemble_K(gt, ff_weights(apbp), KFlavor::SkewHermitian, z, w);
    REQUIRE((K1 * M1 - I).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE((K2 * M2 - I).cwiseAbs().maxCoeff() < 1e-10);
  }
  // identity quadruple at (1,1)
  auto [Ma, Mb] = torus_inverse_switch(gt, ab, ab, 1.0, 1.0);
  Mat K = assemble_K(gt, ff_weights(ab), KFlavor::SkewHermitian);
  REQUIRE((K * Ma - I).cwiseAbs().maxCoeff() < 1e-11);
  REQUIRE((K * Mb - I).cwiseAbs().maxCoeff() < 1e-11);
}
