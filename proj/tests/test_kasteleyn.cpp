#include "ffv8/kasteleyn.hpp"

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

DecoratedGraph decorated(const Quadrangulation& q) { return build_decorated_graph(q, corner_angles(q)); }

/// All perfect matchings of G^T (edge-id lists), by recursion on the lowest
/// unmatched vertex. Exponential; only for desk-scale oracles.
void enumerate_matchings(const DecoratedGraph& gt, const std::function<void(const std::vector<int>&)>& cb) {
  int n = gt.n_vertices();
  std::vector<char> matched(n, 0);
  std::vector<int> chosen;
  std::function<void(int)> rec = [&](int v0) {
    while (v0 < n && matched[v0]) ++v0;
    if (v0 == n) {
      cb(chosen);
      return;
    }
    for (int ei : gt.vertex_edges[v0]) {
      const auto& e = gt.edges[ei];
      int other = (e.u == v0) ? e.v : e.u;
      if (matched[other]) continue;
      matched[v0] = matched[other] = 1;
      chosen.push_back(ei);
      rec(v0 + 1);
      chosen.pop_back();
      matched[v0] = matched[other] = 0;
    }
  };
  rec(0);
}

/// Dimer weight nu of an edge for the given 8V weights.
double nu_weight(const DecoratedGraph& gt, const WeightField& x, int ei) {
  const auto& e = gt.edges[ei];
  switch (e.kind) {
    case DecoratedGraph::EdgeKind::Leg: return 1.0;
    case DecoratedGraph::EdgeKind::SideA: return x[e.face].A / x[e.face].C;
    case DecoratedGraph::EdgeKind::SideB: return x[e.face].B / x[e.face].C;
    case DecoratedGraph::EdgeKind::Diagonal: return x[e.face].D / x[e.face].C;
  }
  return 0;
}

/// Signed matching weight (-1)^{N(m)} prod nu, where N(m) counts decorations
/// whose two diagonals are both occupied (the only crossing pairs).
double matching_weight(const DecoratedGraph& gt, const WeightField& x, const std::vector<int>& m) {
  double w = 1;
  std::map<int, int> diag_count;
  for (int ei : m) {
    w *= nu_weight(gt, x, ei);
    if (gt.edges[ei].kind == DecoratedGraph::EdgeKind::Diagonal) diag_count[gt.edges[ei].face]++;
  }
  int crossings = 0;
  for (auto& [f, c] : diag_count)
    if (c == 2) ++crossings;
  return (crossings % 2 ? -1.0 : 1.0) * w;
}

}  // namespace

TEST_CASE("decorated graph counts and leg structure") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  REQUIRE(gt.n_vertices() == 24);
  int legs = 0;
  for (auto& e : gt.edges)
    if (e.kind == DecoratedGraph::EdgeKind::Leg) {
      ++legs;
      REQUIRE(e.primal_edge >= 0);
      REQUIRE(gt.is_black(e.v));
      REQUIRE(!gt.is_black(e.u));
    }
  REQUIRE(legs == q.n_edges());
  for (int x = 0; x < gt.n_vertices(); ++x) REQUIRE(gt.leg_partner[x] >= 0);

  auto t = decorated(build_square_torus(2, 2));
  REQUIRE(t.n_vertices() == 16);
}

TEST_CASE("admissible orientations verify on sphere and tori") {
  REQUIRE(orientation_is_admissible(decorated(build_cube_sphere())));
  REQUIRE(orientation_is_admissible(decorated(build_square_torus(2, 2))));
  REQUIRE(orientation_is_admissible(decorated(build_square_torus(4, 2))));
  REQUIRE(orientation_is_admissible(decorated(build_square_torus(4, 4))));
}

TEST_CASE("matrix flavors have the right symmetry") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  std::mt19937_64 rng(7);
  auto x = ff_weights(random_angles(q, rng));
  Mat Kt = assemble_K(gt, x, KFlavor::SkewSymmetric);
  REQUIRE((Kt + Kt.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE(Kt.imag().cwiseAbs().maxCoeff() == 0.0);
  Mat K = assemble_K(gt, x, KFlavor::SkewHermitian);
  REQUIRE((K + K.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("entry arguments around vertices and inside decorations") {
  for (auto q : {build_cube_sphere(), build_square_torus(4, 4)}) {
    auto gt = decorated(q);
    std::mt19937_64 rng(11);
    // alpha < beta keeps all four weights positive, so triangle products are
    // negative real rather than merely real.
    std::uniform_real_distribution<double> u(0.3, 1.2);
    AngleField a;
    for (int f = 0; f < q.n_faces(); ++f) {
      double x1 = u(rng), x2 = u(rng);
      a.alpha.push_back(std::min(x1, x2) - 0.05);
      a.beta.push_back(std::max(x1, x2) + 0.05);
    }
    auto x = ff_weights(a);
    Mat K = assemble_K(gt, x, KFlavor::SkewHermitian);
    // Around every primal vertex, the product of entries along the vertex
    // face of G^T is a negative real number (arguments sum to pi mod 2pi).
    for (auto& cyc : gt.faces_no_black_diag) {
      if (cyc.size() == 3) continue;  // decoration triangles handled below
      cplx prod = 1;
      for (size_t i = 0; i < cyc.size(); ++i) prod *= K(cyc[i], cyc[(i + 1) % cyc.size()]);
      REQUIRE(std::abs(prod.imag()) < 1e-10 * std::abs(prod));
      REQUIRE(prod.real() < 0);
    }
    // Triangles using two sides and a diagonal: product real negative.
    for (auto& faces : {gt.faces_no_black_diag, gt.faces_no_white_diag})
      for (auto& cyc : faces) {
        if (cyc.size() != 3) continue;
        cplx prod = K(cyc[0], cyc[1]) * K(cyc[1], cyc[2]) * K(cyc[2], cyc[0]);
        REQUIRE(std::abs(prod.imag()) < 1e-10 * std::abs(prod));
        REQUIRE(prod.real() < 0);
      }
  }
}

TEST_CASE("pfaffian squared equals determinant for the assembled matrix") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  std::mt19937_64 rng(13);
  auto x = ff_weights(random_angles(q, rng));
  Mat Kt = assemble_K(gt, x, KFlavor::SkewSymmetric);
  RMat Ktr = Kt.real();
  double pf = pfaffian_real(Ktr);
  REQUIRE(pf * pf == Catch::Approx(Ktr.determinant()).epsilon(1e-8));
}

TEST_CASE("gauge conjugation between the two flavors") {
  for (auto q : {build_cube_sphere(), build_square_torus(2, 2)}) {
    auto gt = decorated(q);
    std::mt19937_64 rng(17);
    Vec d_first;
    for (int t = 0; t < 5; ++t) {
      auto x = ff_weights(random_angles(q, rng));
      Mat Kt = assemble_K(gt, x, KFlavor::SkewSymmetric);
      Mat K = assemble_K(gt, x, KFlavor::SkewHermitian);
      Vec d = gauge_conjugation(gt, Kt, K);
      // unitary: all moduli equal (to |d(0)| = 1)
      for (int i = 0; i < d.size(); ++i) REQUIRE(std::abs(d(i)) == Catch::Approx(1.0).epsilon(1e-10));
      Mat lhs = K;
      Mat rhs = d.asDiagonal().inverse() * Kt * Mat(d.asDiagonal());
      REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
      if (t == 0)
        d_first = d;
      else
        REQUIRE((d - d_first).cwiseAbs().maxCoeff() < 1e-10);  // independent of angles
    }
  }
}

TEST_CASE("dimer mapping is weight preserving, configuration by configuration") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  BruteForce bf(q);
  std::mt19937_64 rng(19);
  auto x = ff_weights(random_angles(q, rng, 0.1, 1.4));

  double pc = 1;
  for (int f = 0; f < q.n_faces(); ++f) pc *= x[f].C;

  // Map dual-edge index -> primal edge id, to read a matching's leg set as a
  // configuration mask.
  std::vector<int> dual_primal;
  for (int e = 0; e < q.n_edges(); ++e)
    if (q.edge_left_face[e] >= 0 && q.edge_right_face[e] >= 0) dual_primal.push_back(e);
  std::map<int, int> primal_to_dual;
  for (size_t d = 0; d < dual_primal.size(); ++d) primal_to_dual[dual_primal[d]] = int(d);

  std::map<std::uint64_t, double> per_config;
  enumerate_matchings(gt, [&](const std::vector<int>& m) {
    std::uint64_t mask = 0;
    for (int ei : m)
      if (gt.edges[ei].kind == DecoratedGraph::EdgeKind::Leg)
        mask |= std::uint64_t(1) << primal_to_dual.at(gt.edges[ei].primal_edge);
    per_config[mask] += matching_weight(gt, x, m);
  });
  // Every configuration is reached and carries the right weight.
  REQUIRE(per_config.size() == bf.configs().size());
  for (auto m : bf.configs()) {
    REQUIRE(per_config.count(m) == 1);
    REQUIRE(pc * per_config[m] == Catch::Approx(bf.config_weight(x, m)).epsilon(1e-10));
  }
}

TEST_CASE("sphere partition function matches brute force") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  BruteForce bf(q);
  std::mt19937_64 rng(23);

  AngleField flat = AngleField::constant(q.n_faces(), kPi / 4, kPi / 4);
  REQUIRE(sphere_partition(gt, ff_weights(flat)) ==
          Catch::Approx(bf.partition_fn(ff_weights(flat))).epsilon(1e-10));

  for (int t = 0; t < 20; ++t) {
    auto x = ff_weights(random_angles(q, rng));
    REQUIRE(sphere_partition(gt, x) == Catch::Approx(bf.partition_fn(x)).epsilon(1e-10));
  }
  WeightField bad;
  bad.w.assign(q.n_faces(), FaceWeights{1, 1, 0, std::sqrt(2.0)});
  REQUIRE_THROWS_AS(sphere_partition(gt, bad), std::invalid_argument);
}

TEST_CASE("torus sectors: homology-signed matching sums match the pfaffians") {
  auto q = build_square_torus(2, 2);
  auto gt = decorated(q);
  std::mt19937_64 rng(29);
  auto x = ff_weights(random_angles(q, rng));

  // Matching sums per homology class of m (windings of the wrap cocycle).
  std::array<double, 4> class_sum = {0, 0, 0, 0};
  enumerate_matchings(gt, [&](const std::vector<int>& m) {
    int hx = 0, hy = 0;
    for (int ei : m) {
      hx += gt.edges[ei].wrap_x;
      hy += gt.edges[ei].wrap_y;
    }
    class_sum[2 * (((hx % 2) + 2) % 2) + (((hy % 2) + 2) % 2)] += matching_weight(gt, x, m);
  });
  auto pf = torus_pfaffians(gt, x);
  for (int theta = 0; theta < 2; ++theta)
    for (int tau = 0; tau < 2; ++tau) {
      double s = 0;
      for (int hx = 0; hx < 2; ++hx)
        for (int hy = 0; hy < 2; ++hy) {
          int sign_exp = hx * hy + hx + hy + theta * hx + tau * hy;
          s += (sign_exp % 2 ? -1.0 : 1.0) * class_sum[2 * hx + hy];
        }
      // Pfaffian equals the signed sum up to a per-sector global sign.
      REQUIRE(std::abs(pf[2 * theta + tau]) == Catch::Approx(std::abs(s)).epsilon(1e-9));
    }
}

TEST_CASE("torus sign calibration is stable across sizes") {
  std::mt19937_64 rng(31);
  TorusSectorSigns def{};
  for (auto [m, n] : {std::pair{2, 2}, {2, 4}, {4, 2}, {4, 4}}) {
    auto q = build_square_torus(m, n);
    auto gt = decorated(q);
    BruteForce bf(q);
    std::vector<WeightField> fields;
    std::vector<double> zs;
    for (int t = 0; t < 3; ++t) {
      fields.push_back(ff_weights(random_angles(q, rng)));
      zs.push_back(bf.partition_fn(fields.back()));
    }
    auto signs = calibrate_torus_signs(gt, fields, zs);
    for (int i = 0; i < 4; ++i) REQUIRE(signs.c[i] == def.c[i]);
  }
}

TEST_CASE("torus partition function matches brute force on 2x2") {
  auto q = build_square_torus(2, 2);
  auto gt = decorated(q);
  BruteForce bf(q);
  std::mt19937_64 rng(37);
  for (int t = 0; t < 20; ++t) {
    auto x = ff_weights(random_angles(q, rng));
    double zb = bf.partition_fn(x);
    REQUIRE(torus_partition(gt, x) == Catch::Approx(zb).epsilon(1e-9));
  }
  // six-vertex specialization
  auto a6 = random_angles(q, rng);
  a6.beta = a6.alpha;
  auto x6 = ff_weights(a6);
  REQUIRE(torus_partition(gt, x6) == Catch::Approx(bf.partition_fn(x6)).epsilon(1e-9));
}

TEST_CASE("T and D: involutions and the leg part of K") {
  auto q = build_square_torus(2, 2);
  auto gt = decorated(q);
  std::mt19937_64 rng(41);
  auto x = ff_weights(random_angles(q, rng));
  Mat T = t_matrix(gt);
  Mat D = d_matrix(gt);
  int n = gt.n_vertices();
  REQUIRE((T * T - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-14);
  REQUIRE((D * D - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-14);
  // TD equals the leg-only part of K.
  Mat K = assemble_K(gt, x, KFlavor::SkewHermitian);
  Mat legs = Mat::Zero(n, n);
  for (auto& e : gt.edges)
    if (e.kind == DecoratedGraph::EdgeKind::Leg) {
      legs(e.u, e.v) = K(e.u, e.v);
      legs(e.v, e.u) = K(e.v, e.u);
    }
  REQUIRE(((T * D) - legs).cwiseAbs().maxCoeff() < 1e-13);

  // with twists
  cplx z(0.7, 0.2), w(1.3, 0.0);
  Mat Tz = t_matrix(gt, z, w);
  REQUIRE((Tz * Tz - Mat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("commutator of K(z,w) with T") {
  auto q = build_square_torus(2, 2);
  auto gt = decorated(q);
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1, 1);
  auto x = ff_weights(random_angles(q, rng));
  Mat D = d_matrix(gt);
  for (int t = 0; t < 20; ++t) {
    cplx z = std::polar(std::exp(u(rng) * 0.6), u(rng) * kPi);
    cplx w = std::polar(std::exp(u(rng) * 0.6), u(rng) * kPi);
    Mat K = assemble_K(gt, x, KFlavor::SkewHermitian, z, w);
    Mat T = t_matrix(gt, z, w);
    Mat lhs = K * T - T * K;
    Mat rhs = -K * D * K;
    REQUIRE((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
    // and for the inverse, [K^{-1}, T] = D when K is invertible.
    if (std::abs(K.determinant()) > 1e-8) {
      Mat Kinv = K.partialPivLu().solve(Mat::Identity(K.rows(), K.cols()));
      Mat c2 = Kinv * T - T * Kinv;
      REQUIRE((c2 - D).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("inverse switching on the sphere") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  std::mt19937_64 rng(47);
  int n = gt.n_vertices();
  Mat I = Mat::Identity(n, n);

  auto ab = random_angles(q, rng);
  // identity quadruple reduces to the plain inverse
  Mat M0 = inverse_switch(gt, ab, ab);
  Mat K0 = assemble_K(gt, ff_weights(ab), KFlavor::SkewHermitian);
  REQUIRE((K0 * M0 - I).cwiseAbs().maxCoeff() < 1e-11);

  for (int t = 0; t < 5; ++t) {
    auto a1 = random_angles(q, rng), a2 = random_angles(q, rng);
    Mat M = inverse_switch(gt, a1, a2);
    Mat K = assemble_K(gt, ff_weights(a1), KFlavor::SkewHermitian);
    REQUIRE((K * M - I).cwiseAbs().maxCoeff() < 1e-10);
    // and the second relation of the pair
    Mat M2 = inverse_switch(gt, a2, a1);
    Mat K2 = assemble_K(gt, ff_weights(a2), KFlavor::SkewHermitian);
    REQUIRE((K2 * M2 - I).cwiseAbs().maxCoeff() < 1e-10);
  }

  // eight-vertex inverse from two six-vertex inverses
  auto a = random_angles(q, rng);
  AngleField ba{a.beta, a.alpha};
  Mat M6 = inverse_switch(gt, a, ba);
  Mat K8 = assemble_K(gt, ff_weights(a), KFlavor::SkewHermitian);
  REQUIRE((K8 * M6 - I).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("edge probabilities on the sphere match brute-force marginals") {
  auto q = build_cube_sphere();
  auto gt = decorated(q);
  BruteForce bf(q);
  std::mt19937_64 rng(53);
  // probability regime: alpha <= beta
  AngleField a;
  std::uniform_real_distribution<double> u(0.1, kPi / 2 - 0.1);
  for (int f = 0; f < q.n_faces(); ++f) {
    double x1 = u(rng), x2 = u(rng);
    a.alpha.push_back(std::min(x1, x2));
    a.beta.push_back(std::max(x1, x2));
  }
  auto x = ff_weights(a);
  REQUIRE(edge_probability_sphere(gt, x, {}) == 1.0);
  for (int e : {0, 3, 7}) {
    double p = edge_probability_sphere(gt, x, {e});
    REQUIRE(p == Catch::Approx(bf.edge_marginal(x, {e})).epsilon(1e-9));
  }
  // two edges sharing a face
  int e1 = q.faces[0].edge[0], e2 = q.faces[0].edge[1];
  double p2 = edge_probability_sphere(gt, x, {e1, e2});
  REQUIRE(p2 == Catch::Approx(bf.edge_marginal(x, {e1, e2})).epsilon(1e-8));
}
