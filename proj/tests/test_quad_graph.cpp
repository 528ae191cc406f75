#include "ffv8/quad_graph.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <set>

using namespace ffv8;

TEST_CASE("cube sphere counts and Euler relation") {
  auto q = build_cube_sphere();
  REQUIRE(q.n_vertices() == 8);
  REQUIRE(q.n_edges() == 12);
  REQUIRE(q.n_faces() == 6);
  REQUIRE(q.n_vertices() - q.n_edges() + q.n_faces() == 2);
  REQUIRE(validate(q).empty());
}

TEST_CASE("cube dual is the octahedron") {
  auto q = build_cube_sphere();
  auto d = q.dual_edges();
  REQUIRE(d.size() == 12);
  std::vector<int> deg(6, 0);
  std::set<std::pair<int, int>> uniq;
  for (auto& e : d) {
    ++deg[e[0]];
    ++deg[e[1]];
    uniq.insert({std::min(e[0], e[1]), std::max(e[0], e[1])});
  }
  for (int f = 0; f < 6; ++f) REQUIRE(deg[f] == 4);
  REQUIRE(uniq.size() == 12);  // simple: each face adjacent to 4 distinct faces
}

TEST_CASE("square torus counts") {
  auto q = build_square_torus(2, 2);
  REQUIRE(q.n_vertices() == 4);
  REQUIRE(q.n_edges() == 8);
  REQUIRE(q.n_faces() == 4);
  REQUIRE(validate(q).empty());

  auto q42 = build_square_torus(4, 2);
  REQUIRE(q42.n_faces() == 8);
  REQUIRE(validate(q42).empty());

  REQUIRE_THROWS_AS(build_square_torus(3, 2), std::invalid_argument);
}

TEST_CASE("validate flags broken instances") {
  auto q = build_cube_sphere();
  q.edges.pop_back();
  q.edge_left_face.clear();
  q.build_errors.clear();
  q.finalize();
  auto rep = validate(q);
  REQUIRE(!rep.empty());

  auto t = build_square_torus(2, 2);
  t.gamma_x = {t.gamma_x[0]};  // single vertex cannot wind
  auto rep2 = validate(t);
  REQUIRE(!rep2.empty());
}

TEST_CASE("square lozenge patch has theta = pi/4") {
  LozengeSpec spec{{0.0, kPi / 2}, 3};
  auto q = build_lozenge_patch(spec);
  REQUIRE(q.n_faces() == 9);
  REQUIRE(validate(q).empty());
  for (double t : q.theta) REQUIRE(t == Catch::Approx(kPi / 4).margin(1e-12));
}

TEST_CASE("two-direction patch thetas are the two complementary half-angles") {
  LozengeSpec spec{{0.0, kPi / 3}, 2};
  auto q = build_lozenge_patch(spec);
  REQUIRE(validate(q).empty());
  for (double t : q.theta) {
    bool ok = std::abs(t - kPi / 6) < 1e-12 || std::abs(t - kPi / 3) < 1e-12;
    REQUIRE(ok);
  }
}

TEST_CASE("three-direction patch satisfies the star-triangle angle relation") {
  LozengeSpec spec{{0.0, kPi / 3, 2 * kPi / 3}, 2};
  auto q = build_lozenge_patch(spec);
  REQUIRE(validate(q).empty());
  // Around every interior white vertex of degree 3 the three half-angles sum
  // to pi/2.
  bool found = false;
  for (int v = 0; v < q.n_vertices(); ++v) {
    if (q.is_black(v)) continue;
    std::vector<int> fs;
    for (int f = 0; f < q.n_faces(); ++f)
      for (int c : q.faces[f].cycle)
        if (c == v) fs.push_back(f);
    if (fs.size() != 3) continue;
    // interior check: total corner angle 2pi
    double tot = 0;
    for (int f : fs) tot += kPi - 2 * q.theta[f];
    if (std::abs(tot - 2 * kPi) > 1e-9) continue;
    found = true;
    double s = q.theta[fs[0]] + q.theta[fs[1]] + q.theta[fs[2]];
    REQUIRE(s == Catch::Approx(kPi / 2).margin(1e-9));
  }
  REQUIRE(found);
}

TEST_CASE("degenerate lozenge directions rejected") {
  REQUIRE_THROWS_AS(build_lozenge_patch(LozengeSpec{{0.0, kPi}, 2}), std::invalid_argument);
  REQUIRE_THROWS_AS(build_lozenge_patch(LozengeSpec{{0.0, 1.0}, 0}), std::invalid_argument);
}

TEST_CASE("corner angles: square lattice gives phi = pi/4 and exact sums") {
  auto q = build_square_torus(4, 4);
  auto ca = corner_angles(q);
  for (int e = 0; e < q.n_edges(); ++e) REQUIRE(ca.phi[e] == Catch::Approx(kPi / 4).margin(1e-12));
  REQUIRE(ca.max_black_residual < 1e-12);
  REQUIRE(ca.max_white_residual < 1e-12);
}

TEST_CASE("corner angles: cube Schlegel embedding satisfies both sum rules") {
  auto q = build_cube_sphere();
  auto ca = corner_angles(q);
  REQUIRE(ca.max_black_residual < 1e-12);
  REQUIRE(ca.max_white_residual < 1e-12);
}

TEST_CASE("corner angles on lozenge patch equal the mean of adjacent thetas") {
  LozengeSpec spec{{0.0, kPi / 3}, 3};
  auto q = build_lozenge_patch(spec);
  auto ca = corner_angles(q);
  for (int e = 0; e < q.n_edges(); ++e) {
    int f = q.edge_left_face[e], g = q.edge_right_face[e];
    if (f < 0 || g < 0) continue;
    REQUIRE(ca.phi[e] == Catch::Approx((q.theta[f] + q.theta[g]) / 2).margin(1e-12));
  }
}

#include "ffv8/json_io.hpp"

TEST_CASE("json interchange round-trips instances exactly") {
  for (auto q : {build_cube_sphere(), build_square_torus(2, 2), build_square_torus(4, 2),
                 build_lozenge_patch(LozengeSpec{{0.0, kPi / 2}, 3})}) {
    auto j = graph_to_json(q);
    auto q2 = graph_from_json(j);
    REQUIRE(validate(q2).empty());
    REQUIRE(q2.n_vertices() == q.n_vertices());
    REQUIRE(q2.n_edges() == q.n_edges());
    REQUIRE(q2.n_faces() == q.n_faces());
    REQUIRE(graph_to_json(q2) == j);  // stable fixed point
  }
  // weights and angles round-trip alongside the graph
  auto q = build_cube_sphere();
  AngleField a = AngleField::constant(q.n_faces(), 0.4, 0.9);
  auto x = ff_weights(a);
  auto xj = weights_to_json(x);
  auto x2 = weights_from_json(xj, q.n_faces());
  for (int f = 0; f < q.n_faces(); ++f) REQUIRE(x2[f].A == x[f].A);
  auto a2 = angles_from_json(angles_to_json(a), q.n_faces());
  REQUIRE(a2.alpha == a.alpha);
  REQUIRE(a2.beta == a.beta);
}
