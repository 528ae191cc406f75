#include "ffv8/weights.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <random>

using namespace ffv8;

TEST_CASE("free-fermion weights at alpha = beta = pi/4") {
  auto w = ff_face_weights(kPi / 4, kPi / 4);
  REQUIRE(w.A == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(w.B == Catch::Approx(std::sqrt(2.0)));
  REQUIRE(w.C == Catch::Approx(2.0));
  REQUIRE(w.D == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("ff weights satisfy 2C = A^2+B^2 = C^2+D^2") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng);
    auto w = ff_face_weights(a, b);
    REQUIRE(std::abs(w.A * w.A + w.B * w.B - 2 * w.C) < 1e-12 * std::max(1.0, 2 * std::abs(w.C)));
    REQUIRE(w.free_fermion_residual() < 1e-12);
  }
}

TEST_CASE("alpha = beta generic is six-vertex") {
  double a = 0.9;
  auto w = ff_face_weights(a, a);
  REQUIRE(w.D == Catch::Approx(0.0).margin(1e-15));
  // [A : B : C] = [sin a : cos a : 1]
  REQUIRE(w.A / w.C == Catch::Approx(std::sin(a)));
  REQUIRE(w.B / w.C == Catch::Approx(std::cos(a)));
}

TEST_CASE("swapping alpha and beta flips D") {
  auto w = ff_face_weights(0.3, 1.1);
  auto s = ff_face_weights(1.1, 0.3);
  REQUIRE(s.A == Catch::Approx(w.A));
  REQUIRE(s.B == Catch::Approx(w.B));
  REQUIRE(s.C == Catch::Approx(w.C));
  REQUIRE(s.D == Catch::Approx(-w.D));
}

TEST_CASE("degenerate alpha - beta = pi kills all four weights") {
  auto w = ff_face_weights(0.4, 0.4 + kPi);
  REQUIRE(std::abs(w.A) < 1e-14);
  REQUIRE(std::abs(w.B) < 1e-14);
  REQUIRE(std::abs(w.C) < 1e-14);
  REQUIRE(std::abs(w.D) < 1e-14);
  AngleField f = AngleField::constant(1, 0.4, 0.4 + kPi);
  REQUIRE(!f.is_standard());
}

TEST_CASE("homogeneous_params inverts ff weights up to gauge") {
  auto [a1, b1] = homogeneous_params({std::sqrt(2.0), std::sqrt(2.0), 2.0, 0.0});
  REQUIRE(a1 == Catch::Approx(kPi / 4));
  REQUIRE(b1 == Catch::Approx(kPi / 4));

  auto [a2, b2] = homogeneous_params({2, 0, 2, 0});
  REQUIRE(a2 == Catch::Approx(kPi / 2));
  REQUIRE(b2 == Catch::Approx(kPi / 2));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 2 * kPi);
  std::uniform_real_distribution<double> s(0.1, 3.0);
  for (int t = 0; t < 100; ++t) {
    auto w = ff_face_weights(u(rng), u(rng));
    if (!w.is_standard(1e-6)) continue;
    double lam = s(rng);
    FaceWeights scaled{lam * w.A, lam * w.B, lam * w.C, lam * w.D};
    auto [a, b] = homogeneous_params(scaled);
    auto back = ff_face_weights(a, b);
    // proportional: cross ratios agree
    double r = back.C / scaled.C;
    REQUIRE(back.A == Catch::Approx(r * scaled.A).margin(1e-11));
    REQUIRE(back.B == Catch::Approx(r * scaled.B).margin(1e-11));
    REQUIRE(back.D == Catch::Approx(r * scaled.D).margin(1e-11));
    // and the gauge factor on normalized input is 2C/(A^2+B^2)
  }
  REQUIRE_THROWS_AS(homogeneous_params({1, 1, 0, std::sqrt(2.0)}), std::invalid_argument);
  REQUIRE_THROWS_AS(homogeneous_params({5, 0, 1, 0}), std::invalid_argument);
}

TEST_CASE("duality matrix examples and involution") {
  auto h = duality_hat_face({1, 1, 1, 1});
  REQUIRE(h.A == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(h.B == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(h.C == Catch::Approx(2.0));
  REQUIRE(h.D == Catch::Approx(0.0).margin(1e-15));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 50; ++t) {
    FaceWeights w{u(rng), u(rng), u(rng), u(rng)};
    auto hh = duality_hat_face(duality_hat_face(w));
    REQUIRE(hh.A == Catch::Approx(w.A).margin(1e-13));
    REQUIRE(hh.B == Catch::Approx(w.B).margin(1e-13));
    REQUIRE(hh.C == Catch::Approx(w.C).margin(1e-13));
    REQUIRE(hh.D == Catch::Approx(w.D).margin(1e-13));
  }
}

TEST_CASE("disorder operators: single face actions and anticommutation") {
  FaceWeights w{1, 2, 3, 4};
  auto x = xi_black(w);
  REQUIRE(x.A == 3);
  REQUIRE(x.B == 4);
  REQUIRE(x.C == 1);
  REQUIRE(x.D == 2);
  auto y = xi_white(w);
  REQUIRE(y.A == 4);
  REQUIRE(y.B == 3);
  REQUIRE(y.C == 2);
  REQUIRE(y.D == 1);

  // nu_B xi_W = -xi_W nu_B as weight maps
  auto lhs = nu_black(xi_white(w));
  auto rhs = xi_white(nu_black(w));
  REQUIRE(lhs.A == -rhs.A);
  REQUIRE(lhs.B == -rhs.B);
  REQUIRE(lhs.C == -rhs.C);
  REQUIRE(lhs.D == -rhs.D);
  // while same-color pairs commute
  auto l2 = nu_black(xi_black(w));
  auto r2 = xi_black(nu_black(w));
  REQUIRE(l2.A == r2.A);
  REQUIRE(l2.D == r2.D);
}

TEST_CASE("apply_disorder_ops identity and errors") {
  WeightField x;
  x.w = {{1, 2, 3, 4}, {5, 6, 7, 8}};
  auto y = apply_disorder_ops(x, PathSets{});
  REQUIRE(y[0].A == 1);
  REQUIRE(y[1].D == 8);
  PathSets bad;
  bad.order_black = {5};
  REQUIRE_THROWS_AS(apply_disorder_ops(x, bad), std::invalid_argument);
}

TEST_CASE("c constants") {
  AngleField ab = AngleField::constant(6, kPi / 4, kPi / 4);
  REQUIRE(c_product(ab) == Catch::Approx(64.0));
  REQUIRE(c1_constant(ab, ab) == Catch::Approx(1.0));
  REQUIRE(c2_constant(ab, ab) == Catch::Approx(1.0));
  REQUIRE(ctilde_abs(ab) == Catch::Approx(1.0));  // C = 2 everywhere
}
