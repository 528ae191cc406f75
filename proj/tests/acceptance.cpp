// Acceptance suite: every end-to-end identity the library must satisfy, each
// at its pinned tolerance, one pass/fail line per criterion. Exit code 0 only
// if all pass.

#include <chrono>
#include <cstdio>

#include "ffv8/verify.hpp"

using namespace ffv8;

namespace {

int g_failures = 0;

void line(int idx, const char* title, const verify::Report& rep) {
  bool ok = rep.pass();
  if (rep.time_budget > 0 && rep.seconds >= rep.time_budget) ok = false;
  if (!ok) ++g_failures;
  std::printf("[%s] %2d. %-22s", ok ? "PASS" : "FAIL", idx, title);
  double worst_ratio = 0;
  const verify::Check* worst = nullptr;
  for (auto& c : rep.checks) {
    double ratio = c.tol > 0 ? c.err / c.tol : (c.pass ? 0 : 1);
    if (worst == nullptr || ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = &c;
    }
  }
  if (worst && worst->tol > 0)
    std::printf("  worst: %s = %.3g (tol %.3g)", worst->name.c_str(), worst->err, worst->tol);
  std::printf("  [%.1fs]\n", rep.seconds);
  for (auto& c : rep.checks)
    if (!c.pass)
      std::printf("       failed: %s = %.6g vs %.6g %s\n", c.name.c_str(), c.err, c.tol,
                  c.detail.c_str());
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  const std::uint64_t seed = 20260809;

  line(1, "switching identity", verify::switching(seed, 20, 1e-10));
  line(2, "xor coupling", verify::xor_coupling(seed + 1, 3, 1e-12));
  line(3, "sphere pfaffian", verify::kasteleyn_sphere(seed + 2, 20, 1e-10));
  line(4, "torus four-pfaffian", verify::kasteleyn_torus(seed + 3, 20, 1e-9));
  line(5, "polynomial switching", verify::poly_switch_suite(seed + 4, 100, 1e-8));
  line(6, "inverse switching", verify::inverse_switch_suite(seed + 5, 20, 1e-10));
  line(7, "checkerboard ybe", verify::ybe_suite(seed + 6, 50, 1e-10));
  line(8, "local inverse", verify::local_inverse_suite(1e-7, 1e-10, 1e-6));
  line(9, "correlation decay", verify::correlation_decay_suite(0.02));
  line(10, "decay monotonicity", verify::monotonicity_suite());
  line(11, "critical exponent", verify::exponent_suite());
  line(12, "free energy", verify::free_energy_suite());
  line(13, "one-form algebra", verify::forms_suite(seed + 7));

  double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool time_ok = total < 600.0;
  if (!time_ok) ++g_failures;
  std::printf("[%s] 14. end-to-end runtime      %.1f s < 600 s\n", time_ok ? "PASS" : "FAIL", total);

  if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
  else std::printf("all acceptance criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
