// Command-line front door: builds instances, runs the verification suites,
// and emits amoeba / correlation-decay / free-energy data.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "ffv8/json_io.hpp"
#include "ffv8/verify.hpp"

using namespace ffv8;

namespace {

std::optional<Quadrangulation> build_named_graph(const std::string& name) {
  if (name == "cube") return build_cube_sphere();
  if (name.rfind("torus", 0) == 0) {
    auto xpos = name.find('x');
    if (xpos != std::string::npos) {
      int m = std::stoi(name.substr(5, xpos - 5));
      int n = std::stoi(name.substr(xpos + 1));
      return build_square_torus(m, n);
    }
  }
  std::ifstream in(name);
  if (!in) return std::nullopt;
  json j;
  in >> j;
  return graph_from_json(j);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    std::ofstream f(out);
    f << text;
  }
}

json report_to_json(const verify::Report& rep, std::uint64_t seed) {
  json j;
  j["suite"] = rep.suite;
  j["seed"] = seed;
  j["pass"] = rep.pass();
  j["checks"] = json::array();
  for (auto& c : rep.checks) {
    json jc;
    jc["identity"] = c.name;
    jc["rel_err"] = c.err;
    jc["tol"] = c.tol;
    jc["pass"] = c.pass;
    if (!c.detail.empty()) jc["detail"] = c.detail;
    j["checks"].push_back(jc);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"free-fermion eight-vertex model on quadrangulations"};
  app.require_subcommand(1);

  // ---- verify ----
  std::string suite, graph_name, out;
  std::string format = "json";
  std::uint64_t seed = 0;
  int trials = 0;
  double tol = 0;
  auto* verify_cmd = app.add_subcommand("verify", "run an identity suite and report pass/fail");
  verify_cmd->add_option("suite", suite,
                         "one of: switching, xor, duality, spin-vertex, kasteleyn-sphere, "
                         "kasteleyn-torus, poly-switch, factorization, ybe, local-inverse, "
                         "monotonicity, exponent, forms")
      ->required();
  verify_cmd->add_option("--graph", graph_name, "builtin (cube, torus2x2, torus4x4, ...) or JSON path");
  verify_cmd->add_option("--seed", seed, "RNG seed; fixed seed means byte-identical reports");
  verify_cmd->add_option("--trials", trials, "number of random instances");
  verify_cmd->add_option("--tol", tol, "override the suite tolerance");
  verify_cmd->add_option("--out", out, "write the report here instead of stdout");
  verify_cmd->add_option("--format", format, "json")->check(CLI::IsMember({"json"}));

  // ---- amoeba ----
  double am_k2 = 0.09, am_l2 = 0.49, window = 1.5;
  int nx = 101, nphase = 64;
  auto* amoeba_cmd = app.add_subcommand("amoeba", "sample the spectral-curve amoebas (CSV)");
  amoeba_cmd->add_option("--k2", am_k2, "modulus squared of the first factor");
  amoeba_cmd->add_option("--l2", am_l2, "modulus squared of the second factor");
  amoeba_cmd->add_option("--window", window, "half-width of the log|z|,log|w| window");
  amoeba_cmd->add_option("--nx", nx, "grid columns");
  amoeba_cmd->add_option("--nphase", nphase, "phases per fiber");
  amoeba_cmd->add_option("--graph", graph_name, "toric builtin or JSON path (default torus2x2)");
  amoeba_cmd->add_option("--out", out, "output CSV path");

  // ---- correlations ----
  double ck = 0.3, cl = 0.7;
  int rmin = 10, rmax = 40;
  auto* corr_cmd = app.add_subcommand("correlations", "edge probabilities and decay fits");
  corr_cmd->add_option("--k", ck, "modulus k (needs 0 <= k < l < 1)");
  corr_cmd->add_option("--l", cl, "modulus l");
  corr_cmd->add_option("--rmin", rmin, "smallest distance in the decay fit");
  corr_cmd->add_option("--rmax", rmax, "largest distance in the decay fit");
  corr_cmd->add_option("--out", out, "output path");
  corr_cmd->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // ---- free energy ----
  double fk = 0.3, fl = 0.7;
  auto* fe_cmd = app.add_subcommand("free-energy", "quadrature free energy and toric exhaustion");
  fe_cmd->add_option("--k", fk, "modulus k");
  fe_cmd->add_option("--l", fl, "modulus l");
  fe_cmd->add_option("--out", out, "output path");

  // ---- graph dump ----
  auto* graph_cmd = app.add_subcommand("graph", "emit a builtin instance as interchange JSON");
  graph_cmd->add_option("name", graph_name, "cube or torusMxN")->required();
  graph_cmd->add_option("--out", out, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*verify_cmd) {
      std::optional<Quadrangulation> q;
      if (!graph_name.empty()) {
        q = build_named_graph(graph_name);
        if (!q) {
          std::cerr << "unknown graph: " << graph_name << "\n";
          return 2;
        }
      }
      const Quadrangulation* qp = q ? &*q : nullptr;
      auto pick = [&](double def_tol, int def_trials) {
        if (tol == 0) tol = def_tol;
        if (trials == 0) trials = def_trials;
      };
      verify::Report rep;
      if (suite == "switching") {
        pick(1e-10, 20);
        rep = verify::switching(seed, trials, tol, qp);
      } else if (suite == "xor") {
        pick(1e-12, 3);
        rep = verify::xor_coupling(seed, trials, tol, qp);
      } else if (suite == "duality") {
        pick(1e-10, 10);
        rep = verify::duality_suite(seed, trials, tol, qp);
      } else if (suite == "spin-vertex") {
        pick(1e-10, 10);
        rep = verify::spin_vertex_suite(seed, trials, tol, qp);
      } else if (suite == "kasteleyn-sphere") {
        pick(1e-10, 20);
        rep = verify::kasteleyn_sphere(seed, trials, tol, qp);
      } else if (suite == "kasteleyn-torus") {
        pick(1e-9, 20);
        rep = verify::kasteleyn_torus(seed, trials, tol, qp);
      } else if (suite == "poly-switch") {
        pick(1e-8, 100);
        rep = verify::poly_switch_suite(seed, trials, tol, qp);
      } else if (suite == "factorization") {
        pick(1e-8, 40);
        rep = verify::factorization_suite(seed, trials, tol, qp);
      } else if (suite == "ybe") {
        pick(1e-10, 50);
        rep = verify::ybe_suite(seed, trials, tol);
      } else if (suite == "local-inverse") {
        pick(1e-7, 0);
        rep = verify::local_inverse_suite(tol);
      } else if (suite == "monotonicity") {
        rep = verify::monotonicity_suite();
      } else if (suite == "exponent") {
        rep = verify::exponent_suite();
      } else if (suite == "forms") {
        rep = verify::forms_suite(seed);
      } else {
        std::cerr << "unknown suite: " << suite << "\n";
        return 2;
      }
      emit(out, report_to_json(rep, seed).dump(2));
      std::cerr << (rep.pass() ? "PASS " : "FAIL ") << rep.suite << "  [" << rep.seconds << " s]\n";
      return rep.pass() ? 0 : 1;
    }

    if (*amoeba_cmd) {
      Quadrangulation q =
          graph_name.empty() ? build_square_torus(2, 2) : *build_named_graph(graph_name);
      if (q.surface != Surface::Torus) {
        std::cerr << "amoeba needs a toric instance\n";
        return 2;
      }
      auto gt = build_decorated_graph(q, corner_angles(q));
      SpectralSampler s8(gt, zinv_weights(gt.q, am_k2, am_l2));
      Elliptic ek(am_k2), el(am_l2);
      std::vector<double> alpha_angles, beta_angles;
      for (int f = 0; f < q.n_faces(); ++f) {
        auto [a, b] = zinv_angles(q.theta.at(f), ek, el);
        alpha_angles.push_back(a);
        beta_angles.push_back(b);
      }
      auto s6a = sampler_6v(gt, alpha_angles);
      auto s6b = sampler_6v(gt, beta_angles);
      std::ostringstream csv;
      csv << "x,y,tag\n";
      auto dump = [&](const std::vector<AmoebaPoint>& pts) {
        for (auto& p : pts)
          csv << p.x << "," << p.y << "," << (p.tag == 0 ? "p8v" : p.tag == 1 ? "p6v_a" : "p6v_b")
              << "\n";
      };
      dump(amoeba_sample(s8, -window, window, -window, window, nx, nphase, 0));
      dump(amoeba_sample(s6a, -window, window, -window, window, nx, nphase, 1));
      dump(amoeba_sample(s6b, -window, window, -window, window, nx, nphase, 2));
      emit(out, csv.str());
      return 0;
    }

    if (*corr_cmd) {
      if (!(0 <= ck && ck < cl && cl < 1)) {
        std::cerr << "the local probability formula needs 0 <= k < l < 1\n";
        return 2;
      }
      SquarePlane sp(ck * ck, cl * cl);
      Elliptic ek(ck * ck);
      using V = SquarePlane::V;
      json j;
      j["k"] = ck;
      j["l"] = cl;
      j["single_edge_probability"] = edge_probabilities_planar(sp, {V{0, 0, 0}});
      j["pair_probability_adjacent_faces"] =
          edge_probabilities_planar(sp, {V{0, 0, 0}, V{1, 1, 0}});
      // Table over small moduli; k = 0 is evaluated as the k -> 0 limit
      // (k^2 = 1e-8), where the kernels are continuous.
      json table = json::array();
      for (double kk : {0.0, 0.2, 0.4}) {
        if (!(kk < cl)) continue;
        SquarePlane spk(kk == 0.0 ? 1e-8 : kk * kk, cl * cl);
        table.push_back({{"k", kk},
                         {"single_edge", edge_probabilities_planar(spk, {V{0, 0, 0}})},
                         {"pair", edge_probabilities_planar(spk, {V{0, 0, 0}, V{1, 1, 0}})}});
      }
      j["probability_table"] = table;
      std::ostringstream csv;
      csv << "r,log_abs_entry,log_abs_prediction\n";
      json fit = json::array();
      for (long d = 1; d * std::sqrt(2.0) <= rmax; ++d) {
        V b{0, 0, 0};
        V w{d, d, 1};
        if (SquarePlane::is_black(w)) w.c = 3;
        auto p = sp.path(b, w);
        if (p.r < rmin || p.r > rmax) continue;
        cplx val = kinv6v_entry(p, ek);
        double pred;
        try {
          pred = std::log(std::abs(asymptotic_prediction(p, ek)));
        } catch (const std::exception&) {
          pred = std::numeric_limits<double>::quiet_NaN();
        }
        csv << p.r << "," << std::log(std::abs(val)) << "," << pred << "\n";
        fit.push_back({{"r", p.r}, {"log_abs_entry", std::log(std::abs(val))}});
      }
      if (format == "csv") {
        emit(out, csv.str());
      } else {
        j["decay_table"] = fit;
        RhombusPath pd = sp.path(V{0, 0, 0}, V{11, 11, 1});
        j["chi_u0_k"] = chi_fn(pd, u0_minimizer(pd, ek), ek);
        emit(out, j.dump(2));
      }
      return 0;
    }

    if (*fe_cmd) {
      auto q1 = build_square_torus(2, 2);
      auto gt1 = build_decorated_graph(q1, corner_angles(q1));
      SpectralSampler s(gt1, zinv_weights(gt1.q, fk * fk, fl * fl));
      auto fe = free_energy(s, 1e-8);
      json j;
      j["k"] = fk;
      j["l"] = fl;
      j["free_energy"] = fe.value;
      j["quadrature_error"] = fe.error;
      j["quadrature_grid"] = fe.grid;
      j["converged"] = fe.converged;
      json seq = json::array();
      for (int nn = 1; nn <= 3; ++nn) {
        auto qn = build_square_torus(2 * nn, 2 * nn);
        auto gtn = build_decorated_graph(qn, corner_angles(qn));
        double z = torus_partition(gtn, zinv_weights(gtn.q, fk * fk, fl * fl));
        seq.push_back({{"n", 2 * nn}, {"minus_logZ_over_n2", -std::log(z) / double(nn * nn)}});
      }
      j["toric_exhaustion"] = seq;
      emit(out, j.dump(2));
      return 0;
    }

    if (*graph_cmd) {
      auto q = build_named_graph(graph_name);
      if (!q) {
        std::cerr << "unknown graph: " << graph_name << "\n";
        return 2;
      }
      emit(out, graph_to_json(*q).dump(2));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
