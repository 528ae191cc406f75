#pragma once

#include <json.hpp>
#include <string>

#include "ffv8/quad_graph.hpp"
#include "ffv8/weights.hpp"

namespace ffv8 {

using json = nlohmann::json;

/// Graph interchange schema:
/// {"surface": "sphere"|"torus"|"patch",
///  "vertices": [{"id", "color"}], "edges": [[b,w]],
///  "faces": [{"cycle": [b,w,b2,w2], "edges": [e0..e3], "lift": [[x,y] x4]}],
///  "gamma_x": [...], "gamma_y": [...],
///  "embedding": {"theta": {face: radians}, "positions": {vertex: [x,y]},
///                "periods": [Lx, Ly]}}
/// Face edge ids disambiguate parallel edges on small torus quotients, and
/// the per-face corner charts ("lift") pin the toric geometry where reduced
/// positions alone are ambiguous (corner images at half-period distances).
inline json graph_to_json(const Quadrangulation& q) {
  json j;
  j["surface"] = q.surface == Surface::Sphere ? "sphere"
                 : q.surface == Surface::Torus ? "torus"
                                               : "patch";
  j["vertices"] = json::array();
  for (int v = 0; v < q.n_vertices(); ++v)
    j["vertices"].push_back({{"id", v}, {"color", q.is_black(v) ? "black" : "white"}});
  j["edges"] = json::array();
  for (auto& e : q.edges) j["edges"].push_back({e[0], e[1]});
  j["faces"] = json::array();
  for (auto& f : q.faces) {
    json jf;
    jf["cycle"] = f.cycle;
    jf["edges"] = f.edge;
    if (!q.pos.empty()) {
      json jl = json::array();
      for (auto& p : f.lift) jl.push_back({p.x(), p.y()});
      jf["lift"] = jl;
    }
    j["faces"].push_back(jf);
  }
  if (!q.gamma_x.empty()) j["gamma_x"] = q.gamma_x;
  if (!q.gamma_y.empty()) j["gamma_y"] = q.gamma_y;
  json emb;
  if (!q.pos.empty()) {
    json pos;
    for (int v = 0; v < q.n_vertices(); ++v) pos[std::to_string(v)] = {q.pos[v].x(), q.pos[v].y()};
    emb["positions"] = pos;
  }
  if (!q.theta.empty()) {
    json th;
    for (int f = 0; f < q.n_faces(); ++f) th[std::to_string(f)] = q.theta[f];
    emb["theta"] = th;
  }
  if (q.surface == Surface::Torus) emb["periods"] = {q.period_x, q.period_y};
  if (!emb.empty()) j["embedding"] = emb;
  return j;
}

inline Quadrangulation graph_from_json(const json& j) {
  Quadrangulation q;
  std::string s = j.at("surface");
  q.surface = s == "sphere" ? Surface::Sphere : s == "torus" ? Surface::Torus : Surface::PlanarPatch;
  int nv = int(j.at("vertices").size());
  q.color.resize(nv);
  for (auto& jv : j.at("vertices")) {
    int id = jv.at("id");
    q.color.at(id) = (jv.at("color") == "black") ? Color::Black : Color::White;
  }
  for (auto& je : j.at("edges")) q.edges.push_back({je.at(0), je.at(1)});
  q.pos.assign(nv, Vector2d::Zero());
  bool has_pos = j.contains("embedding") && j.at("embedding").contains("positions");
  if (has_pos)
    for (auto& [key, val] : j.at("embedding").at("positions").items())
      q.pos.at(std::stoi(key)) = Vector2d(val.at(0), val.at(1));
  if (j.contains("embedding") && j.at("embedding").contains("periods")) {
    q.period_x = j.at("embedding").at("periods").at(0);
    q.period_y = j.at("embedding").at("periods").at(1);
  }
  for (auto& jf : j.at("faces")) {
    Quadrangulation::Face f;
    for (int i = 0; i < 4; ++i) f.cycle[i] = jf.at("cycle").at(i);
    if (jf.contains("edges"))
      for (int i = 0; i < 4; ++i) f.edge[i] = jf.at("edges").at(i);
    if (jf.contains("lift")) {
      for (int i = 0; i < 4; ++i)
        f.lift[i] = Vector2d(jf.at("lift").at(i).at(0), jf.at("lift").at(i).at(1));
    } else if (has_pos) {
      // Local chart: start at the first corner's representative, then take
      // the nearest periodic image of each subsequent corner. Ambiguous at
      // half-period distances; instances carrying "lift" avoid the issue.
      f.lift[0] = q.pos[f.cycle[0]];
      for (int i = 1; i < 4; ++i) {
        Vector2d p = q.pos[f.cycle[i]];
        if (q.surface == Surface::Torus) {
          Vector2d prev = f.lift[i - 1];
          p.x() -= q.period_x * std::round((p.x() - prev.x()) / q.period_x);
          p.y() -= q.period_y * std::round((p.y() - prev.y()) / q.period_y);
        }
        f.lift[i] = p;
      }
    }
    q.faces.push_back(f);
  }
  if (j.contains("gamma_x")) q.gamma_x = j.at("gamma_x").get<std::vector<int>>();
  if (j.contains("gamma_y")) q.gamma_y = j.at("gamma_y").get<std::vector<int>>();
  if (j.contains("embedding") && j.at("embedding").contains("theta")) {
    q.theta.assign(q.n_faces(), 0.0);
    for (auto& [key, val] : j.at("embedding").at("theta").items()) q.theta.at(std::stoi(key)) = val;
  }
  q.finalize();
  return q;
}

/// Weight fields serialize as {"weights": {face: [A,B,C,D]}} and angle
/// fields as {"angles": {face: [alpha, beta]}} next to the graph.
inline json weights_to_json(const WeightField& x) {
  json j;
  for (int f = 0; f < x.n_faces(); ++f)
    j[std::to_string(f)] = {x[f].A, x[f].B, x[f].C, x[f].D};
  return j;
}

inline WeightField weights_from_json(const json& j, int n_faces) {
  WeightField x;
  x.w.resize(n_faces);
  for (auto& [key, val] : j.items())
    x.w.at(std::stoi(key)) = {val.at(0), val.at(1), val.at(2), val.at(3)};
  return x;
}

inline json angles_to_json(const AngleField& a) {
  json j;
  for (int f = 0; f < a.n_faces(); ++f) j[std::to_string(f)] = {a.alpha[f], a.beta[f]};
  return j;
}

inline AngleField angles_from_json(const json& j, int n_faces) {
  AngleField a;
  a.alpha.assign(n_faces, 0.0);
  a.beta.assign(n_faces, 0.0);
  for (auto& [key, val] : j.items()) {
    a.alpha.at(std::stoi(key)) = val.at(0);
    a.beta.at(std::stoi(key)) = val.at(1);
  }
  return a;
}

}  // namespace ffv8
