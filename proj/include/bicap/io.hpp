#pragma once

// Wire formats.  Vertices serialize as [level, pos]; bitree vertices as
// {"x": [level, pos], "y": [level, pos]}; measures and functions as atom
// arrays [{"node": ..., "mass": m}, ...]; capacity problems as
// {"depth": L, "set": [...], "kind": "down|exact|boundary", "tol": ...}.

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bicap/bidisc.hpp"
#include "bicap/capacity.hpp"
#include "bicap/potential.hpp"
#include "bicap/rearrangement.hpp"
#include "bicap/staircase.hpp"
#include "bicap/tree.hpp"

namespace bicap {

using Json = nlohmann::json;

inline Json to_json(Node1 n) { return Json::array({n.level, n.pos}); }
inline Json to_json(Node2 n) { return Json{{"x", to_json(n.x)}, {"y", to_json(n.y)}}; }

inline Node1 node1_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("vertex must be [level, pos]");
  return {j[0].get<int>(), j[1].get<std::uint64_t>()};
}
inline Node2 node2_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("x") || !j.contains("y"))
    throw std::invalid_argument("bitree vertex must carry x and y");
  return {node1_from_json(j.at("x")), node1_from_json(j.at("y"))};
}

inline Json to_json(const Measure2& m) {
  Json out = Json::array();
  for (const auto& [n, v] : m.entries) out.push_back(Json{{"node", to_json(n)}, {"mass", v}});
  return out;
}
inline Measure2 measure_from_json(const Json& j, TreeShape s) {
  if (!j.is_array()) throw std::invalid_argument("measure must be an atom array");
  Measure2 m(s);
  for (const auto& e : j) m.add(node2_from_json(e.at("node")), e.at("mass").get<double>());
  return m;
}

inline Json to_json(const NodeSet2& set) {
  Json items = Json::array();
  for (const auto& n : set.items) items.push_back(to_json(n));
  const char* kind = set.kind == SetKind::kExact     ? "exact"
                     : set.kind == SetKind::kDown    ? "down"
                                                     : "boundary";
  return Json{{"kind", kind}, {"items", items}};
}

inline SetKind set_kind_from_string(const std::string& s) {
  if (s == "exact") return SetKind::kExact;
  if (s == "down") return SetKind::kDown;
  if (s == "boundary") return SetKind::kBoundary;
  throw std::invalid_argument("unknown set kind: " + s);
}

inline CapacityProblem problem_from_json(const Json& j) {
  if (!j.contains("depth") || !j.contains("set"))
    throw std::invalid_argument("problem needs depth and set");
  TreeShape s(j.at("depth").get<int>());
  NodeSet2 target;
  target.kind = set_kind_from_string(j.value("kind", std::string("down")));
  for (const auto& e : j.at("set")) target.items.push_back(node2_from_json(e));
  CapacityProblem p{s, target};
  p.tol = j.value("tol", 1e-8);
  p.max_iters = j.value("max_iters", 10000);
  p.want_primal = j.value("want_primal", true);
  return p;
}

inline Json to_json(const CapacityResult& r) {
  return Json{{"cap", r.cap},           {"equilibrium", to_json(r.equilibrium)},
              {"primal", to_json(r.primal)}, {"gap", r.gap},
              {"iterations", r.iterations},  {"certified", r.certified}};
}

inline Json to_json(const BidiscAtom& a) {
  return Json{{"z1", Json::array({a.r1, a.theta1})},
              {"z2", Json::array({a.r2, a.theta2})},
              {"mass", a.mass}};
}
inline Json to_json(const std::vector<BidiscAtom>& atoms) {
  Json out = Json::array();
  for (const auto& a : atoms) out.push_back(to_json(a));
  return out;
}
inline std::vector<BidiscAtom> atoms_from_json(const Json& j) {
  if (!j.is_array()) throw std::invalid_argument("atom list must be an array");
  std::vector<BidiscAtom> out;
  for (const auto& e : j) {
    BidiscAtom a;
    a.r1 = e.at("z1")[0].get<double>();
    a.theta1 = e.at("z1")[1].get<double>();
    a.r2 = e.at("z2")[0].get<double>();
    a.theta2 = e.at("z2")[1].get<double>();
    a.mass = e.at("mass").get<double>();
    out.push_back(a);
  }
  return out;
}

inline Json to_json(const RearrangementOutput& r) {
  Json layers = Json::array();
  for (const auto& l : r.layers)
    layers.push_back(Json{{"alpha_y", to_json(l.alpha_y)},
                          {"phi_norm_sq", l.phi_norm_sq},
                          {"f_norm_sq", l.f_norm_sq},
                          {"sigma_mass", l.sigma_mass}});
  Json exceed = Json::array();
  for (const auto& n : r.exceed_set) exceed.push_back(to_json(n));
  return Json{{"phi", to_json(r.phi)},
              {"layers", layers},
              {"exceed_set", exceed},
              {"min_hardy_on_exceed",
               r.exceed_set.empty() ? Json() : Json(r.min_hardy_on_exceed)},
              {"phi_norm_sq", r.phi_norm_sq},
              {"restricted_energy", r.restricted_energy},
              {"cert_ratio", r.cert_ratio},
              {"delta", r.delta},
              {"lambda", r.lambda}};
}

inline Json to_json(const StaircaseResult& r) {
  return Json{{"base", r.config.base},
              {"steps", r.config.steps},
              {"k", r.k},
              {"cap", r.cap},
              {"mass_normalized", r.mass_normalized},
              {"v_on_support", r.v_on_support},
              {"v_at_anchor", r.v_at_anchor},
              {"sup_inf_ratio", r.sup_inf_ratio},
              {"offdiag_row_max_over_k", r.offdiag_row_max_over_k},
              {"certified", r.certified}};
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void save_json(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace bicap
