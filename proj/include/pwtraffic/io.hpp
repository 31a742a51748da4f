#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "gauss_hermite.hpp"
#include "graph.hpp"
#include "models.hpp"
#include "partitions.hpp"

namespace pwt {

using json = nlohmann::json;

inline Rational rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw std::invalid_argument("expected an exact rational (string like \"3/2\" or an integer), got " + j.dump());
}

inline json to_json(const Rational& q) { return to_string(q); }

// {"basis": "power"|"hermite", "coeffs": ["0","1",...]}
inline Polynomial polynomial_from_json(const json& j) {
  if (!j.is_object() || !j.contains("coeffs")) throw std::invalid_argument("polynomial needs a coeffs array");
  std::string basis = j.value("basis", "power");
  std::vector<Rational> c;
  for (const auto& x : j.at("coeffs")) c.push_back(rational_from_json(x));
  if (basis == "power") return Polynomial::from_power(c);
  if (basis == "hermite") return Polynomial::from_hermite(c);
  throw std::invalid_argument("unknown polynomial basis: " + basis);
}

inline json to_json(const Polynomial& p, const std::string& basis = "power") {
  json c = json::array();
  for (const auto& q : basis == "hermite" ? p.hermite_coeffs() : p.power_coeffs()) c.push_back(to_string(q));
  return {{"basis", basis}, {"coeffs", c}};
}

// blocks as arrays of 1-based elements
inline json to_json(const SetPartition& p) {
  json out = json::array();
  for (const auto& b : p.blocks()) {
    json blk = json::array();
    for (int v : b) blk.push_back(v + 1);
    out.push_back(blk);
  }
  return out;
}

inline SetPartition partition_from_json(int n, const json& j) {
  std::vector<std::vector<int>> blocks;
  for (const auto& b : j) {
    blocks.emplace_back();
    for (const auto& v : b) blocks.back().push_back(v.get<int>() - 1);
  }
  return SetPartition::from_blocks(n, blocks);
}

inline json to_json(const IntegerPartition& p) { return p.parts; }

// {"vertices":[{"id":..,"color":..}], "edges":[{"id":..,"src":..,"dst":..,"label":..}]}
inline TestGraph<std::string> graph_from_json(const json& j) {
  TestGraph<std::string> g;
  std::map<json, int> index;
  for (const auto& v : j.at("vertices")) {
    int c = v.at("color").get<int>();
    if (c < 0 || c > 2) throw std::invalid_argument("vertex color must be 0, 1 or 2");
    if (!index.emplace(v.at("id"), g.add_vertex(c)).second)
      throw std::invalid_argument("duplicate vertex id " + v.at("id").dump());
  }
  auto vid = [&](const json& id) {
    auto it = index.find(id);
    if (it == index.end()) throw std::invalid_argument("edge refers to unknown vertex " + id.dump());
    return it->second;
  };
  for (const auto& e : j.at("edges")) {
    const json& l = e.at("label");
    g.add_edge(vid(e.at("src")), vid(e.at("dst")), l.is_string() ? l.get<std::string>() : l.dump());
  }
  return g;
}

template <class Label>
json to_json(const TestGraph<Label>& g) {
  json vs = json::array(), es = json::array();
  for (int v = 0; v < g.num_vertices(); ++v) vs.push_back({{"id", v + 1}, {"color", g.color[v]}});
  for (const auto& e : g.edges) {
    json l;
    if constexpr (std::is_same_v<Label, Polynomial>)
      l = to_json(e.label);
    else
      l = e.label;
    es.push_back({{"id", e.id + 1}, {"src", e.src + 1}, {"dst", e.dst + 1}, {"label", l}});
  }
  return {{"vertices", vs}, {"edges", es}};
}

// the 2k-edge alternating cycle: N^{-1} Tr (iota(Y) iota(Y)^t)^k
inline TestGraph<std::string> moment_preset(int k, const std::string& label) {
  if (k < 1) throw std::invalid_argument("moment-k preset needs k >= 1");
  TestGraph<std::string> g;
  std::vector<int> in1, in2;
  for (int a = 0; a < k; ++a) {
    in1.push_back(g.add_vertex(1));
    in2.push_back(g.add_vertex(2));
  }
  for (int a = 0; a < k; ++a) {
    g.add_edge(in2[a], in1[a], label);
    g.add_edge(in2[a], in1[(a + 1) % k], label);
  }
  return g;
}

inline EntryLaw law_from_json(const json& j) {
  std::string kind = j.is_string() ? j.get<std::string>() : j.at("kind").get<std::string>();
  if (kind == "gaussian") return EntryLaw::gaussian();
  if (kind == "rademacher") return EntryLaw::rademacher();
  if (kind == "skewed_two_point")
    return EntryLaw::skewed_two_point(rational_from_json(j.at("a")), rational_from_json(j.at("b")),
                                      rational_from_json(j.at("p")));
  throw std::invalid_argument("unknown entry law: " + kind);
}

inline json to_json(const EntryLaw& l) {
  if (l.kind != EntryLaw::Kind::skewed_two_point) return l.name();
  return {{"kind", l.name()}, {"a", to_string(l.a)}, {"b", to_string(l.b)}, {"p", to_string(l.p)}};
}

inline StepProfile profile_from_json(const json& j) {
  StepProfile p;
  if (j.is_array() && !j.empty() && j.front().is_array()) {
    p.grid.clear();
    for (const auto& row : j) {
      p.grid.emplace_back();
      for (const auto& v : row) p.grid.back().push_back(rational_from_json(v));
    }
  } else {
    p = StepProfile::constant(rational_from_json(j));
  }
  p.validate();
  return p;
}

inline json to_json(const StepProfile& p) {
  json g = json::array();
  for (const auto& row : p.grid) {
    json r = json::array();
    for (const auto& v : row) r.push_back(to_string(v));
    g.push_back(r);
  }
  return g;
}

}  // namespace pwt
