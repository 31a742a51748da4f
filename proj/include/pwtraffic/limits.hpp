#pragma once

#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "gauss_hermite.hpp"
#include "graph.hpp"
#include "models.hpp"
#include "partitions.hpp"

namespace pwt {

struct LimitParams {
  Rational psi0{1, 3}, psi1{1, 3}, psi2{1, 3};
  Rational m3w = 0, m3x = 0;
  StepProfile gw, gx;  // gw: V1 x V0 coordinates, gx: V0 x V2 coordinates

  void validate() const {
    if (psi0 <= 0 || psi1 <= 0 || psi2 <= 0 || psi0 + psi1 + psi2 != 1)
      throw std::invalid_argument("psi must be positive and sum to 1");
    gw.validate();
    gx.validate();
  }
  bool constant_profiles() const { return gw.rows() == 1 && gw.cols() == 1 && gx.rows() == 1 && gx.cols() == 1; }
};

using RefGraph = TestGraph<Polynomial>;

// Cell geometry of the two step graphons; V0 uses the common refinement.
class GraphonCells {
 public:
  explicit GraphonCells(const LimitParams& p) : p_(p) {
    k1_ = p.gw.rows();
    k2_ = p.gx.cols();
    k0_ = std::lcm(p.gw.cols(), p.gx.rows());
  }
  int count(int color) const { return color == 0 ? k0_ : color == 1 ? k1_ : k2_; }
  Rational measure(int color) const { return Rational(1, count(color)); }
  const Rational& w(int t, int u) const { return p_.gw.grid[t][u * p_.gw.cols() / k0_]; }
  const Rational& x(int u, int s) const { return p_.gx.grid[u * p_.gx.rows() / k0_][s]; }

  // int over u of prod_l Gw(t_l,u)^{a_l} Gx(u,s_l)^{b_l}
  Rational integrate_v0(const std::vector<std::pair<int, int>>& wt, const std::vector<std::pair<int, int>>& xs) const {
    Rational r = 0;
    for (int u = 0; u < k0_; ++u) {
      Rational f = 1;
      for (auto [t, a] : wt)
        for (int i = 0; i < a; ++i) f *= w(t, u);
      for (auto [s, b] : xs)
        for (int i = 0; i < b; ++i) f *= x(u, s);
      r += f;
    }
    return r / k0_;
  }

 private:
  const LimitParams& p_;
  int k0_, k1_, k2_;
};

namespace detail {

// Visits assignments of cells to the vertices of the given colors with their measure.
template <class F>
void for_each_cell_assignment(const std::vector<int>& color, const GraphonCells& cells, F&& f) {
  int n = static_cast<int>(color.size());
  std::vector<int> a(n, 0);
  Rational m = 1;
  for (int c : color) m *= cells.measure(c);
  while (true) {
    f(a, m);
    int k = 0;
    while (k < n && ++a[k] == cells.count(color[k])) a[k++] = 0;
    if (k == n) break;
  }
}

}  // namespace detail

// Limit of delta0 of a quotient auxiliary graph evaluated in the step graphons.
// V0 vertices only touch V1 (w-edges) and V2 (x-edges), so they integrate independently.
inline Rational delta0_graphon(const TestGraph<AuxLabel>& q, const LimitParams& p) {
  GraphonCells cells(p);
  if (p.constant_profiles()) {
    Rational r = 1;
    for (const auto& e : q.edges) r *= (e.label == AuxLabel::w ? p.gw.grid[0][0] : p.gx.grid[0][0]);
    return r;
  }
  int n = q.num_vertices();
  std::vector<int> outer, slot(n, -1);
  for (int v = 0; v < n; ++v)
    if (q.color[v] != 0) {
      slot[v] = static_cast<int>(outer.size());
      outer.push_back(v);
    }
  // per V0 vertex: multiplicities toward each outer vertex
  std::vector<std::map<int, int>> wmult(n), xmult(n);
  for (const auto& e : q.edges) {
    if (e.label == AuxLabel::w) {
      if (q.color[e.src] != 0 || q.color[e.dst] != 1) throw std::invalid_argument("w-edge must run from V0 to V1");
      ++wmult[e.src][e.dst];
    } else {
      if (q.color[e.src] != 2 || q.color[e.dst] != 0) throw std::invalid_argument("x-edge must run from V2 to V0");
      ++xmult[e.dst][e.src];
    }
  }
  std::vector<int> ocolor;
  for (int v : outer) ocolor.push_back(q.color[v]);
  std::map<std::pair<std::vector<std::pair<int, int>>, std::vector<std::pair<int, int>>>, Rational> memo;
  Rational total = 0;
  detail::for_each_cell_assignment(ocolor, cells, [&](const std::vector<int>& a, const Rational& m) {
    Rational f = m;
    for (int v = 0; v < n && f != 0; ++v) {
      if (q.color[v] != 0) continue;
      std::vector<std::pair<int, int>> wt, xs;
      for (auto [t, k] : wmult[v]) wt.push_back({a[slot[t]], k});
      for (auto [s, k] : xmult[v]) xs.push_back({a[slot[s]], k});
      std::sort(wt.begin(), wt.end());
      std::sort(xs.begin(), xs.end());
      auto key = std::make_pair(wt, xs);
      auto it = memo.find(key);
      if (it == memo.end()) it = memo.emplace(key, cells.integrate_v0(wt, xs)).first;
      f *= it->second;
    }
    total += f;
  });
  return total;
}

struct QuotientTerm {
  SetPartition rho0;
  std::string coloring;  // empty for the direct formula
  Rational value;
};

struct LimitResult {
  Rational value = 0;
  std::vector<QuotientTerm> breakdown;
};

namespace detail {

inline void validate_reference(const RefGraph& t, int max_edges) {
  if (!t.is_reference()) throw std::invalid_argument("graph is not a reference graph (edges must run V2 -> V1)");
  if (!is_connected(t)) throw std::invalid_argument("reference graph must be connected");
  if (t.num_edges() > max_edges) throw std::length_error("too many edges for the limit calculator");
}

inline Rational power(const Rational& b, int e) {
  Rational r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

inline std::pair<int, int> color_counts(const TestGraph<Polynomial>& q) {
  int v1 = 0, v2 = 0;
  for (int c : q.color) (c == 1 ? v1 : v2)++;
  return {v1, v2};
}

// Auxiliary partition pi0 realizing rho0 for monomial labels n, per the cut-edge /
// two-cycle / long-cycle patterns. Returns the quotient auxiliary graph.
inline TestGraph<AuxLabel> pi0_quotient(const TestGraph<int>& t, const SetPartition& rho0,
                                        const StrongComponentReport& rep) {
  AuxiliaryGraph a = build_auxiliary(t);
  int nv = a.graph.num_vertices();
  std::vector<int> ids(nv, -1);
  for (int v = 0; v < a.num_reference; ++v) ids[v] = rho0.block_of(v);
  int next = rho0.num_blocks();
  auto pair_up = [&](const std::vector<int>& vs) {
    for (std::size_t i = 0; i + 1 < vs.size(); i += 2) ids[vs[i]] = ids[vs[i + 1]] = next++;
    if (vs.size() % 2) ids[vs.back()] = next++;
  };
  for (int e : rep.cut_edges) {
    const auto& vs = a.niche_vertices[e];
    std::vector<int> rest;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      if (i < 3)
        ids[vs[i]] = next;
      else
        rest.push_back(vs[i]);
    }
    ++next;
    pair_up(rest);
  }
  for (const auto& c : rep.two_cycles) {
    std::vector<int> vs = a.niche_vertices[c[0]];
    vs.insert(vs.end(), a.niche_vertices[c[1]].begin(), a.niche_vertices[c[1]].end());
    pair_up(vs);
  }
  for (const auto& c : rep.long_cycles) {
    int central = next++;
    for (int e : c) {
      const auto& vs = a.niche_vertices[e];
      ids[vs[0]] = central;
      pair_up(std::vector<int>(vs.begin() + 1, vs.end()));
    }
  }
  return quotient(a.graph, SetPartition::canonical(ids));
}

}  // namespace detail

inline constexpr int kMaxLimitEdges = 4;

// Sum over pseudo-cactus quotients with the cut-edge / 2-cycle / long-cycle weights.
inline LimitResult limit_pw(const RefGraph& t, const LimitParams& p) {
  p.validate();
  detail::validate_reference(t, kMaxLimitEdges);
  int ne = t.num_edges();
  std::vector<std::vector<std::pair<int, Rational>>> mono(ne);
  for (int i = 0; i < ne; ++i)
    for (int n = 1; n <= t.edges[i].label.degree(); ++n)
      if (t.edges[i].label.coeff(n) != 0) mono[i].push_back({n, t.edges[i].label.coeff(n)});
  // a constant term has no niche; it is not a reference label
  for (int i = 0; i < ne; ++i)
    if (t.edges[i].label.coeff(0) != 0) throw std::invalid_argument("labels must vanish at 0");
  LimitResult res;
  Rational m3 = p.m3w * p.m3x / 6;
  for (const auto& rho0 : enumerate_split_partitions(t.color)) {
    auto q = quotient(t, rho0);
    auto rep = classify(q);
    if (!rep.is_pseudo_cactus) continue;
    auto [v1, v2] = detail::color_counts(q);
    Rational base = detail::power(p.psi1, v1) * detail::power(p.psi2, v2) *
                    detail::power(p.psi0, static_cast<int>(rep.two_cycles.size() + rep.long_cycles.size()));
    Rational term = 0;
    std::vector<int> pick(ne, 0);
    bool any = true;
    for (int i = 0; i < ne; ++i) any = any && !mono[i].empty();
    while (any) {
      Rational coef = 1;
      std::vector<int> n(ne);
      for (int i = 0; i < ne; ++i) {
        n[i] = mono[i][pick[i]].first;
        coef *= mono[i][pick[i]].second;
      }
      Rational w = coef;
      for (int e : rep.cut_edges) w *= m3 * expect_derivative(Polynomial::monomial(n[e]), 3);
      for (const auto& c : rep.two_cycles) w *= gaussian_moment(n[c[0]] + n[c[1]]);
      for (const auto& c : rep.long_cycles)
        for (int e : c) w *= expect_derivative(Polynomial::monomial(n[e]), 1);
      if (w != 0) {
        TestGraph<int> tn = t.relabel([](const Polynomial&) { return 0; });
        for (int i = 0; i < ne; ++i) tn.edges[i].label = n[i];
        w *= delta0_graphon(detail::pi0_quotient(tn, rho0, rep), p);
        term += w;
      }
      int k = 0;
      while (k < ne && ++pick[k] == static_cast<int>(mono[k].size())) pick[k++] = 0;
      if (k == ne) break;
    }
    term *= base;
    if (term != 0) res.breakdown.push_back({rho0, "", term});
    res.value += term;
  }
  return res;
}

enum class Part { lin, per, B };

namespace detail {

inline char part_char(Part c) { return c == Part::lin ? 'L' : c == Part::per ? 'P' : 'B'; }

// cut edges B; 2-cycles both lin or both per; longer cycles all lin
inline bool well_colored(const StrongComponentReport& rep, const std::vector<Part>& th) {
  for (int e : rep.cut_edges)
    if (th[e] != Part::B) return false;
  for (const auto& c : rep.two_cycles)
    if (th[c[0]] != th[c[1]] || th[c[0]] == Part::B) return false;
  for (const auto& c : rep.long_cycles)
    for (int e : c)
      if (th[e] != Part::lin) return false;
  return true;
}

// Limit of one well-colored quotient for the equivalent families: lin edges carry
// E[h'(t M2)], per pairs sum_m E[h^(m)(t M2)] E[h'^(m)(t M2)] M2^{2m} / m!, B edges
// (m3w m3x/6) L3 E[h'''(t M2)], with M2^2 and L3 the graphon limits.
inline Rational colored_term(const RefGraph& q, const StrongComponentReport& rep, const std::vector<Part>& th,
                             const LimitParams& p) {
  GraphonCells cells(p);
  std::map<const Polynomial*, std::map<int, std::vector<Rational>>> smooth;
  auto sm = [&](const Polynomial& h, int m) -> const std::vector<Rational>& {
    auto& slot = smooth[&h];
    auto it = slot.find(m);
    if (it == slot.end()) it = slot.emplace(m, gaussian_smoothing_sq(h.derivative(m))).first;
    return it->second;
  };
  Rational m3 = p.m3w * p.m3x / 6;
  auto [v1, v2] = color_counts(q);
  Rational base = power(p.psi1, v1) * power(p.psi2, v2) *
                  power(p.psi0, static_cast<int>(rep.two_cycles.size() + rep.long_cycles.size()));
  Rational total = 0;
  std::map<std::pair<int, int>, std::pair<Rational, Rational>> pair_cache;  // (t,s) -> (mu2, L3)
  auto cellpair = [&](int t, int s) -> const std::pair<Rational, Rational>& {
    auto it = pair_cache.find({t, s});
    if (it == pair_cache.end())
      it = pair_cache
               .emplace(std::make_pair(t, s), std::make_pair(cells.integrate_v0({{t, 2}}, {{s, 2}}),
                                                             cells.integrate_v0({{t, 3}}, {{s, 3}})))
               .first;
    return it->second;
  };
  for_each_cell_assignment(q.color, cells, [&](const std::vector<int>& a, const Rational& meas) {
    Rational f = meas;
    for (int e : rep.cut_edges) {
      const auto& ed = q.edges[e];
      const auto& [mu2, l3] = cellpair(a[ed.dst], a[ed.src]);
      f *= m3 * l3 * eval_sq(sm(ed.label, 3), mu2);
      if (f == 0) return;
    }
    for (const auto& c : rep.two_cycles) {
      const auto& e1 = q.edges[c[0]];
      const auto& e2 = q.edges[c[1]];
      const auto& [mu2, l3] = cellpair(a[e1.dst], a[e1.src]);
      if (th[c[0]] == Part::lin) {
        f *= eval_sq(sm(e1.label, 1), mu2) * eval_sq(sm(e2.label, 1), mu2) * mu2;
      } else {
        Rational s = 0;
        int top = std::min(e1.label.degree(), e2.label.degree());
        for (int m = 2; m <= top; ++m)
          s += eval_sq(sm(e1.label, m), mu2) * eval_sq(sm(e2.label, m), mu2) * power(mu2, m) /
               Rational(factorial(m));
        f *= s;
      }
      if (f == 0) return;
    }
    for (const auto& c : rep.long_cycles) {
      std::vector<std::pair<int, int>> wt, xs;
      for (int e : c) {
        const auto& ed = q.edges[e];
        f *= eval_sq(sm(ed.label, 1), cellpair(a[ed.dst], a[ed.src]).first);
        wt.push_back({a[ed.dst], 1});
        xs.push_back({a[ed.src], 1});
      }
      if (f == 0) return;
      f *= cells.integrate_v0(wt, xs);
    }
    total += f;
  });
  return base * total;
}

template <class Allow>
LimitResult colored_sum(const RefGraph& t, const LimitParams& p, Allow&& allow) {
  p.validate();
  validate_reference(t, kMaxLimitEdges);
  int ne = t.num_edges();
  LimitResult res;
  for (const auto& rho0 : enumerate_split_partitions(t.color)) {
    auto q = quotient(t, rho0);
    auto rep = classify(q);
    if (!rep.is_pseudo_cactus) continue;
    std::vector<int> code(ne, 0);
    while (true) {
      std::vector<Part> th(ne);
      for (int i = 0; i < ne; ++i) th[i] = static_cast<Part>(code[i]);
      if (allow(th) && well_colored(rep, th)) {
        Rational v = colored_term(q, rep, th, p);
        if (v != 0) {
          std::string s;
          for (Part c : th) s += part_char(c);
          res.breakdown.push_back({rho0, s, v});
          res.value += v;
        }
      }
      int k = 0;
      while (k < ne && ++code[k] == 3) code[k++] = 0;
      if (k == ne) break;
    }
  }
  return res;
}

}  // namespace detail

// Sum over colorings theta: E -> {lin, per, B} of well-colored pseudo-cactus quotients.
inline LimitResult limit_equivalent_sum(const RefGraph& t, const LimitParams& p) {
  for (const auto& e : t.edges)
    if (!e.label.is_odd()) throw std::invalid_argument("limit_equivalent_sum requires odd labels");
  return detail::colored_sum(t, p, [](const std::vector<Part>&) { return true; });
}

inline LimitResult limit_of_part(const RefGraph& t, const LimitParams& p, Part part) {
  return detail::colored_sum(t, p, [part](const std::vector<Part>& th) {
    return std::all_of(th.begin(), th.end(), [part](Part c) { return c == part; });
  });
}

inline LimitResult limit_B(const RefGraph& t, const LimitParams& p) { return limit_of_part(t, p, Part::B); }
inline LimitResult limit_lin(const RefGraph& t, const LimitParams& p) { return limit_of_part(t, p, Part::lin); }
inline LimitResult limit_per(const RefGraph& t, const LimitParams& p) { return limit_of_part(t, p, Part::per); }

struct EtaScanReport {
  long supported = 0;
  int max_twice_eta = -1000;
  long eta_zero = 0;
  bool eta_zero_all_pseudo_cactus = true;
  std::vector<SetPartition> eta_zero_examples;  // first few
};

inline constexpr int kMaxScanLabel = 5;

// Exhaustive scan of split auxiliary partitions under the centered-entry filter.
inline EtaScanReport eta_support_scan(const TestGraph<int>& t, int max_label = kMaxScanLabel) {
  if (t.num_edges() > 3) throw std::length_error("eta scan limited to 3 edges");
  for (const auto& e : t.edges)
    if (e.label > max_label || max_label > kMaxScanLabel) throw std::length_error("eta scan label above cap");
  AuxiliaryGraph a = build_auxiliary(t);
  std::vector<int> refs(a.num_reference);
  std::iota(refs.begin(), refs.end(), 0);
  EtaScanReport r;
  for_each_partition(a.graph.num_vertices(), a.graph.color, [&](const SetPartition& pi) {
    if (!centered_support(a, pi)) return true;
    ++r.supported;
    int te = eta(a, pi).twice_eta;
    r.max_twice_eta = std::max(r.max_twice_eta, te);
    if (te == 0) {
      ++r.eta_zero;
      if (r.eta_zero_examples.size() < 8) r.eta_zero_examples.push_back(pi);
      if (!classify(quotient(t, restrict(pi, refs))).is_pseudo_cactus) r.eta_zero_all_pseudo_cactus = false;
    }
    return true;
  });
  return r;
}

}  // namespace pwt
