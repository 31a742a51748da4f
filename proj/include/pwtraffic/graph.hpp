#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "partitions.hpp"

namespace pwt {

template <class Label>
struct Edge {
  int id;
  int src;
  int dst;
  Label label;
};

// Directed multigraph with a split color (0,1,2) per vertex.
template <class Label>
struct TestGraph {
  std::vector<int> color;
  std::vector<Edge<Label>> edges;

  int num_vertices() const { return static_cast<int>(color.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  int add_vertex(int c) {
    color.push_back(c);
    return num_vertices() - 1;
  }
  int add_edge(int src, int dst, Label label) {
    if (src < 0 || dst < 0 || src >= num_vertices() || dst >= num_vertices())
      throw std::invalid_argument("edge endpoint out of range");
    int id = edges.empty() ? 0 : edges.back().id + 1;
    edges.push_back({id, src, dst, std::move(label)});
    return static_cast<int>(edges.size()) - 1;
  }

  // every edge runs from a color-2 vertex to a color-1 vertex
  bool is_reference() const {
    for (const auto& e : edges)
      if (color[e.src] != 2 || color[e.dst] != 1) return false;
    return std::all_of(color.begin(), color.end(), [](int c) { return c == 1 || c == 2; });
  }

  template <class F>
  auto relabel(F&& f) const {
    using L2 = decltype(f(edges.front().label));
    TestGraph<L2> g;
    g.color = color;
    for (const auto& e : edges) g.edges.push_back({e.id, e.src, e.dst, f(e.label)});
    return g;
  }
};

template <class Label>
TestGraph<Label> quotient(const TestGraph<Label>& t, const SetPartition& pi) {
  if (pi.ground_size() != t.num_vertices()) throw std::invalid_argument("partition ground set does not match graph");
  TestGraph<Label> q;
  for (const auto& b : pi.blocks()) {
    for (int v : b)
      if (t.color[v] != t.color[b.front()]) {
        std::string msg = "partition is not split: block {";
        for (std::size_t i = 0; i < b.size(); ++i) msg += (i ? "," : "") + std::to_string(b[i] + 1);
        throw std::invalid_argument(msg + "} mixes colors");
      }
    q.color.push_back(t.color[b.front()]);
  }
  for (const auto& e : t.edges) q.edges.push_back({e.id, pi.block_of(e.src), pi.block_of(e.dst), e.label});
  return q;
}

// undirected components; returns (component index per vertex, count)
template <class Label>
std::pair<std::vector<int>, int> components(const TestGraph<Label>& g, int skip_edge = -1) {
  int n = g.num_vertices();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < g.num_edges(); ++i) {
    if (i == skip_edge) continue;
    parent[find(g.edges[i].src)] = find(g.edges[i].dst);
  }
  std::vector<int> comp(n, -1);
  int c = 0;
  std::map<int, int> root_id;
  for (int v = 0; v < n; ++v) {
    auto [it, fresh] = root_id.emplace(find(v), c);
    if (fresh) ++c;
    comp[v] = it->second;
  }
  return {comp, c};
}

template <class Label>
bool is_connected(const TestGraph<Label>& g) {
  return g.num_vertices() > 0 && components(g).second == 1;
}

struct Skeleton {
  std::vector<std::pair<int, int>> edges;  // unordered endpoint pairs, u <= v
  std::vector<int> multiplicity;
};

template <class Label>
Skeleton skeleton(const TestGraph<Label>& g) {
  std::map<std::pair<int, int>, int> m;
  for (const auto& e : g.edges) ++m[{std::min(e.src, e.dst), std::max(e.src, e.dst)}];
  Skeleton s;
  for (auto& [k, c] : m) {
    s.edges.push_back(k);
    s.multiplicity.push_back(c);
  }
  return s;
}

template <class Label>
int forest_defect(const TestGraph<Label>& g) {
  return g.num_vertices() - components(g).second - static_cast<int>(skeleton(g).edges.size());
}

// Simple cycles as edge-index lists, directions ignored. A pair of distinct
// parallel edges is a 2-cycle, a loop a 1-cycle. Each cycle is reported once:
// it starts at its least edge index and continues through larger indices.
template <class Label>
std::vector<std::vector<int>> simple_cycles(const TestGraph<Label>& g) {
  int n = g.num_vertices(), m = g.num_edges();
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (edge, other end)
  for (int i = 0; i < m; ++i) {
    adj[g.edges[i].src].push_back({i, g.edges[i].dst});
    if (g.edges[i].src != g.edges[i].dst) adj[g.edges[i].dst].push_back({i, g.edges[i].src});
  }
  std::vector<std::vector<int>> out;
  std::vector<char> used(n, 0);
  std::vector<int> path;
  for (int e0 = 0; e0 < m; ++e0) {
    int a = g.edges[e0].src, b = g.edges[e0].dst;
    if (a == b) {
      out.push_back({e0});
      continue;
    }
    path.assign(1, e0);
    std::fill(used.begin(), used.end(), 0);
    used[a] = used[b] = 1;
    auto dfs = [&](auto&& self, int v) -> void {
      for (auto [e, w] : adj[v]) {
        if (e <= e0) continue;
        if (w == a) {
          path.push_back(e);
          out.push_back(path);
          path.pop_back();
        } else if (!used[w]) {
          used[w] = 1;
          path.push_back(e);
          self(self, w);
          path.pop_back();
          used[w] = 0;
        }
      }
    };
    dfs(dfs, b);
  }
  return out;
}

// bridges by removal: an edge whose deletion increases the component count
template <class Label>
std::vector<int> cut_edges(const TestGraph<Label>& g) {
  int base = components(g).second;
  std::vector<int> out;
  for (int i = 0; i < g.num_edges(); ++i)
    if (components(g, i).second > base) out.push_back(i);
  return out;
}

struct StrongComponentReport {
  std::vector<int> cut_edges;                // edge indices
  std::vector<std::vector<int>> two_cycles;  // edge index pairs
  std::vector<std::vector<int>> long_cycles; // length >= 3, in traversal order
  std::vector<std::vector<int>> cycles;      // all simple cycles
  std::vector<int> cycles_per_edge;
  bool is_pseudo_cactus = false;
  bool is_cactus = false;
  bool is_tree = false;
  bool is_double_tree = false;
};

template <class Label>
StrongComponentReport classify(const TestGraph<Label>& g) {
  StrongComponentReport r;
  r.cycles = simple_cycles(g);
  r.cycles_per_edge.assign(g.num_edges(), 0);
  for (const auto& c : r.cycles)
    for (int e : c) ++r.cycles_per_edge[e];
  r.cut_edges = cut_edges(g);
  r.is_pseudo_cactus = true;
  r.is_cactus = true;
  for (int c : r.cycles_per_edge) {
    if (c > 1) r.is_pseudo_cactus = false;
    if (c != 1) r.is_cactus = false;
  }
  r.is_cactus = r.is_cactus && r.is_pseudo_cactus;
  r.is_tree = r.cycles.empty();
  for (const auto& c : r.cycles) (c.size() == 2 ? r.two_cycles : r.long_cycles).push_back(c);
  r.is_double_tree = r.is_cactus && r.long_cycles.empty();
  return r;
}

// Connected reference shapes (V2 -> V1 multigraphs) with 1..max_edges edges, one
// per isomorphism class; labels are left at 0.
inline std::vector<TestGraph<int>> reference_shapes(int max_edges) {
  std::vector<TestGraph<int>> out;
  std::set<std::vector<std::pair<int, int>>> seen;
  for (int m = 1; m <= max_edges; ++m)
    for (int n2 = 1; n2 <= m; ++n2)
      for (int n1 = 1; n1 + n2 <= m + 1; ++n1) {
        int slots = n1 * n2;
        std::vector<int> pick(m, 0);  // non-decreasing multiset of (src,dst) slots
        while (true) {
          TestGraph<int> g;
          for (int i = 0; i < n2; ++i) g.add_vertex(2);
          for (int i = 0; i < n1; ++i) g.add_vertex(1);
          for (int k : pick) g.add_edge(k / n1, n2 + k % n1, 0);
          std::vector<int> deg(n1 + n2, 0);
          for (const auto& e : g.edges) ++deg[e.src], ++deg[e.dst];
          bool used = std::all_of(deg.begin(), deg.end(), [](int d) { return d > 0; });
          if (used && is_connected(g)) {
            // canonical form: least sorted edge list over relabelings within colors
            std::vector<int> p2(n2), p1(n1);
            std::iota(p2.begin(), p2.end(), 0);
            std::vector<std::pair<int, int>> best;
            do {
              std::iota(p1.begin(), p1.end(), 0);
              do {
                std::vector<std::pair<int, int>> el;
                for (const auto& e : g.edges) el.push_back({p2[e.src], p1[e.dst - n2]});
                std::sort(el.begin(), el.end());
                if (best.empty() || el < best) best = el;
              } while (std::next_permutation(p1.begin(), p1.end()));
            } while (std::next_permutation(p2.begin(), p2.end()));
            if (seen.insert(best).second) out.push_back(g);
          }
          int k = m - 1;
          while (k >= 0 && pick[k] == slots - 1) --k;
          if (k < 0) break;
          ++pick[k];
          for (int j = k + 1; j < m; ++j) pick[j] = pick[k];
        }
      }
  return out;
}

// ---------------------------------------------------------------- auxiliary graph

enum class AuxLabel { w, x };

struct AuxiliaryGraph {
  TestGraph<AuxLabel> graph;
  int num_reference = 0;
  std::vector<std::vector<int>> niche_vertices;  // per reference edge
  std::vector<std::vector<int>> niche_edges;     // per reference edge, w and x edges
  std::vector<int> companion;                    // edge index -> companion edge index
  std::vector<int> origin;                       // edge index -> reference edge index
  std::vector<int> labels;                       // n(e) per reference edge
};

inline AuxiliaryGraph build_auxiliary(const TestGraph<int>& t) {
  AuxiliaryGraph a;
  a.graph.color = t.color;
  a.num_reference = t.num_vertices();
  for (int i = 0; i < t.num_edges(); ++i) {
    const auto& e = t.edges[i];
    if (e.label < 1) throw std::invalid_argument("reference edge label must be >= 1");
    a.labels.push_back(e.label);
    a.niche_vertices.emplace_back();
    a.niche_edges.emplace_back();
    for (int k = 0; k < e.label; ++k) {
      int v = a.graph.add_vertex(0);
      int we = a.graph.add_edge(v, e.dst, AuxLabel::w);
      int xe = a.graph.add_edge(e.src, v, AuxLabel::x);
      a.niche_vertices.back().push_back(v);
      a.niche_edges.back().push_back(we);
      a.niche_edges.back().push_back(xe);
      a.companion.resize(xe + 1);
      a.companion[we] = xe;
      a.companion[xe] = we;
      a.origin.push_back(i);
      a.origin.push_back(i);
    }
  }
  return a;
}

// eta is a half-integer; these return 2*eta
struct EtaReport {
  int twice_eta;
  int twice_eta1;
  int twice_eta2;
};

inline EtaReport eta(const AuxiliaryGraph& a, const SetPartition& pi) {
  if (!is_split(pi, a.graph.color)) throw std::invalid_argument("eta requires a split partition");
  int sum_n = std::accumulate(a.labels.begin(), a.labels.end(), 0);
  int ne = static_cast<int>(a.labels.size());
  int twice = 2 * pi.num_blocks() - 2 - ne - sum_n;
  // w-graph: V1 and V0 blocks with w-edges
  int nvw = 0, nv2 = 0;
  std::vector<int> idx(pi.num_blocks(), -1);
  for (int b = 0; b < pi.num_blocks(); ++b) {
    int c = a.graph.color[pi.blocks()[b].front()];
    if (c == 2) {
      ++nv2;
    } else {
      idx[b] = nvw++;
    }
  }
  std::vector<int> parent(nvw);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : a.graph.edges)
    if (e.label == AuxLabel::w) parent[find(idx[pi.block_of(e.src)])] = find(idx[pi.block_of(e.dst)]);
  int cw = 0;
  for (int i = 0; i < nvw; ++i) cw += find(i) == i;
  int t1 = 2 * nvw - 2 * cw - sum_n;
  int t2 = 2 * cw + 2 * nv2 - 2 - ne;
  return {twice, t1, t2};
}

// rho~: V1 vertices merged when connected in the w-quotient, V2 as in pi
inline SetPartition rho_tilde(const AuxiliaryGraph& a, const SetPartition& pi) {
  if (!is_split(pi, a.graph.color)) throw std::invalid_argument("rho_tilde requires a split partition");
  int nb = pi.num_blocks();
  std::vector<int> parent(nb);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : a.graph.edges)
    if (e.label == AuxLabel::w) parent[find(pi.block_of(e.src))] = find(pi.block_of(e.dst));
  std::vector<int> ids(a.num_reference);
  for (int v = 0; v < a.num_reference; ++v) {
    int b = pi.block_of(v);
    ids[v] = a.graph.color[v] == 1 ? nb + find(b) : b;
  }
  return SetPartition::canonical(ids);
}

// Multiplicities of the w- and x-edge groups of the quotient by pi
inline std::vector<std::pair<AuxLabel, int>> edge_groups(const AuxiliaryGraph& a, const SetPartition& pi) {
  std::map<std::tuple<int, int, int>, int> m;
  for (const auto& e : a.graph.edges)
    ++m[{static_cast<int>(e.label), pi.block_of(e.src), pi.block_of(e.dst)}];
  std::vector<std::pair<AuxLabel, int>> out;
  for (auto& [k, c] : m) out.push_back({static_cast<AuxLabel>(std::get<0>(k)), c});
  return out;
}

// centered-entry support: no label group of multiplicity one
inline bool centered_support(const AuxiliaryGraph& a, const SetPartition& pi) {
  for (auto [l, c] : edge_groups(a, pi))
    if (c == 1) return false;
  return true;
}

}  // namespace pwt
