#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "graph.hpp"
#include "rng.hpp"

namespace pwt {

struct BlockLayout {
  long N0 = 0, N1 = 0, N2 = 0;

  long N() const { return N0 + N1 + N2; }
  long size(int c) const { return c == 0 ? N0 : c == 1 ? N1 : N2; }
  long offset(int c) const { return c == 0 ? 0 : c == 1 ? N0 : N0 + N1; }
  double psi(int c) const { return static_cast<double>(size(c)) / static_cast<double>(N()); }
};

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// A matrix of size N_target x N_source, placed in block (target, source).
template <class Scalar>
struct BlockMatrix {
  Mat<Scalar> m;
  int src = 0;
  int tgt = 0;
};

template <class Scalar>
using Family = std::map<std::string, BlockMatrix<Scalar>>;

template <class Scalar>
Mat<Scalar> embed(const Mat<Scalar>& a, int tgt, int src, const BlockLayout& lay) {
  if (a.rows() != lay.size(tgt) || a.cols() != lay.size(src)) throw std::invalid_argument("embed: dimension mismatch");
  Mat<Scalar> big = Mat<Scalar>::Zero(lay.N(), lay.N());
  if (a.size()) big.block(lay.offset(tgt), lay.offset(src), a.rows(), a.cols()) = a;
  return big;
}

template <class Scalar>
Mat<Scalar> extract(const Mat<Scalar>& big, int tgt, int src, const BlockLayout& lay) {
  return big.block(lay.offset(tgt), lay.offset(src), lay.size(tgt), lay.size(src));
}

namespace detail {

template <class Scalar>
const BlockMatrix<Scalar>& lookup(const Family<Scalar>& fam, const std::string& label) {
  auto it = fam.find(label);
  if (it == fam.end()) throw std::invalid_argument("unresolved label: " + label);
  return it->second;
}

// false when some edge label sits in a block that the vertex colors exclude,
// in which case every split evaluation vanishes
template <class Scalar>
bool blocks_compatible(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay) {
  for (const auto& e : t.edges) {
    const auto& a = lookup(fam, e.label);
    if (a.m.rows() != lay.size(a.tgt) || a.m.cols() != lay.size(a.src))
      throw std::invalid_argument("matrix '" + e.label + "' does not match its declared blocks");
    if (t.color[e.src] != a.src || t.color[e.dst] != a.tgt) return false;
  }
  return true;
}

// Enumerates split maps in a connectivity-friendly order, pruning on zero partial products.
template <class Scalar>
Scalar enumerate_trace(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay,
                       bool injective) {
  if (!blocks_compatible(t, fam, lay)) return Scalar(0);
  int n = t.num_vertices();
  std::vector<int> order, pos(n, -1);
  for (int s = 0; s < n; ++s) {
    if (pos[s] >= 0) continue;
    std::vector<int> q{s};
    pos[s] = static_cast<int>(order.size());
    order.push_back(s);
    for (std::size_t h = 0; h < q.size(); ++h)
      for (const auto& e : t.edges)
        for (auto [a, b] : {std::pair{e.src, e.dst}, std::pair{e.dst, e.src}})
          if (a == q[h] && pos[b] < 0) {
            pos[b] = static_cast<int>(order.size());
            order.push_back(b);
            q.push_back(b);
          }
  }
  // edges checked once both endpoints are placed
  std::vector<std::vector<int>> ready(n);
  for (int i = 0; i < t.num_edges(); ++i)
    ready[std::max(pos[t.edges[i].src], pos[t.edges[i].dst])].push_back(i);
  std::vector<const Mat<Scalar>*> mats;
  for (const auto& e : t.edges) mats.push_back(&lookup(fam, e.label).m);
  std::vector<long> phi(n, -1);
  std::vector<std::vector<char>> taken(3);
  for (int c = 0; c < 3; ++c) taken[c].assign(lay.size(c), 0);
  Scalar total(0);
  auto rec = [&](auto&& self, int k, Scalar acc) -> void {
    if (k == n) {
      total += acc;
      return;
    }
    int v = order[k], c = t.color[v];
    for (long i = 0; i < lay.size(c); ++i) {
      if (injective && taken[c][i]) continue;
      phi[v] = i;
      Scalar a = acc;
      for (int ei : ready[k]) {
        const auto& e = t.edges[ei];
        a *= (*mats[ei])(phi[e.dst], phi[e.src]);
        if (a == Scalar(0)) break;
      }
      if (a == Scalar(0)) continue;
      if (injective) taken[c][i] = 1;
      self(self, k + 1, a);
      if (injective) taken[c][i] = 0;
    }
  };
  rec(rec, 0, Scalar(1));
  return total;
}

template <class Scalar>
struct Factor {
  std::vector<int> vars;  // 0, 1 or 2 vertices; matrix rows follow vars[0]
  Mat<Scalar> data;
};

// Variable elimination restricted to factors on at most two vertices.
// Returns false if the graph has no such elimination order.
template <class Scalar>
bool eliminate_trace(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay,
                     Scalar& out) {
  int n = t.num_vertices();
  // structural feasibility first
  {
    std::vector<std::set<int>> nb(n);
    for (const auto& e : t.edges)
      if (e.src != e.dst) {
        nb[e.src].insert(e.dst);
        nb[e.dst].insert(e.src);
      }
    std::vector<char> gone(n, 0);
    for (int step = 0; step < n; ++step) {
      int best = -1;
      for (int v = 0; v < n; ++v)
        if (!gone[v] && (best < 0 || nb[v].size() < nb[best].size())) best = v;
      if (nb[best].size() > 2) return false;
      std::vector<int> ns(nb[best].begin(), nb[best].end());
      for (int u : ns) nb[u].erase(best);
      if (ns.size() == 2) {
        nb[ns[0]].insert(ns[1]);
        nb[ns[1]].insert(ns[0]);
      }
      gone[best] = 1;
    }
  }
  if (!blocks_compatible(t, fam, lay)) {
    out = Scalar(0);
    return true;
  }
  std::vector<Factor<Scalar>> fs;
  for (const auto& e : t.edges) {
    const auto& a = lookup(fam, e.label).m;
    if (e.src == e.dst) {
      if (a.rows() != a.cols()) throw std::invalid_argument("loop on a non-square label");
      fs.push_back({{e.src}, a.diagonal()});
    } else {
      fs.push_back({{e.dst, e.src}, a});
    }
  }
  Scalar scalar(1);
  std::vector<char> gone(n, 0);
  for (int step = 0; step < n; ++step) {
    std::vector<std::set<int>> nb(n);
    for (const auto& f : fs)
      if (f.vars.size() == 2) {
        nb[f.vars[0]].insert(f.vars[1]);
        nb[f.vars[1]].insert(f.vars[0]);
      }
    int v = -1;
    for (int u = 0; u < n; ++u)
      if (!gone[u] && (v < 0 || nb[u].size() < nb[v].size())) v = u;
    long nv = lay.size(t.color[v]);
    Mat<Scalar> d = Mat<Scalar>::Ones(nv, 1);
    std::map<int, Mat<Scalar>> pmat;  // other vertex -> (n_other x n_v)
    std::vector<Factor<Scalar>> keep;
    for (auto& f : fs) {
      if (f.vars.size() == 1 && f.vars[0] == v) {
        d = d.cwiseProduct(f.data);
      } else if (f.vars.size() == 2 && (f.vars[0] == v || f.vars[1] == v)) {
        int u = f.vars[0] == v ? f.vars[1] : f.vars[0];
        Mat<Scalar> p = f.vars[0] == v ? Mat<Scalar>(f.data.transpose()) : f.data;
        auto it = pmat.find(u);
        if (it == pmat.end())
          pmat.emplace(u, std::move(p));
        else
          it->second = it->second.cwiseProduct(p);
      } else {
        keep.push_back(std::move(f));
      }
    }
    fs = std::move(keep);
    if (pmat.empty()) {
      scalar *= d.sum();
    } else if (pmat.size() == 1) {
      auto& [u, p] = *pmat.begin();
      fs.push_back({{u}, p * d});
    } else {
      auto it = pmat.begin();
      auto& [u1, p1] = *it++;
      auto& [u2, p2] = *it;
      fs.push_back({{u1, u2}, p1 * d.asDiagonal() * p2.transpose()});
    }
    gone[v] = 1;
  }
  for (const auto& f : fs) scalar *= f.data(0, 0);
  out = scalar;
  return true;
}

}  // namespace detail

// Sum over split maps phi of prod_e A_e(phi(dst), phi(src)).
template <class Scalar>
Scalar combinatorial_trace(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay) {
  Scalar r;
  if (detail::eliminate_trace(t, fam, lay, r)) return r;
  return detail::enumerate_trace(t, fam, lay, false);
}

template <class Scalar>
Scalar combinatorial_trace_enumerated(const TestGraph<std::string>& t, const Family<Scalar>& fam,
                                      const BlockLayout& lay) {
  return detail::enumerate_trace(t, fam, lay, false);
}

template <class Scalar>
Scalar injective_trace(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay) {
  return detail::enumerate_trace(t, fam, lay, true);
}

// Naive oracle: all maps V -> [N] evaluated on the embedded square matrices.
template <class Scalar>
Scalar combinatorial_trace_all_maps(const TestGraph<std::string>& t, const Family<Scalar>& fam,
                                    const BlockLayout& lay) {
  std::map<std::string, Mat<Scalar>> big;
  for (const auto& [k, a] : fam) big[k] = embed(a.m, a.tgt, a.src, lay);
  int n = t.num_vertices();
  long N = lay.N();
  std::vector<long> phi(n, 0);
  Scalar total(0);
  while (true) {
    Scalar p(1);
    for (const auto& e : t.edges) p *= big.at(e.label)(phi[e.dst], phi[e.src]);
    total += p;
    int k = 0;
    while (k < n && ++phi[k] == N) phi[k++] = 0;
    if (k == n) break;
  }
  return total;
}

// Entry (i,j) of the graph monomial: phi(out) = i, phi(in) = j.
template <class Scalar>
Mat<Scalar> eval_monomial(const TestGraph<std::string>& t, int in, int out, const Family<Scalar>& fam,
                          const BlockLayout& lay) {
  long ni = lay.size(t.color[out]), nj = lay.size(t.color[in]);
  Mat<Scalar> r(ni, nj);
  BlockLayout one = lay;
  for (long i = 0; i < ni; ++i)
    for (long j = 0; j < nj; ++j) {
      if (in == out && i != j) {
        r(i, j) = Scalar(0);
        continue;
      }
      // pin the endpoints by restricting their blocks with indicator loops
      Family<Scalar> f = fam;
      TestGraph<std::string> g = t;
      Mat<Scalar> ei = Mat<Scalar>::Zero(lay.size(t.color[out]), lay.size(t.color[out]));
      ei(i, i) = Scalar(1);
      f["@pin_out"] = {ei, t.color[out], t.color[out]};
      g.add_edge(out, out, "@pin_out");
      if (in != out) {
        Mat<Scalar> ej = Mat<Scalar>::Zero(nj, nj);
        ej(j, j) = Scalar(1);
        f["@pin_in"] = {ej, t.color[in], t.color[in]};
        g.add_edge(in, in, "@pin_in");
      }
      r(i, j) = combinatorial_trace(g, f, one);
    }
  return r;
}

struct MoebiusResult {
  std::int64_t lhs = 0;
  std::int64_t rhs = 0;
  bool equal = false;
};

inline MoebiusResult moebius_check(const TestGraph<std::string>& t, const Family<std::int64_t>& fam,
                                   const BlockLayout& lay) {
  if (t.num_vertices() > 8) throw std::length_error("moebius_check limited to 8 vertices");
  MoebiusResult r;
  r.lhs = combinatorial_trace_enumerated(t, fam, lay);
  for (const auto& pi : enumerate_split_partitions(t.color)) r.rhs += injective_trace(quotient(t, pi), fam, lay);
  r.equal = r.lhs == r.rhs;
  return r;
}

inline Integer falling(long m, long k) {
  Integer r = 1;
  for (long i = 0; i < k; ++i) r *= (m - i);
  return r;
}

inline Integer injection_count(const std::vector<int>& color, const BlockLayout& lay) {
  std::array<long, 3> cnt{0, 0, 0};
  for (int c : color) ++cnt[c];
  return falling(lay.N0, cnt[0]) * falling(lay.N1, cnt[1]) * falling(lay.N2, cnt[2]);
}

// Average over uniform injective split maps; exact for integer scalars.
template <class Scalar>
auto delta0_exact(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay) {
  std::array<long, 3> per{0, 0, 0};
  for (int c : t.color) ++per[c];
  for (int c = 0; c < 3; ++c)
    if (falling(lay.size(c), per[c]) > 1000000) throw std::length_error("delta0 exact mode: too many injective maps");
  Integer cnt = injection_count(t.color, lay);
  if (cnt == 0) throw std::invalid_argument("no injective split map exists");
  Scalar tr = injective_trace(t, fam, lay);
  if constexpr (std::is_integral_v<Scalar>) {
    return Rational(Integer(tr)) / Rational(cnt);
  } else {
    return static_cast<double>(tr) / cnt.convert_to<double>();
  }
}

template <class Scalar>
double delta0_monte_carlo(const TestGraph<std::string>& t, const Family<Scalar>& fam, const BlockLayout& lay,
                          long trials, std::uint64_t seed) {
  if (trials <= 0) throw std::invalid_argument("trials must be positive");
  if (!detail::blocks_compatible(t, fam, lay)) return 0.0;
  std::array<long, 3> cnt{0, 0, 0};
  for (int c : t.color) ++cnt[c];
  for (int c = 0; c < 3; ++c)
    if (cnt[c] > lay.size(c)) throw std::invalid_argument("no injective split map exists");
  std::vector<const Mat<Scalar>*> mats;
  for (const auto& e : t.edges) mats.push_back(&detail::lookup(fam, e.label).m);
  Engine g = make_engine(seed, 0, 7);
  double sum = 0;
  std::vector<long> phi(t.num_vertices());
  for (long r = 0; r < trials; ++r) {
    std::array<std::vector<long>, 3> used;
    for (int v = 0; v < t.num_vertices(); ++v) {
      int c = t.color[v];
      long pick;
      do {
        pick = static_cast<long>(g() % static_cast<std::uint64_t>(lay.size(c)));
      } while (std::find(used[c].begin(), used[c].end(), pick) != used[c].end());
      used[c].push_back(pick);
      phi[v] = pick;
    }
    double p = 1;
    for (std::size_t i = 0; i < t.edges.size(); ++i)
      p *= static_cast<double>((*mats[i])(phi[t.edges[i].dst], phi[t.edges[i].src]));
    sum += p;
  }
  return sum / static_cast<double>(trials);
}

struct Estimate {
  double mean = 0;
  double std_error = 0;  // NaN when fewer than two trials
  long trials = 0;
  std::vector<double> values;
};

inline Estimate summarize(std::vector<double> v) {
  Estimate e;
  e.trials = static_cast<long>(v.size());
  double s = 0;
  for (double x : v) s += x;
  e.mean = v.empty() ? 0 : s / static_cast<double>(v.size());
  if (v.size() >= 2) {
    double q = 0;
    for (double x : v) q += (x - e.mean) * (x - e.mean);
    e.std_error = std::sqrt(q / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  } else {
    e.std_error = std::nan("");
  }
  e.values = std::move(v);
  return e;
}

// Runs f(trial) for every trial index, optionally on several threads; results kept in trial order.
template <class F>
std::vector<double> run_trials(long trials, int threads, F&& f) {
  std::vector<double> out(trials);
  threads = std::max(1, std::min<int>(threads, static_cast<int>(trials)));
  if (threads == 1) {
    for (long r = 0; r < trials; ++r) out[r] = f(r);
    return out;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (long r = w; r < trials; r += threads) out[r] = f(r);
    });
  for (auto& th : pool) th.join();
  return out;
}

// Monte Carlo estimate of E[N^{-1} Tr T(A)], sampler(trial_seed) -> Family<double>.
template <class Sampler>
Estimate tau_estimate(const TestGraph<std::string>& t, Sampler&& sampler, const BlockLayout& lay, long trials,
                      std::uint64_t seed, int threads = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  auto vals = run_trials(trials, threads, [&](long r) {
    Family<double> fam = sampler(derive_seed(seed, static_cast<std::uint64_t>(r)));
    return combinatorial_trace(t, fam, lay) / static_cast<double>(lay.N());
  });
  return summarize(std::move(vals));
}

}  // namespace pwt
