// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <pwtraffic/experiment.hpp>

using namespace pwt;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail, double seconds) {
  std::printf("criterion %d: %s  %s  [%.1fs]\n", id, ok ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

using IMat = Mat<std::int64_t>;

IMat random_int(long r, long c, std::mt19937& g) {
  std::uniform_int_distribution<int> d(-3, 3);
  IMat m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = d(g);
  return m;
}

void moebius(int id) {
  Timer t;
  std::mt19937 g(101);
  int ok = 0;
  for (int trial = 0; trial < 200; ++trial) {
    BlockLayout lay;
    do lay = {static_cast<long>(g() % 3), static_cast<long>(g() % 3), static_cast<long>(g() % 3)};
    while (lay.N() == 0 || lay.N() > 5);
    TestGraph<std::string> tg;
    int nv = 1 + static_cast<int>(g() % 4);
    for (int i = 0; i < nv; ++i) {
      int c;
      do c = static_cast<int>(g() % 3);
      while (lay.size(c) == 0);
      tg.add_vertex(c);
    }
    Family<std::int64_t> fam;
    int ne = static_cast<int>(g() % 6);
    for (int i = 0; i < ne; ++i) {
      int s = g() % nv, d = g() % nv;
      std::string l = "A" + std::to_string(g() % 3);
      // a repeated label reuses its matrix when the colors agree
      if (fam.count(l) && (fam[l].src != tg.color[s] || fam[l].tgt != tg.color[d])) l += "_" + std::to_string(i);
      tg.add_edge(s, d, l);
      if (!fam.count(l)) fam[l] = {random_int(lay.size(tg.color[d]), lay.size(tg.color[s]), g), tg.color[s], tg.color[d]};
    }
    ok += moebius_check(tg, fam, lay).equal;
  }
  double s = t.seconds();
  report(id, ok == 200 && s < 10, std::to_string(ok) + "/200 exact matches", s);
}

void hermite_suite(int id) {
  Timer t;
  bool ok = true;
  for (int n = 1; n <= 8; ++n) ok = ok && hermite(n).derivative() == Rational(n) * hermite(n - 1);
  for (int n = 0; n <= 8; ++n)
    for (int m = 0; m <= 8; ++m)
      ok = ok && expect_product(hermite(n), hermite(m)) == (n == m ? Rational(factorial(n)) : Rational(0));
  for (int d = 0; d <= 8; ++d) {
    std::vector<Rational> c;
    for (int k = 0; k <= d; ++k) c.push_back(Rational((3 * k + 1) % 7 - 3, k + 2));
    auto p = Polynomial::from_power(c);
    ok = ok && Polynomial::from_hermite(p.hermite_coeffs()) == p;
  }
  bool g3 = hermite(3) == Polynomial::from_power({0, -3, 0, 1});
  bool h3 = Polynomial::monomial(3) == hermite(3) + Rational(3) * hermite(1);
  double s = t.seconds();
  report(id, ok && g3 && h3 && s < 1,
         std::string("identities ") + (ok ? "ok" : "broken") + ", g3 " + (g3 ? "ok" : "wrong") + ", h3 " +
             (h3 ? "ok" : "wrong"),
         s);
}

void eta_scan(int id) {
  Timer t;
  int max_all = -100, max_odd = -100;
  long partitions = 0, bad_support = 0;
  for (const auto& shape : reference_shapes(2)) {
    int ne = shape.num_edges();
    std::vector<int> lab(ne, 1);
    while (true) {
      auto tg = shape;
      bool odd = true;
      for (int i = 0; i < ne; ++i) {
        tg.edges[i].label = lab[i];
        odd = odd && lab[i] % 2 == 1;
      }
      auto a = build_auxiliary(tg);
      std::vector<int> refs(tg.num_vertices());
      std::iota(refs.begin(), refs.end(), 0);
      for_each_partition(a.graph.num_vertices(), a.graph.color, [&](const SetPartition& pi) {
        if (!centered_support(a, pi)) return true;
        ++partitions;
        int te = eta(a, pi).twice_eta;
        max_all = std::max(max_all, te);
        if (odd) max_odd = std::max(max_odd, te);
        if (te == 0 && !classify(quotient(tg, restrict(pi, refs))).is_pseudo_cactus) ++bad_support;
        return true;
      });
      int k = 0;
      while (k < ne && ++lab[k] > 5) lab[k++] = 1;
      if (k == ne) break;
    }
  }
  double s = t.seconds();
  std::ostringstream d;
  d << partitions << " supported partitions, max eta " << max_all / 2.0 << " (odd labels only: " << max_odd / 2.0
    << "), eta=0 non-pseudo-cactus: " << bad_support;
  report(id, max_all <= 0 && bad_support == 0 && s < 300, d.str(), s);
}

void identity_grid(int id) {
  Timer t;
  std::vector<LimitParams> grid;
  for (int third = 0; third < 2; ++third)
    for (Rational m3 : {Rational(0), Rational(3, 2)})
      for (bool step : {false, true}) {
        LimitParams p;
        if (!third) {
          p.psi0 = Rational(1, 2);
          p.psi1 = p.psi2 = Rational(1, 4);
        }
        p.m3w = p.m3x = m3;
        if (step) {
          p.gw = StepProfile{{{1, 2}, {Rational(1, 2), 1}}};
          p.gx = StepProfile{{{1, Rational(1, 2)}, {2, 1}}};
        }
        grid.push_back(p);
      }
  long cases = 0, mismatches = 0, nonzero = 0;
  for (const auto& shape : reference_shapes(3)) {
    int ne = shape.num_edges();
    std::vector<int> lab(ne, 1);
    while (true) {
      RefGraph tg = shape.relabel([](int) { return Polynomial(); });
      for (int i = 0; i < ne; ++i) tg.edges[i].label = Polynomial::monomial(lab[i]);
      for (const auto& p : grid) {
        Rational a = limit_pw(tg, p).value;
        ++cases;
        nonzero += a != 0;
        mismatches += a != limit_equivalent_sum(tg, p).value;
      }
      int k = 0;
      while (k < ne && (lab[k] += 2) > 5) lab[k++] = 1;
      if (k == ne) break;
    }
  }
  double s = t.seconds();
  report(id, mismatches == 0 && s < 120,
         std::to_string(cases) + " cases (" + std::to_string(nonzero) + " nonzero), " + std::to_string(mismatches) +
             " mismatches",
         s);
}

ExperimentConfig config(const std::string& text) { return parse_config(json::parse(text)); }

const NamedGraph& graph(const ExperimentConfig& c, const std::string& id) {
  for (const auto& g : c.graphs)
    if (g.id == id) return g;
  throw std::invalid_argument("no graph " + id);
}

double zscore(const Estimate& e, double x) { return (e.mean - x) / e.std_error; }

void first_moment(int id) {
  Timer t;
  auto c = config(R"({"ensemble":{"N0":500,"N1":500,"N2":500},
    "labels":{"h":{"basis":"power","coeffs":["0","1"]}},
    "graphs":[{"id":"moment-1","preset":"moment-k","k":1,"label":"h"}],"trials":400,"seed":2024})");
  auto e = simulate(c, c.graphs[0], Model::pw);
  double x = 1.0 / 27, z = zscore(e, x), bias = std::abs(e.mean - x) / x;
  double s = t.seconds();
  report(id, std::abs(z) <= 3 && bias <= 0.05 && s < 120,
         fmt("mean %.6f vs 1/27, z %.2f, bias %.2f%%", e.mean, z, 100 * bias), s);
}

void deformation_channel(int id) {
  Timer t;
  auto c = config(R"({"ensemble":{"N0":400,"N1":400,"N2":400,
      "law_w":{"kind":"skewed_two_point","a":"2","b":"-1/2","p":"1/5"},
      "law_x":{"kind":"skewed_two_point","a":"2","b":"-1/2","p":"1/5"}},
    "labels":{"h3":{"basis":"power","coeffs":["0","0","0","1"]}},
    "graphs":[{"id":"edge","graph":{"vertices":[{"id":"s","color":2},{"id":"t","color":1}],
                                   "edges":[{"id":1,"src":"s","dst":"t","label":"h3"}]}}],
    "trials":200,"seed":7})");
  auto e = simulate(c, c.graphs[0], Model::pw);
  double x = (1.0 / 3) * (1.0 / 3) * 9 / 4;
  auto ex = exact_limit(c, c.graphs[0]);
  bool calc = ex && *ex == Rational(1, 4);
  double z = zscore(e, x);
  double s = t.seconds();
  report(id, std::abs(z) <= 3 && calc && s < 120,
         fmt("mean %.5f vs 1/4, z %.2f", e.mean, z) + (calc ? "" : ", calculator disagrees"), s);
}

void moment_match(int id) {
  Timer t;
  auto c = config(R"({"ensemble":{"N0":300,"N1":300,"N2":300,"law_x":"rademacher"},
    "labels":{"h":{"basis":"power","coeffs":["0","0","0","1"]}},
    "graphs":[{"id":"moment-1","preset":"moment-k","k":1,"label":"h"},
              {"id":"moment-2","preset":"moment-k","k":2,"label":"h"}],
    "trials":200,"seed":11})");
  bool ok = true;
  std::string detail;
  for (const auto& g : c.graphs) {
    double x = exact_limit(c, g)->convert_to<double>();
    auto p = simulate(c, g, Model::pw);
    auto q = simulate(c, g, Model::equivalent);
    double zp = zscore(p, x), zq = zscore(q, x);
    double zd = (p.mean - q.mean) / std::hypot(p.std_error, q.std_error);
    ok = ok && std::abs(zp) <= 3 && std::abs(zq) <= 3 && std::abs(zd) <= 4;
    detail += g.id + fmt(": limit %.4f pw %.4f (z %.1f) equiv %.4f", x, p.mean, zp, q.mean) +
              fmt(" (z %.1f) diff z %.1f; ", zq, zd);
  }
  double s = t.seconds();
  report(id, ok && s < 600, detail, s);
}

void remainder(int id) {
  Timer t;
  auto at = [](int n, int trials) {
    std::ostringstream o;
    o << R"({"ensemble":{"N0":)" << n << R"(,"N1":)" << n << R"(,"N2":)" << n << R"(},
      "labels":{"h":{"basis":"hermite","coeffs":["0","0","0","0","0","1"]}},
      "graphs":[{"id":"edge","graph":{"vertices":[{"id":"s","color":2},{"id":"t","color":1}],
                                     "edges":[{"id":1,"src":"s","dst":"t","label":"h"}]}},
                {"id":"moment-1","preset":"moment-k","k":1,"label":"h"}],
      "model":"eps","trials":)"
      << trials << R"(,"seed":5})";
    return config(o.str());
  };
  auto small = at(100, 100), large = at(300, 100);
  bool ok = true;
  std::string detail;
  for (const char* gid : {"edge", "moment-1"}) {
    auto a = simulate(small, graph(small, gid), Model::eps);
    auto b = simulate(large, graph(large, gid), Model::eps);
    bool shrinks = std::abs(b.mean) < std::abs(a.mean);
    bool zero = std::abs(b.mean) <= 3 * b.std_error;
    ok = ok && shrinks && zero;
    detail += std::string(gid) + fmt(": |mean| %.2e (se %.1e) -> %.2e (se %.1e)", std::abs(a.mean), a.std_error,
                                     std::abs(b.mean), b.std_error) +
              fmt(", z at N=900 %.1f", b.mean / b.std_error) +
              (shrinks ? "" : " (not shrinking)") + "; ";
  }
  double s = t.seconds();
  report(id, ok && s < 300, detail, s);
}

IMat z_brute(const IntegerPartition& lam, const IMat& W, const IMat& X) {
  int k = static_cast<int>(lam.parts.size());
  long n0 = W.cols();
  IMat out = IMat::Zero(W.rows(), X.cols());
  for (long i = 0; i < W.rows(); ++i)
    for (long j = 0; j < X.cols(); ++j) {
      std::vector<long> d(k, 0);
      while (true) {
        bool distinct = true;
        for (int a = 0; a < k; ++a)
          for (int b = a + 1; b < k; ++b) distinct = distinct && d[a] != d[b];
        if (distinct) {
          std::int64_t p = 1;
          for (int a = 0; a < k; ++a)
            for (int r = 0; r < lam.parts[a]; ++r) p *= W(i, d[a]) * X(d[a], j);
          out(i, j) += p;
        }
        int a = 0;
        while (a < k && ++d[a] == n0) d[a++] = 0;
        if (a == k) break;
      }
    }
  return out;
}

void z_oracle(int id) {
  Timer t;
  std::mt19937 g(909);
  long checks = 0, ok = 0;
  for (int trial = 0; trial < 50; ++trial)
    for (int n = 1; n <= 4; ++n)
      for (const auto& lam : integer_partitions(n)) {
        long n0 = 1 + static_cast<long>(g() % 8);
        IMat W = random_int(1 + g() % 3, n0, g), X = random_int(n0, 1 + g() % 3, g);
        ++checks;
        ok += z_lambda(lam, W, X) == z_brute(lam, W, X);
      }
  double s = t.seconds();
  report(id, ok == checks && s < 30, std::to_string(ok) + "/" + std::to_string(checks) + " exact matches", s);
}

}  // namespace

int main() {
  moebius(1);
  hermite_suite(2);
  eta_scan(3);
  identity_grid(4);
  first_moment(5);
  deformation_channel(6);
  moment_match(7);
  remainder(8);
  z_oracle(9);
  return failures;
}
