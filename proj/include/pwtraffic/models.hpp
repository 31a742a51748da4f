#pragma once

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gauss_hermite.hpp"
#include "partitions.hpp"
#include "rng.hpp"
#include "traffic.hpp"

namespace pwt {

using MatrixXd = Eigen::MatrixXd;

struct EntryLaw {
  enum class Kind { gaussian, rademacher, skewed_two_point };
  Kind kind = Kind::gaussian;
  Rational a = 0, b = 0, p = 0;  // skewed: value a with probability p, b otherwise

  static EntryLaw gaussian() { return {}; }
  static EntryLaw rademacher() { return {Kind::rademacher, 1, -1, Rational(1, 2)}; }
  static EntryLaw skewed_two_point(Rational a, Rational b, Rational p) {
    EntryLaw l{Kind::skewed_two_point, std::move(a), std::move(b), std::move(p)};
    if (l.p <= 0 || l.p >= 1) throw std::invalid_argument("two-point law: probability must lie in (0,1)");
    if (l.moment(1) != 0 || l.moment(2) != 1)
      throw std::invalid_argument("two-point law must have mean 0 and variance 1");
    return l;
  }

  Rational moment(int k) const {
    switch (kind) {
      case Kind::gaussian:
        return gaussian_moment(k);
      case Kind::rademacher:
        return k % 2 ? 0 : 1;
      default: {
        Rational ak = 1, bk = 1;
        for (int i = 0; i < k; ++i) {
          ak *= a;
          bk *= b;
        }
        return p * ak + (1 - p) * bk;
      }
    }
  }
  Rational m3() const { return moment(3); }

  double draw(Engine& g) const {
    switch (kind) {
      case Kind::gaussian:
        return standard_normal(g);
      case Kind::rademacher:
        return (g() >> 63) ? 1.0 : -1.0;
      default:
        return uniform01(g) < p.convert_to<double>() ? a.convert_to<double>() : b.convert_to<double>();
    }
  }

  std::string name() const {
    switch (kind) {
      case Kind::gaussian:
        return "gaussian";
      case Kind::rademacher:
        return "rademacher";
      default:
        return "skewed_two_point";
    }
  }
};

// Step function on [0,1]^2 with a uniform K x K' grid of rational values.
struct StepProfile {
  std::vector<std::vector<Rational>> grid{{1}};

  static StepProfile constant(Rational c) { return {{{std::move(c)}}}; }

  int rows() const { return static_cast<int>(grid.size()); }
  int cols() const { return static_cast<int>(grid.front().size()); }

  void validate() const {
    if (grid.empty() || grid.front().empty()) throw std::invalid_argument("profile grid is empty");
    for (const auto& r : grid) {
      if (static_cast<int>(r.size()) != cols()) throw std::invalid_argument("profile grid is ragged");
      for (const auto& v : r)
        if (v < 0) throw std::invalid_argument("profile values must be nonnegative");
    }
  }

  // cell of row i among n rows: floor(i*K/n)
  static int cell(long i, long n, int k) { return static_cast<int>((i * k) / n); }

  MatrixXd realize(long nrows, long ncols) const {
    std::vector<std::vector<double>> g(rows(), std::vector<double>(cols()));
    for (int a = 0; a < rows(); ++a)
      for (int b = 0; b < cols(); ++b) g[a][b] = grid[a][b].convert_to<double>();
    MatrixXd m(nrows, ncols);
    for (long j = 0; j < ncols; ++j) {
      int cj = cell(j, ncols, cols());
      for (long i = 0; i < nrows; ++i) m(i, j) = g[cell(i, nrows, rows())][cj];
    }
    return m;
  }
};

struct ProfiledEnsemble {
  BlockLayout layout;
  EntryLaw law_w, law_x;
  StepProfile profile_w, profile_x;

  MatrixXd gamma_w() const { return profile_w.realize(layout.N1, layout.N0); }
  MatrixXd gamma_x() const { return profile_x.realize(layout.N0, layout.N2); }
};

namespace stream {
inline constexpr std::uint64_t w = 1, x = 2, w_gau = 11, x_gau = 12, per_base = 100;
}

inline MatrixXd sample_iid(long r, long c, const EntryLaw& law, std::uint64_t seed, std::uint64_t tag) {
  Engine g = make_engine(seed, 0, tag);
  MatrixXd m(r, c);
  if (law.kind == EntryLaw::Kind::skewed_two_point) {
    double a = law.a.convert_to<double>(), b = law.b.convert_to<double>(), p = law.p.convert_to<double>();
    for (long i = 0; i < r; ++i)
      for (long j = 0; j < c; ++j) m(i, j) = uniform01(g) < p ? a : b;
    return m;
  }
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = law.draw(g);
  return m;
}

struct WX {
  MatrixXd W;  // N1 x N0
  MatrixXd X;  // N0 x N2
};

inline WX sample(const ProfiledEnsemble& ens, std::uint64_t seed) {
  const auto& L = ens.layout;
  WX r;
  r.W = ens.gamma_w().cwiseProduct(sample_iid(L.N1, L.N0, ens.law_w, seed, stream::w));
  r.X = ens.gamma_x().cwiseProduct(sample_iid(L.N0, L.N2, ens.law_x, seed, stream::x));
  return r;
}

// entrywise evaluation of p
inline MatrixXd apply_entrywise(const Polynomial& p, const MatrixXd& a) {
  std::vector<double> c;
  for (const auto& q : p.power_coeffs()) c.push_back(q.convert_to<double>());
  return a.unaryExpr([&](double y) {
    double r = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * y + *it;
    return r;
  });
}

// Y(h) = sqrt(psi0/N) h[WX / sqrt(N0)]
inline MatrixXd pw_matrix(const Polynomial& h, const MatrixXd& W, const MatrixXd& X, const BlockLayout& L) {
  if (W.rows() != L.N1 || W.cols() != L.N0 || X.rows() != L.N0 || X.cols() != L.N2)
    throw std::invalid_argument("pw_matrix: dimension mismatch");
  MatrixXd a = (W * X) / std::sqrt(static_cast<double>(L.N0));
  return std::sqrt(L.psi(0) / static_cast<double>(L.N())) * apply_entrywise(h, a);
}

namespace detail {

template <class Scalar>
Mat<Scalar> cwise_pow(const Mat<Scalar>& a, int p) {
  Mat<Scalar> r = Mat<Scalar>::Ones(a.rows(), a.cols());
  for (int k = 0; k < p; ++k) r = r.cwiseProduct(a);
  return r;
}

}  // namespace detail

inline constexpr int kMaxZParts = 9;

// Z(lambda)(i,j) = sum over pairwise-distinct d_b of prod_b (W(i,d_b) X(d_b,j))^{lambda_b},
// via inclusion-exclusion over set partitions of the parts.
// cache (optional) holds W^{op} X^{op} keyed by p and may be shared across calls on the same W, X
template <class Scalar>
Mat<Scalar> z_lambda(const IntegerPartition& lam, const Mat<Scalar>& W, const Mat<Scalar>& X,
                     std::map<int, Mat<Scalar>>* cache = nullptr) {
  int k = static_cast<int>(lam.parts.size());
  if (k == 0) throw std::invalid_argument("empty integer partition");
  if (k > kMaxZParts) throw std::invalid_argument("z_lambda: too many parts");
  if (W.cols() != X.rows()) throw std::invalid_argument("z_lambda: inner dimension mismatch");
  // group sigma by the multiset of merged block sums
  std::map<std::vector<int>, Integer> terms;
  for_each_set_partition(k, [&](const SetPartition& s) {
    Integer mu = 1;
    std::vector<int> sums;
    for (const auto& g : s.blocks()) {
      int sz = static_cast<int>(g.size());
      Integer f = factorial(sz - 1);
      mu *= (sz % 2 ? f : Integer(-f));
      int tot = 0;
      for (int b : g) tot += lam.parts[b];
      sums.push_back(tot);
    }
    std::sort(sums.begin(), sums.end());
    terms[sums] += mu;
    return true;
  });
  std::map<int, Mat<Scalar>> local;
  auto& S = cache ? *cache : local;
  Mat<Scalar> out = Mat<Scalar>::Zero(W.rows(), X.cols());
  for (const auto& [sums, coef] : terms) {
    if (coef == 0) continue;
    Mat<Scalar> prod = Mat<Scalar>::Ones(W.rows(), X.cols());
    for (int p : sums) {
      auto it = S.find(p);
      if (it == S.end()) it = S.emplace(p, detail::cwise_pow(W, p) * detail::cwise_pow(X, p)).first;
      prod = prod.cwiseProduct(it->second);
    }
    out += Scalar(static_cast<long long>(coef)) * prod;
  }
  return out;
}

struct Decomposition {
  MatrixXd lin;
  std::map<int, MatrixXd> per;  // m >= 2
  MatrixXd def;
  MatrixXd eps;
  MatrixXd total;         // Y(h)
  MatrixXd eps_explicit;  // remainder summed from its own partitions
};

inline IntegerPartition lambda_per(int n, int m) {
  IntegerPartition l;
  for (int i = 0; i < (n - m) / 2; ++i) l.parts.push_back(2);
  for (int i = 0; i < m; ++i) l.parts.push_back(1);
  return l;
}

inline IntegerPartition lambda_def(int n) {
  IntegerPartition l{{3}};
  for (int i = 0; i < (n - 3) / 2; ++i) l.parts.push_back(2);
  return l;
}

inline constexpr int kMaxDecomposeDegree = 9;

inline Decomposition decompose(const Polynomial& h, const MatrixXd& W, const MatrixXd& X, const BlockLayout& L) {
  if (!h.is_odd()) throw std::invalid_argument("decompose requires an odd polynomial");
  if (h.degree() > kMaxDecomposeDegree) throw std::invalid_argument("decompose: degree cap exceeded");
  double gamma = std::sqrt(L.psi(0) / static_cast<double>(L.N()));
  double gamma0 = 1.0 / std::sqrt(static_cast<double>(L.N0));
  Decomposition d;
  MatrixXd zero = MatrixXd::Zero(L.N1, L.N2);
  d.lin = d.def = d.eps_explicit = zero;
  std::map<int, MatrixXd> cache;
  for (int n = 1; n <= h.degree(); n += 2) {
    const Rational& a = h.coeff(n);
    if (a == 0) continue;
    double scale = a.convert_to<double>() * gamma * std::pow(gamma0, n);
    for (const auto& lam : integer_partitions(n)) {
      double c = count_of_type(lam).convert_to<double>();
      int ones = static_cast<int>(std::count(lam.parts.begin(), lam.parts.end(), 1));
      bool pairs_and_ones = std::all_of(lam.parts.begin(), lam.parts.end(), [](int p) { return p <= 2; });
      MatrixXd z = scale * c * z_lambda(lam, W, X, &cache);
      if (pairs_and_ones && ones == 1) {
        d.lin += z;
      } else if (pairs_and_ones && ones >= 2) {
        auto [it, fresh] = d.per.emplace(ones, zero);
        it->second += z;
      } else if (lam == lambda_def(n)) {
        d.def += z;
      } else {
        d.eps_explicit += z;
      }
    }
  }
  d.total = pw_matrix(h, W, X, L);
  d.eps = d.total - d.lin - d.def;
  for (auto& [m, z] : d.per) d.eps -= z;
  return d;
}

// N^{-1} Gw^{ol} x Gx^{ol}
inline MatrixXd lambda_ell(const ProfiledEnsemble& ens, int ell) {
  if (ell != 2 && ell != 3) throw std::invalid_argument("lambda_ell: ell must be 2 or 3");
  return detail::cwise_pow<double>(ens.gamma_w(), ell) * detail::cwise_pow<double>(ens.gamma_x(), ell) /
         static_cast<double>(ens.layout.N());
}

// sqrt of N0^{-1} Gw^{o2} x Gx^{o2}
inline MatrixXd m2_matrix(const ProfiledEnsemble& ens) {
  MatrixXd s = detail::cwise_pow<double>(ens.gamma_w(), 2) * detail::cwise_pow<double>(ens.gamma_x(), 2) /
               static_cast<double>(ens.layout.N0);
  return s.cwiseSqrt();
}

// entrywise mu -> E[p(mu xi)], cached per distinct entry value
inline MatrixXd smoothed(const Polynomial& p, const MatrixXd& mu) {
  Polynomial s = gaussian_smoothing(p);
  std::map<double, double> cache;
  return mu.unaryExpr([&](double m) {
    auto it = cache.find(m);
    if (it == cache.end()) it = cache.emplace(m, s.eval(m)).first;
    return it->second;
  });
}

inline MatrixXd profiled_gaussian(const MatrixXd& gamma, std::uint64_t seed, std::uint64_t tag) {
  return gamma.cwiseProduct(sample_iid(gamma.rows(), gamma.cols(), EntryLaw::gaussian(), seed, tag));
}

inline MatrixXd equivalent_lin(const Polynomial& h, const ProfiledEnsemble& ens, std::uint64_t seed) {
  double N = static_cast<double>(ens.layout.N());
  MatrixXd wg = profiled_gaussian(ens.gamma_w(), seed, stream::w_gau);
  MatrixXd xg = profiled_gaussian(ens.gamma_x(), seed, stream::x_gau);
  return smoothed(h.derivative(1), m2_matrix(ens)).cwiseProduct(wg * xg / N);
}

// Y^per'(g_m): i.i.d. centered Gaussian entries of variance psi0 m!/N
inline MatrixXd per_noise(const ProfiledEnsemble& ens, int m, std::uint64_t seed) {
  const auto& L = ens.layout;
  double sd = std::sqrt(L.psi(0) * factorial(m).convert_to<double>() / static_cast<double>(L.N()));
  return sd * sample_iid(L.N1, L.N2, EntryLaw::gaussian(), seed, stream::per_base + m);
}

inline std::map<int, MatrixXd> per_noise_family(const ProfiledEnsemble& ens, int max_order, std::uint64_t seed) {
  std::map<int, MatrixXd> f;
  for (int n = 2; n <= max_order; ++n) f[n] = per_noise(ens, n, seed);
  return f;
}

// Linear extension over Hermite coefficients, constant profiles: sum_{n>=2} c_n(h) Y^per'(g_n)
inline MatrixXd per_from_family(const Polynomial& h, const std::map<int, MatrixXd>& fam) {
  MatrixXd r;
  const auto& c = h.hermite_coeffs();
  for (auto& [n, z] : fam) {
    if (r.size() == 0) r = MatrixXd::Zero(z.rows(), z.cols());
    if (n < static_cast<int>(c.size()) && c[n] != 0) r += c[n].convert_to<double>() * z;
  }
  return r;
}

// (1/m!) E[h^{(m)}(t M2)] o M2^{om} o Y^per'(g_m)
inline MatrixXd equivalent_per(const Polynomial& h, const ProfiledEnsemble& ens, int m, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("equivalent_per: m must be >= 2");
  const auto& L = ens.layout;
  if (h.degree() < m) return MatrixXd::Zero(L.N1, L.N2);
  MatrixXd mu = m2_matrix(ens);
  MatrixXd coef = smoothed(h.derivative(m), mu) / factorial(m).convert_to<double>();
  return coef.cwiseProduct(detail::cwise_pow<double>(mu, m)).cwiseProduct(per_noise(ens, m, seed));
}

// (m3w m3x / 6N) (N0^{-1} Gw^{o3} x Gx^{o3}) o E[h'''(t M2)]
inline MatrixXd equivalent_def(const Polynomial& h, const ProfiledEnsemble& ens) {
  const auto& L = ens.layout;
  double m3 = (ens.law_w.m3() * ens.law_x.m3()).convert_to<double>();
  if (m3 == 0 || h.degree() < 3) return MatrixXd::Zero(L.N1, L.N2);
  MatrixXd l3 = detail::cwise_pow<double>(ens.gamma_w(), 3) * detail::cwise_pow<double>(ens.gamma_x(), 3) /
                static_cast<double>(L.N0);
  return (m3 / (6.0 * static_cast<double>(L.N()))) * l3.cwiseProduct(smoothed(h.derivative(3), m2_matrix(ens)));
}

inline MatrixXd equivalent_total(const Polynomial& h, const ProfiledEnsemble& ens, std::uint64_t seed) {
  MatrixXd r = equivalent_lin(h, ens, seed) + equivalent_def(h, ens);
  for (int m = 2; m <= h.degree(); ++m) r += equivalent_per(h, ens, m, seed);
  return r;
}

// flat dump: int32 rows, int32 cols, then row-major doubles
inline void write_matrix(std::ostream& os, const MatrixXd& m) {
  std::int32_t r = static_cast<std::int32_t>(m.rows()), c = static_cast<std::int32_t>(m.cols());
  os.write(reinterpret_cast<const char*>(&r), 4);
  os.write(reinterpret_cast<const char*>(&c), 4);
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), 8);
    }
}

}  // namespace pwt
