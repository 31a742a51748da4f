#pragma once

#include <cstddef>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/gmp.hpp>

namespace pwt {

using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline constexpr int kMaxDegree = 15;

inline Rational parse_rational(const std::string& s) {
  try {
    return Rational(s);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad rational literal: " + s);
  }
}

inline std::string to_string(const Rational& q) { return q.str(); }

inline Integer double_factorial(int n) {
  Integer r = 1;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

inline Integer factorial(int n) {
  Integer r = 1;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

inline Integer binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  return factorial(n) / (factorial(k) * factorial(n - k));
}

// E[xi^n] for a standard Gaussian xi
inline Rational gaussian_moment(int n) {
  if (n < 0) throw std::invalid_argument("negative moment order");
  if (n % 2) return 0;
  return Rational(double_factorial(n - 1));
}

class Polynomial;
Polynomial hermite(int n);

class Polynomial {
 public:
  Polynomial() { normalize(); }

  static Polynomial from_power(std::vector<Rational> c) {
    Polynomial p;
    p.power_ = std::move(c);
    p.normalize();
    return p;
  }

  static Polynomial from_hermite(const std::vector<Rational>& c);

  static Polynomial monomial(int n, Rational a = 1) {
    std::vector<Rational> c(n + 1);
    c[n] = std::move(a);
    return from_power(std::move(c));
  }

  int degree() const { return static_cast<int>(power_.size()) - 1; }
  const std::vector<Rational>& power_coeffs() const { return power_; }
  const std::vector<Rational>& hermite_coeffs() const { return herm_; }
  const Rational& coeff(int k) const {
    static const Rational zero = 0;
    return k < static_cast<int>(power_.size()) ? power_[k] : zero;
  }
  bool is_zero() const { return power_.size() == 1 && power_[0] == 0; }

  bool is_odd() const {
    for (std::size_t k = 0; k < power_.size(); k += 2)
      if (power_[k] != 0) return false;
    return true;
  }

  Polynomial derivative(int m = 1) const {
    std::vector<Rational> c;
    for (int k = m; k <= degree(); ++k) {
      Rational f = power_[k];
      for (int j = 0; j < m; ++j) f *= (k - j);
      c.push_back(f);
    }
    return from_power(std::move(c));
  }

  Rational operator()(const Rational& y) const {
    Rational r = 0;
    for (int k = degree(); k >= 0; --k) r = r * y + power_[k];
    return r;
  }

  double eval(double y) const {
    double r = 0;
    for (int k = degree(); k >= 0; --k) r = r * y + power_[k].convert_to<double>();
    return r;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Rational> c(std::max(a.power_.size(), b.power_.size()));
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = a.coeff(k) + b.coeff(k);
    return from_power(std::move(c));
  }
  friend Polynomial operator*(const Rational& s, const Polynomial& a) {
    std::vector<Rational> c = a.power_;
    for (auto& x : c) x *= s;
    return from_power(std::move(c));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<Rational> c(a.power_.size() + b.power_.size() - 1);
    for (std::size_t i = 0; i < a.power_.size(); ++i)
      for (std::size_t j = 0; j < b.power_.size(); ++j) c[i + j] += a.power_[i] * b.power_[j];
    return from_power(std::move(c));
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.power_ == b.power_;
  }

 private:
  void normalize();

  std::vector<Rational> power_;
  std::vector<Rational> herm_;
};

namespace detail {

struct HermiteTable {
  std::mutex mu;
  std::vector<std::vector<Rational>> rows{{1}, {0, 1}};
};

inline HermiteTable& hermite_table() {
  static HermiteTable t;
  return t;
}

// power coefficients of g_n, g_{n+1} = y g_n - n g_{n-1}
inline std::vector<Rational> hermite_power(int n) {
  if (n < 0) throw std::invalid_argument("negative Hermite order");
  auto& t = hermite_table();
  std::lock_guard<std::mutex> lock(t.mu);
  while (static_cast<int>(t.rows.size()) <= n) {
    int k = static_cast<int>(t.rows.size()) - 1;
    const auto& gk = t.rows[k];
    const auto& gk1 = t.rows[k - 1];
    std::vector<Rational> next(k + 2);
    for (int i = 0; i <= k; ++i) next[i + 1] += gk[i];
    for (int i = 0; i <= k - 1; ++i) next[i] -= Rational(k) * gk1[i];
    t.rows.push_back(std::move(next));
  }
  return t.rows[n];
}

inline Rational moment_dot(const std::vector<Rational>& p, const std::vector<Rational>& q) {
  Rational r = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0) continue;
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j] == 0 || (i + j) % 2) continue;
      r += p[i] * q[j] * gaussian_moment(static_cast<int>(i + j));
    }
  }
  return r;
}

}  // namespace detail

inline std::vector<Rational> to_hermite(const std::vector<Rational>& power) {
  std::vector<Rational> c(std::max<std::size_t>(power.size(), 1));
  for (std::size_t n = 0; n < c.size(); ++n) {
    auto g = detail::hermite_power(static_cast<int>(n));
    c[n] = detail::moment_dot(power, g) / Rational(factorial(static_cast<int>(n)));
  }
  while (c.size() > 1 && c.back() == 0) c.pop_back();
  return c;
}

inline std::vector<Rational> from_hermite_coeffs(const std::vector<Rational>& herm) {
  std::vector<Rational> p(std::max<std::size_t>(herm.size(), 1));
  for (std::size_t n = 0; n < herm.size(); ++n) {
    if (herm[n] == 0) continue;
    auto g = detail::hermite_power(static_cast<int>(n));
    for (std::size_t k = 0; k < g.size(); ++k) p[k] += herm[n] * g[k];
  }
  while (p.size() > 1 && p.back() == 0) p.pop_back();
  return p;
}

inline void Polynomial::normalize() {
  if (power_.empty()) power_.push_back(0);
  while (power_.size() > 1 && power_.back() == 0) power_.pop_back();
  if (degree() > kMaxDegree)
    throw std::invalid_argument("polynomial degree exceeds " + std::to_string(kMaxDegree));
  herm_ = to_hermite(power_);
}

inline Polynomial Polynomial::from_hermite(const std::vector<Rational>& c) {
  return from_power(from_hermite_coeffs(c));
}

inline Polynomial hermite(int n) { return Polynomial::from_power(detail::hermite_power(n)); }

inline Rational expect_product(const Polynomial& p, const Polynomial& q) {
  return detail::moment_dot(p.power_coeffs(), q.power_coeffs());
}

inline Rational expect(const Polynomial& p) { return detail::moment_dot(p.power_coeffs(), {1}); }

inline Rational expect_derivative(const Polynomial& p, int m) { return expect(p.derivative(m)); }

inline Rational f_kernel(const Polynomial& p, const Polynomial& q) {
  return expect_product(p, q) - expect_derivative(p, 1) * expect_derivative(q, 1);
}

inline std::pair<Rational, Rational> theta_coefficients(const Polynomial& p) {
  Rational d = expect_derivative(p, 1);
  return {expect_product(p, p), d * d};
}

// mu -> E[p(mu xi)], as a polynomial in mu (only even powers survive)
inline Polynomial gaussian_smoothing(const Polynomial& p) {
  std::vector<Rational> c(p.power_coeffs().size());
  for (int k = 0; k <= p.degree(); ++k) c[k] = p.coeff(k) * gaussian_moment(k);
  return Polynomial::from_power(std::move(c));
}

// same, but as a polynomial in mu^2
inline std::vector<Rational> gaussian_smoothing_sq(const Polynomial& p) {
  std::vector<Rational> c(p.degree() / 2 + 1);
  for (int k = 0; k <= p.degree(); k += 2) c[k / 2] = p.coeff(k) * gaussian_moment(k);
  return c;
}

inline Rational eval_sq(const std::vector<Rational>& c, const Rational& mu2) {
  Rational r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * mu2 + *it;
  return r;
}

}  // namespace pwt
