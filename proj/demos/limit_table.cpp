// Exact limits of the moment graphs N^-1 Tr (YY^t)^k for a few odd h, split
// into the tree / linear / noise parts.
#include <cstdio>

#include <pwtraffic/io.hpp>
#include <pwtraffic/limits.hpp>

using namespace pwt;

int main() {
  LimitParams p;  // psi = (1/3, 1/3, 1/3), Gaussian third moments, flat profiles
  struct Row {
    const char* name;
    Polynomial h;
  };
  Row rows[] = {{"y", Polynomial::monomial(1)},
                {"y^3", Polynomial::monomial(3)},
                {"g3", hermite(3)},
                {"y^5", Polynomial::monomial(5)},
                {"tanh-ish", Polynomial::from_power({0, 1, 0, Rational(-1, 3), 0, Rational(2, 15)})}};
  std::printf("%-9s %2s  %-14s %-12s %-12s %-12s\n", "h", "k", "limit", "B", "lin", "per");
  for (const auto& r : rows)
    for (int k = 1; k <= 2; ++k) {
      RefGraph t = moment_preset(k, "h").relabel([&](const std::string&) { return r.h; });
      std::printf("%-9s %2d  %-14s %-12s %-12s %-12s\n", r.name, k, to_string(limit_pw(t, p).value).c_str(),
                  to_string(limit_B(t, p).value).c_str(), to_string(limit_lin(t, p).value).c_str(),
                  to_string(limit_per(t, p).value).c_str());
    }
}
