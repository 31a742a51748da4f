// Moment-2 of Y(h3) against its limit as the size grows; the gap shrinks like 1/N0.
#include <cstdio>

#include <pwtraffic/experiment.hpp>

using namespace pwt;

int main(int argc, char** argv) {
  long trials = argc > 1 ? std::atol(argv[1]) : 40;
  for (long n : {50, 100, 200}) {
    json j = {{"ensemble", {{"N0", n}, {"N1", n}, {"N2", n}, {"law_x", "rademacher"}}},
              {"labels", {{"h", {{"basis", "power"}, {"coeffs", {"0", "0", "0", "1"}}}}}},
              {"graphs", {{{"id", "moment-2"}, {"preset", "moment-k"}, {"k", 2}, {"label", "h"}}}},
              {"trials", trials},
              {"seed", 3}};
    auto c = parse_config(j);
    double x = exact_limit(c, c.graphs[0])->convert_to<double>();
    auto pw = simulate(c, c.graphs[0], Model::pw);
    auto eq = simulate(c, c.graphs[0], Model::equivalent);
    std::printf("N0=%4ld  limit %.4f  pw %.4f +- %.4f  equivalent %.4f +- %.4f\n", n, x, pw.mean, pw.std_error,
                eq.mean, eq.std_error);
  }
}
