#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "io.hpp"
#include "limits.hpp"
#include "models.hpp"
#include "traffic.hpp"

namespace pwt {

struct NamedGraph {
  std::string id;
  TestGraph<std::string> graph;
  json echo;  // explicit form, with the preset it came from
};

enum class Model { pw, equivalent, eps };

inline std::string model_name(Model m) { return m == Model::pw ? "pw" : m == Model::equivalent ? "equivalent" : "eps"; }

inline Model model_from_string(const std::string& s) {
  if (s == "pw") return Model::pw;
  if (s == "equivalent") return Model::equivalent;
  if (s == "eps") return Model::eps;
  throw std::invalid_argument("unknown model: " + s);
}

struct ExperimentConfig {
  ProfiledEnsemble ensemble;
  std::map<std::string, Polynomial> labels;
  std::vector<NamedGraph> graphs;
  long trials = 100;
  std::uint64_t seed = 1;
  int threads = 1;
  Model model = Model::pw;
  json options = json::object();  // command-specific keys, echoed verbatim

  json resolved() const {
    const auto& L = ensemble.layout;
    json ens = {{"N0", L.N0},
                {"N1", L.N1},
                {"N2", L.N2},
                {"law_w", to_json(ensemble.law_w)},
                {"law_x", to_json(ensemble.law_x)},
                {"profile_w", to_json(ensemble.profile_w)},
                {"profile_x", to_json(ensemble.profile_x)},
                {"seed", seed}};
    json labs = json::object();
    for (const auto& [k, p] : labels) labs[k] = to_json(p);
    json gs = json::array();
    for (const auto& g : graphs) gs.push_back(g.echo);
    json out = options;
    out["ensemble"] = ens;
    out["labels"] = labs;
    out["graphs"] = gs;
    out["trials"] = trials;
    out["seed"] = seed;
    out["model"] = model_name(model);
    return out;
  }
};

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  ExperimentConfig c;
  const json& e = j.at("ensemble");
  auto& L = c.ensemble.layout;
  L.N0 = e.at("N0").get<long>();
  L.N1 = e.at("N1").get<long>();
  L.N2 = e.at("N2").get<long>();
  if (L.N0 < 1 || L.N1 < 1 || L.N2 < 1) throw std::invalid_argument("N0, N1, N2 must be positive");
  if (e.contains("law_w")) c.ensemble.law_w = law_from_json(e["law_w"]);
  if (e.contains("law_x")) c.ensemble.law_x = law_from_json(e["law_x"]);
  if (e.contains("profile_w")) c.ensemble.profile_w = profile_from_json(e["profile_w"]);
  if (e.contains("profile_x")) c.ensemble.profile_x = profile_from_json(e["profile_x"]);
  c.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : e.value("seed", std::uint64_t{1});
  c.trials = j.value("trials", 100L);
  if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
  c.threads = j.value("threads", 1);
  if (j.contains("model")) c.model = model_from_string(j["model"].get<std::string>());
  if (j.contains("labels"))
    for (const auto& [k, v] : j["labels"].items()) c.labels[k] = polynomial_from_json(v);
  json gs = j.contains("graphs") ? j["graphs"] : json::array();
  if (j.contains("graph")) gs.push_back(j["graph"]);
  int auto_id = 0;
  for (const auto& g : gs) {
    NamedGraph ng;
    ng.id = g.value("id", "g" + std::to_string(++auto_id));
    if (g.contains("preset")) {
      std::string p = g["preset"].get<std::string>();
      if (p != "moment-k") throw std::invalid_argument("unknown graph preset: " + p);
      ng.graph = moment_preset(g.value("k", 1), g.value("label", std::string("h")));
      ng.echo = {{"id", ng.id}, {"preset", g}, {"graph", to_json(ng.graph)}};
    } else {
      ng.graph = graph_from_json(g.contains("graph") ? g["graph"] : g);
      ng.echo = {{"id", ng.id}, {"graph", to_json(ng.graph)}};
    }
    for (const auto& ed : ng.graph.edges)
      if (!c.labels.count(ed.label)) {
        json inline_poly = json::parse(ed.label, nullptr, false);
        if (inline_poly.is_discarded() || !inline_poly.is_object())
          throw std::invalid_argument("graph '" + ng.id + "' uses undefined label '" + ed.label + "'");
        c.labels[ed.label] = polynomial_from_json(inline_poly);
      }
    c.graphs.push_back(std::move(ng));
  }
  static const std::set<std::string> known{"ensemble", "labels", "graphs", "graph", "trials",
                                           "seed",     "threads", "model"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) c.options[k] = v;
  return c;
}

inline LimitParams limit_params(const ExperimentConfig& c) {
  const auto& L = c.ensemble.layout;
  LimitParams p;
  p.psi0 = Rational(L.N0, L.N());
  p.psi1 = Rational(L.N1, L.N());
  p.psi2 = Rational(L.N2, L.N());
  p.m3w = c.ensemble.law_w.m3();
  p.m3x = c.ensemble.law_x.m3();
  p.gw = c.ensemble.profile_w;
  p.gx = c.ensemble.profile_x;
  return p;
}

inline RefGraph ref_graph(const ExperimentConfig& c, const NamedGraph& g) {
  return g.graph.relabel([&](const std::string& l) { return c.labels.at(l); });
}

// Matrices for each label name from one draw; every label is an N1 x N2 block (1 <- 2).
inline Family<double> model_family(const ExperimentConfig& c, Model m, const std::set<std::string>& names,
                                   std::uint64_t seed) {
  Family<double> fam;
  const auto& L = c.ensemble.layout;
  if (m == Model::equivalent) {
    for (const auto& n : names) fam[n] = {equivalent_total(c.labels.at(n), c.ensemble, seed), 2, 1};
    return fam;
  }
  WX s = sample(c.ensemble, seed);
  for (const auto& n : names) {
    const auto& h = c.labels.at(n);
    MatrixXd y = m == Model::pw ? pw_matrix(h, s.W, s.X, L) : decompose(h, s.W, s.X, L).eps;
    fam[n] = {std::move(y), 2, 1};
  }
  return fam;
}

inline std::set<std::string> label_names(const TestGraph<std::string>& g) {
  std::set<std::string> s;
  for (const auto& e : g.edges) s.insert(e.label);
  return s;
}

inline Estimate simulate(const ExperimentConfig& c, const NamedGraph& g, Model m) {
  auto names = label_names(g.graph);
  for (const auto& e : g.graph.edges)
    if (g.graph.color[e.src] != 2 || g.graph.color[e.dst] != 1)
      throw std::invalid_argument("graph '" + g.id + "': model labels run from V2 to V1");
  return tau_estimate(
      g.graph, [&](std::uint64_t s) { return model_family(c, m, names, s); }, c.ensemble.layout, c.trials, c.seed,
      c.threads);
}

// exact limit when the graph is in the calculator's scope (odd labels, reference, connected)
inline std::optional<Rational> exact_limit(const ExperimentConfig& c, const NamedGraph& g) {
  RefGraph t = ref_graph(c, g);
  if (!t.is_reference() || !is_connected(t) || t.num_edges() > kMaxLimitEdges) return std::nullopt;
  for (const auto& e : t.edges)
    if (!e.label.is_odd()) return std::nullopt;
  return limit_pw(t, limit_params(c)).value;
}

inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json estimate_record(const ExperimentConfig& c, const NamedGraph& g, const std::string& estimator,
                            const Estimate& e, const std::optional<Rational>& exact) {
  const auto& L = c.ensemble.layout;
  json r = {{"graph_id", g.id},   {"estimator", estimator}, {"mean", e.mean},
            {"std_error", number_or_null(e.std_error)},     {"trials", e.trials},
            {"seed", c.seed},     {"N0", L.N0},             {"N1", L.N1},
            {"N2", L.N2}};
  if (exact) {
    double x = exact->convert_to<double>();
    r["exact"] = to_string(*exact);
    r["exact_value"] = x;
    if (std::isfinite(e.std_error) && e.std_error > 0) r["z"] = (e.mean - x) / e.std_error;
  }
  return r;
}

struct CommandResult {
  json results = json::array();
  bool flag = false;  // limit mismatch
  std::vector<std::pair<std::string, std::string>> files;  // extra outputs (name, contents)
};

inline CommandResult cmd_simulate(const ExperimentConfig& c) {
  CommandResult out;
  for (const auto& g : c.graphs) {
    Estimate e = simulate(c, g, c.model);
    out.results.push_back(estimate_record(c, g, model_name(c.model), e,
                                          c.model == Model::eps ? std::optional<Rational>(0) : exact_limit(c, g)));
  }
  return out;
}

inline CommandResult cmd_limit(const ExperimentConfig& c) {
  CommandResult out;
  LimitParams p = limit_params(c);
  for (const auto& g : c.graphs) {
    RefGraph t = ref_graph(c, g);
    auto pw = limit_pw(t, p);
    json r = {{"graph_id", g.id},
              {"graph", g.echo.at("graph")},
              {"params",
               {{"psi", {to_string(p.psi0), to_string(p.psi1), to_string(p.psi2)}},
                {"m3_w", to_string(p.m3w)},
                {"m3_x", to_string(p.m3x)},
                {"profile_w", to_json(p.gw)},
                {"profile_x", to_json(p.gx)}}},
              {"pw", to_string(pw.value)},
              {"B", to_string(limit_B(t, p).value)},
              {"lin", to_string(limit_lin(t, p).value)},
              {"per", to_string(limit_per(t, p).value)}};
    json labs = json::object();
    for (const auto& l : label_names(g.graph)) labs[l] = to_json(c.labels.at(l));
    r["labels"] = labs;
    json br = json::array();
    for (const auto& q : pw.breakdown) br.push_back({{"rho0", to_json(q.rho0)}, {"value", to_string(q.value)}});
    r["per_quotient_breakdown"] = br;
    bool odd = std::all_of(t.edges.begin(), t.edges.end(), [](const auto& e) { return e.label.is_odd(); });
    if (odd) {
      Rational sum = limit_equivalent_sum(t, p).value;
      r["equivalent_sum"] = to_string(sum);
      r["flag"] = sum != pw.value;
      out.flag = out.flag || sum != pw.value;
    } else {
      r["equivalent_sum"] = nullptr;
      r["flag"] = false;
    }
    r["value"] = to_string(pw.value);
    out.results.push_back(r);
  }
  return out;
}

inline CommandResult cmd_compare(const ExperimentConfig& c) {
  CommandResult out;
  for (const auto& g : c.graphs) {
    auto exact = exact_limit(c, g);
    Estimate a = simulate(c, g, Model::pw);
    Estimate b = simulate(c, g, Model::equivalent);
    out.results.push_back(estimate_record(c, g, "pw", a, exact));
    out.results.push_back(estimate_record(c, g, "equivalent", b, exact));
    double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error);
    json d = {{"graph_id", g.id},
              {"estimator", "pw-minus-equivalent"},
              {"mean", a.mean - b.mean},
              {"std_error", number_or_null(se)}};
    if (std::isfinite(se) && se > 0) d["z"] = (a.mean - b.mean) / se;
    out.results.push_back(d);
  }
  // remainder check at several sizes: {"eps_layouts": [[N0,N1,N2], ...]}
  if (c.options.contains("eps_layouts"))
    for (const auto& lay : c.options["eps_layouts"]) {
      ExperimentConfig c2 = c;
      c2.ensemble.layout = {lay.at(0).get<long>(), lay.at(1).get<long>(), lay.at(2).get<long>()};
      for (const auto& g : c.graphs) out.results.push_back(estimate_record(c2, g, "eps", simulate(c2, g, Model::eps), Rational(0)));
    }
  return out;
}

// Freedman-Diaconis bin edges over [min, max]
inline std::vector<double> fd_bins(std::vector<double> v, int override_bins = 0) {
  std::sort(v.begin(), v.end());
  double lo = v.front(), hi = v.back();
  int nb = override_bins;
  if (nb <= 0) {
    auto q = [&](double f) { return v[static_cast<std::size_t>(f * static_cast<double>(v.size() - 1))]; };
    double width = 2 * (q(0.75) - q(0.25)) / std::cbrt(static_cast<double>(v.size()));
    nb = (width > 0 && hi > lo) ? std::max(1, static_cast<int>(std::ceil((hi - lo) / width))) : 1;
  }
  std::vector<double> edges(nb + 1);
  for (int i = 0; i <= nb; ++i) edges[i] = lo + (hi - lo) * i / nb;
  return edges;
}

inline std::vector<long> histogram(const std::vector<double>& v, const std::vector<double>& edges) {
  int nb = static_cast<int>(edges.size()) - 1;
  std::vector<long> cnt(nb, 0);
  double lo = edges.front(), hi = edges.back();
  for (double x : v) {
    int b = hi > lo ? static_cast<int>((x - lo) / (hi - lo) * nb) : 0;
    ++cnt[std::clamp(b, 0, nb - 1)];
  }
  return cnt;
}

inline constexpr long kMaxSpectrumN1 = 4000;

inline CommandResult cmd_spectrum(const ExperimentConfig& c) {
  const auto& L = c.ensemble.layout;
  if (L.N1 > kMaxSpectrumN1) throw std::length_error("spectrum: N1 above the dense eigensolver cap");
  std::string label = c.options.value("label", c.labels.empty() ? std::string() : c.labels.begin()->first);
  if (!c.labels.count(label)) throw std::invalid_argument("spectrum: unknown label '" + label + "'");
  const Polynomial& h = c.labels.at(label);
  int bins = c.options.value("bins", 0);
  WX s = sample(c.ensemble, c.seed);
  std::vector<std::pair<std::string, MatrixXd>> mats{{"pw", pw_matrix(h, s.W, s.X, L)},
                                                      {"equivalent", equivalent_total(h, c.ensemble, c.seed)}};
  CommandResult out;
  std::ostringstream csv;
  csv << "series,bin_left,count\n";
  for (const auto& [name, y] : mats) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(y * y.transpose(), Eigen::EigenvaluesOnly);
    std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::vector<double> sv;
    for (double& l : lam) {
      l = std::max(l, 0.0);
      sv.push_back(std::sqrt(l));
    }
    json moments = json::array();
    for (int k = 1; k <= 4; ++k) {
      double m = 0;
      for (double l : lam) m += std::pow(l, k);
      moments.push_back(m / static_cast<double>(lam.size()));
    }
    auto edges = fd_bins(sv, bins);
    auto cnt = histogram(sv, edges);
    for (std::size_t b = 0; b < cnt.size(); ++b) csv << name << ',' << edges[b] << ',' << cnt[b] << '\n';
    out.results.push_back({{"series", name},
                           {"label", label},
                           {"moments_YYt", moments},
                           {"max_singular_value", *std::max_element(sv.begin(), sv.end())},
                           {"bins", static_cast<long>(cnt.size())}});
  }
  out.files.push_back({"histogram", csv.str()});
  return out;
}

inline CommandResult cmd_decompose(const ExperimentConfig& c) {
  const auto& L = c.ensemble.layout;
  WX s = sample(c.ensemble, c.seed);
  CommandResult out;
  for (const auto& [name, h] : c.labels) {
    auto d = decompose(h, s.W, s.X, L);
    MatrixXd re = d.lin + d.def + d.eps_explicit;
    json per = json::object();
    for (const auto& [m, z] : d.per) {
      re += z;
      per[std::to_string(m)] = z.norm();
    }
    double tn = d.total.norm();
    double resid = (re - d.total).norm() / (tn > 0 ? tn : 1.0);
    out.results.push_back({{"label", name},
                           {"polynomial", to_json(h)},
                           {"norm_total", tn},
                           {"norm_lin", d.lin.norm()},
                           {"norm_per", per},
                           {"norm_def", d.def.norm()},
                           {"norm_eps", d.eps.norm()},
                           {"reassembly_residual", resid},
                           {"reassembly_ok", resid < 1e-10}});
  }
  return out;
}

inline std::string results_csv(const json& results) {
  std::vector<std::string> keys;
  for (const auto& r : results)
    for (const auto& [k, v] : r.items())
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  std::ostringstream os;
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << '\n';
  for (const auto& r : results) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (i) os << ',';
      if (!r.contains(keys[i])) continue;
      const json& v = r[keys[i]];
      std::string cell = v.is_string() ? v.get<std::string>() : v.dump();
      if (cell.find_first_of(",\"\n") != std::string::npos) {
        std::string q = "\"";
        for (char ch : cell) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        cell = q + "\"";
      }
      os << cell;
    }
    os << '\n';
  }
  return os.str();
}

struct RunOutput {
  json report;
  int exit_code = 0;
  std::vector<std::pair<std::string, std::string>> files;
};

// exit codes: 0 ok, 2 validation error, 3 limit mismatch flagged
inline RunOutput run_command(const std::string& command, const json& config, int threads_override = 0) {
  auto t0 = std::chrono::steady_clock::now();
  RunOutput o;
  try {
    ExperimentConfig c = parse_config(config);
    if (threads_override > 0) c.threads = threads_override;
    CommandResult r;
    if (command == "simulate")
      r = cmd_simulate(c);
    else if (command == "limit")
      r = cmd_limit(c);
    else if (command == "compare")
      r = cmd_compare(c);
    else if (command == "spectrum")
      r = cmd_spectrum(c);
    else if (command == "decompose")
      r = cmd_decompose(c);
    else
      throw std::invalid_argument("unknown command: " + command);
    o.report = {{"command", command}, {"config", c.resolved()}, {"seed", c.seed}, {"results", r.results}};
    if (command == "limit") o.report["flag"] = r.flag;
    o.files = std::move(r.files);
    o.exit_code = r.flag ? 3 : 0;
  } catch (const std::exception& e) {
    o.report = {{"command", command}, {"error", e.what()}, {"config", config}};
    o.exit_code = 2;
  }
  o.report["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

}  // namespace pwt
