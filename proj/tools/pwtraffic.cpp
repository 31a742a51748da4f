#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <pwtraffic/experiment.hpp>

int main(int argc, char** argv) {
  CLI::App app{"traffic workbench for profiled Pennington-Worah matrices"};
  app.require_subcommand(1);
  std::string config_path, out_path, format = "json";
  int threads = 0;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Monte Carlo estimate of the normalized injective trace"},
      {"limit", "exact large-N limit and its split into parts"},
      {"compare", "Y(h) against its Gaussian equivalent, same graphs"},
      {"spectrum", "eigenvalue histogram of Y Y^t and its equivalent"},
      {"decompose", "norms of the lin / per / def / remainder parts of one sample"}};
  for (auto [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "report path (stdout if omitted)");
    sub->add_option("--threads", threads, "trial-level worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  std::string command = app.get_subcommands().front()->get_name();

  pwt::json config;
  try {
    std::ifstream in(config_path);
    config = pwt::json::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "cannot read config: " << e.what() << "\n";
    return 2;
  }
  if (command == "spectrum" && !config.contains("histogram"))
    config["histogram"] = out_path.empty() ? std::string("spectrum_histogram.csv") : out_path + ".hist.csv";

  pwt::RunOutput run = pwt::run_command(command, config, threads);
  for (const auto& [name, body] : run.files)
    if (name == "histogram") {
      std::ofstream(config["histogram"].get<std::string>()) << body;
    }

  std::string text;
  if (format == "csv" && run.report.contains("results"))
    text = pwt::results_csv(run.report["results"]);
  else
    text = run.report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream(out_path) << text;
  }
  if (run.exit_code == 2) std::cerr << "error: " << run.report.value("error", std::string("validation failed")) << "\n";
  return run.exit_code;
}
