// popcast: synthetic traces, forecasting experiments, the complete-information
// oracle and regret runs from one flat key=value configuration.
//
// Exit codes: 0 success, 1 internal error, 2 invalid configuration,
// 3 invalid input data.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "popcast/config.hpp"
#include "popcast/error.hpp"
#include "popcast/harness.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("-c,--config", opts.config, "key=value configuration file");
  cmd->add_option("--set", opts.overrides, "override one key, e.g. --set lambda=0.015")->take_all();
  cmd->add_option("-o,--out", opts.out, "output directory (trace file for simulate)");
}

popcast::ExperimentConfig build_config(const CommonOptions& opts, popcast::Mode mode) {
  popcast::ExperimentConfig c;
  if (!opts.config.empty()) c = popcast::load_config(opts.config);
  c.mode = mode;
  for (const auto& kv : opts.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw popcast::ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!opts.out.empty()) c.out = opts.out;
  return c;
}

void print_summary(const popcast::Report& report) {
  std::printf("%-8s %9s %11s %7s %7s %9s\n", "algo", "instances", "normalized", "TPR", "TNR", "mean_age");
  auto show = [](const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); };
  for (const auto& s : report.summary) {
    std::printf("%-8s %9llu %11.4f %7.3f %7.3f %9.2f\n", s.algorithm.c_str(),
                static_cast<unsigned long long>(s.instances), show(s.normalized_reward), show(s.true_positive_rate),
                show(s.true_negative_rate), show(s.mean_forecast_age));
  }
}

int simulate(const CommonOptions& opts) {
  const auto c = build_config(opts, popcast::Mode::simulate).resolved();
  const auto params = c.sim_params();
  const std::filesystem::path path = opts.out.empty() ? std::filesystem::path(c.out) / "traces.csv" : std::filesystem::path(opts.out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw popcast::Error("cannot write " + path.string());
  popcast::write_traces(out, popcast::generate_corpus(params, *c.videos));
  std::cout << "wrote " << *c.videos << " traces to " << path.string() << '\n';
  return 0;
}

int run(const CommonOptions& opts, popcast::Mode mode) {
  const auto c = build_config(opts, mode);
  const auto report = popcast::run_experiment(c);
  popcast::emit_report(report, c.out);
  print_summary(report);
  std::cout << "report written to " << c.out << '\n';
  return 0;
}

int oracle(const CommonOptions& opts) {
  const auto c = build_config(opts, popcast::Mode::oracle);
  const auto result = popcast::oracle_experiment(c);
  for (const auto& [key, value] : result.report.metrics) std::cout << key << " = " << value << '\n';
  if (!opts.out.empty()) popcast::emit_report(result.report, c.out);
  return 0;
}

int regret(const CommonOptions& opts) {
  const auto c = build_config(opts, popcast::Mode::regret);
  const auto result = popcast::regret_experiment(c);
  popcast::emit_report(result.report, c.out);
  for (const auto& [key, value] : result.report.metrics) std::cout << key << " = " << value << '\n';
  std::cout << "report written to " << c.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online video popularity forecasting experiments"};
  app.require_subcommand(1);
  CommonOptions opts;
  auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic trace CSV");
  auto* run_cmd = app.add_subcommand("run", "stream a corpus through the forecaster and benchmarks");
  auto* oracle_cmd = app.add_subcommand("oracle", "solve a discrete world and print the optimal policy");
  auto* regret_cmd = app.add_subcommand("regret", "measure one age's learner regret against a known world");
  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark predictors only");
  for (auto* cmd : {sim_cmd, run_cmd, oracle_cmd, regret_cmd, bench_cmd}) add_common(cmd, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim_cmd->parsed()) return simulate(opts);
    if (run_cmd->parsed()) return run(opts, popcast::Mode::run);
    if (bench_cmd->parsed()) return run(opts, popcast::Mode::bench);
    if (oracle_cmd->parsed()) return oracle(opts);
    if (regret_cmd->parsed()) return regret(opts);
  } catch (const popcast::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const popcast::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
