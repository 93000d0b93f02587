#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "comblin/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBoundViolation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw comblin::ConfigError("bad sweep value '" + token + "'");
    }
    if (used != token.size()) throw comblin::ConfigError("bad sweep value '" + token + "'");
    values.push_back(v);
  }
  return values;
}

void print_progress(std::size_t done, std::size_t total) {
  std::fprintf(stderr, "\r  run %zu/%zu", done, total);
  if (done == total) std::fputc('\n', stderr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Combinatorial semi-bandits with linear generalization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "Run one experiment and write result tables");
  run->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (default: config 'output')");
  run->add_option("--threads", threads, "Worker threads (default: config 'parallelism')");
  run->add_flag("--quiet", quiet, "No progress output");

  std::string param;
  std::string values_text;
  auto* sw = app.add_subcommand("sweep", "Run one experiment per parameter value");
  sw->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  sw->add_option("--param", param, "m, d, sigma or lambda")->required();
  sw->add_option("--values", values_text, "Comma-separated values")->required();
  sw->add_option("--out", out_dir, "Output directory (default: config 'output')");
  sw->add_option("--threads", threads, "Worker threads");
  sw->add_flag("--quiet", quiet, "No progress output");

  auto* bounds = app.add_subcommand("check-bounds", "Check the width ledger against its bound");
  bounds->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  bounds->add_option("--threads", threads, "Worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    comblin::ExperimentConfig config = comblin::load_config(config_path);
    if (threads > 0) config.parallelism = threads;
    const std::string out = out_dir.empty() ? config.output : out_dir;
    const comblin::ProgressFn progress = quiet ? comblin::ProgressFn{} : print_progress;

    if (*run) {
      const auto table = comblin::run_experiment(config, progress);
      comblin::emit_results(table, out);
      std::printf("cumulative regret %.6g +/- %.3g over %zu runs -> %s\n",
                  table.estimate.cumulative_regret, table.estimate.cumulative_regret_se,
                  table.runs.size(), out.c_str());
      return kExitOk;
    }
    if (*sw) {
      const auto result = comblin::sweep(config, param, parse_values(values_text), progress);
      comblin::emit_sweep(result, out);
      std::fputs(comblin::sweep_summary_csv(result).c_str(), stdout);
      return kExitOk;
    }
    const auto checks = comblin::check_bounds(config);
    std::size_t failed = 0;
    for (const auto& c : checks) {
      if (!c.passed) {
        ++failed;
        std::printf("run %zu: ledger %.6g exceeds bound %.6g\n", c.run_id, c.ledger_total, c.bound);
      }
    }
    std::printf("%zu/%zu runs within the width bound\n", checks.size() - failed, checks.size());
    return failed == 0 ? kExitOk : kExitBoundViolation;
  } catch (const comblin::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
