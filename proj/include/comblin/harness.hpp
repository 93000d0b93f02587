#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "comblin/agents.hpp"
#include "comblin/environments.hpp"
#include "comblin/errors.hpp"
#include "comblin/metrics.hpp"

namespace comblin {

// Invalid or inconsistent experiment configuration.
class ConfigError : public ParameterError {
 public:
  using ParameterError::ParameterError;
};

enum class ExperimentKind { kLongestPath, kBernoulliTopK, kBernoulliPartition, kCsvEnv };
enum class AgentKind { kCombLinTS, kCombLinUCB, kCombUCB1, kCombTS };

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::kLongestPath;
  AgentKind agent = AgentKind::kCombLinTS;
  std::size_t m = 30;
  std::size_t d = 200;
  std::size_t n = 150;
  std::size_t runs = 200;
  double lambda_true = 10.0;
  double sigma_true = 1.0;
  double lambda = 10.0;
  double sigma = 1.0;
  // CombLinUCB: either c, or delta (with optional theta_norm_bound, default
  // lambda * sqrt(d)) to derive c from recommended_c.
  std::optional<double> c;
  std::optional<double> delta;
  std::optional<double> theta_norm_bound;
  double gamma = 0.0;
  std::uint64_t base_seed = 1;
  std::size_t parallelism = 1;
  bool normalize_features = false;
  bool identity_features = false;  // longest_path only; requires d = 2m(m+1)
  bool fixed_truth = false;        // reuse one truth across runs
  std::string output = "results";
  // Tabular environments.
  std::size_t num_items = 2000;
  std::size_t k = 100;
  double high_mean = 0.15;
  double low_mean = 0.05;
  std::string env_csv;
  std::vector<std::size_t> quotas;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// Strict parsing: unknown keys, wrong types and invalid values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& json);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);

bool is_linear_agent(AgentKind agent);

// Environment for one run: a fresh truth per run unless fixed_truth is set
// or the truth comes from a CSV file.
EnvironmentTruth make_environment(const ExperimentConfig& config, std::size_t run_index);

// c for CombLinUCB: the configured value or recommended_c(lambda, sigma, d,
// n, K, delta, S).
double confidence_scale(const ExperimentConfig& config, const EnvironmentTruth& truth);

std::unique_ptr<Agent> make_agent(const ExperimentConfig& config, const EnvironmentTruth& truth,
                                  std::size_t run_index);

// The episodic loop: A* = exact oracle on w_bar, then for t = 1..n select,
// draw w_t, reveal w_t on A^t only, update, record.
RunRecord simulate(const EnvironmentTruth& truth, Agent& agent, std::size_t n, Rng& weight_rng,
                   Rng& agent_rng, double gamma = 0.0);

// Deterministic in (config, run_index). Numerical failures are rethrown as
// NumericalError carrying the run index.
RunRecord run_single(const ExperimentConfig& config, std::size_t run_index);

struct RunSummary {
  std::size_t run_id = 0;
  double cum_regret = 0.0;
  double cum_return = 0.0;
  std::optional<double> width_ledger_total;
  std::optional<double> width_bound;
};

struct ResultTable {
  ExperimentConfig config;
  BayesRegretEstimate estimate;
  std::vector<RunSummary> runs;
  std::vector<RunRecord> records;
  double wall_seconds = 0.0;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Runs config.runs independent runs on config.parallelism threads. The
// result does not depend on the thread count.
ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

struct SweepResult {
  std::string param;
  std::vector<double> values;  // ascending
  std::vector<ResultTable> tables;
};

// One experiment per value of m, d, sigma or lambda (the algorithm's scales).
SweepResult sweep(const ExperimentConfig& config, const std::string& param,
                  std::vector<double> values, const ProgressFn& progress = {});

std::string per_episode_csv(const ResultTable& table);
std::string per_run_csv(const ResultTable& table);
std::string sweep_summary_csv(const SweepResult& result);

// Writes per_episode.csv, per_run.csv, config.json and metadata.json into
// dir, each via a temporary file and rename.
void emit_results(const ResultTable& table, const std::filesystem::path& dir);

// One subdirectory per value plus sweep_summary.csv.
void emit_sweep(const SweepResult& result, const std::filesystem::path& dir);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct BoundCheck {
  std::size_t run_id = 0;
  double ledger_total = 0.0;
  double bound = 0.0;
  bool passed = false;
};

// Width-ledger invariant: runs the experiment with unit-norm features and
// checks every run's ledger against lemma_width_bound. Linear agents only.
std::vector<BoundCheck> check_bounds(ExperimentConfig config);

std::string format_double(double value);

}  // namespace comblin
