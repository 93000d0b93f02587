#include "comblin/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace comblin {

namespace {

// Run index used to seed the single shared truth when fixed_truth is set.
constexpr std::uint64_t kSharedTruthIndex = std::numeric_limits<std::uint64_t>::max();

const std::vector<std::pair<ExperimentKind, std::string>> kExperimentNames = {
    {ExperimentKind::kLongestPath, "longest_path"},
    {ExperimentKind::kBernoulliTopK, "bernoulli_topk"},
    {ExperimentKind::kBernoulliPartition, "bernoulli_partition"},
    {ExperimentKind::kCsvEnv, "csv_env"},
};

const std::vector<std::pair<AgentKind, std::string>> kAgentNames = {
    {AgentKind::kCombLinTS, "comblints"},
    {AgentKind::kCombLinUCB, "comblinucb"},
    {AgentKind::kCombUCB1, "combucb1"},
    {AgentKind::kCombTS, "combts"},
};

template <typename E>
std::string name_of(const std::vector<std::pair<E, std::string>>& table, E value) {
  for (const auto& [k, v] : table) {
    if (k == value) return v;
  }
  return "?";
}

template <typename E>
E parse_enum(const std::vector<std::pair<E, std::string>>& table, const nlohmann::json& j,
             const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  const auto s = j.get<std::string>();
  for (const auto& [k, v] : table) {
    if (v == s) return k;
  }
  throw ConfigError("unknown " + key + " '" + s + "'");
}

std::size_t get_count(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw ConfigError("'" + key + "' must be a nonnegative integer");
  }
  return j.get<std::size_t>();
}

double get_real(const nlohmann::json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
  return j.get<double>();
}

std::optional<double> get_optional_real(const nlohmann::json& j, const std::string& key) {
  if (j.is_null()) return std::nullopt;
  return get_real(j, key);
}

bool get_bool(const nlohmann::json& j, const std::string& key) {
  if (!j.is_boolean()) throw ConfigError("'" + key + "' must be true or false");
  return j.get<bool>();
}

std::string get_string(const nlohmann::json& j, const std::string& key) {
  if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
  return j.get<std::string>();
}

}  // namespace

bool is_linear_agent(AgentKind agent) {
  return agent == AgentKind::kCombLinTS || agent == AgentKind::kCombLinUCB;
}

ExperimentConfig parse_config(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  for (const auto& [key, value] : json.items()) {
    if (key == "experiment") c.experiment = parse_enum(kExperimentNames, value, key);
    else if (key == "agent") c.agent = parse_enum(kAgentNames, value, key);
    else if (key == "m") c.m = get_count(value, key);
    else if (key == "d") c.d = get_count(value, key);
    else if (key == "n") c.n = get_count(value, key);
    else if (key == "runs") c.runs = get_count(value, key);
    else if (key == "lambda_true") c.lambda_true = get_real(value, key);
    else if (key == "sigma_true") c.sigma_true = get_real(value, key);
    else if (key == "lambda") c.lambda = get_real(value, key);
    else if (key == "sigma") c.sigma = get_real(value, key);
    else if (key == "c") c.c = get_optional_real(value, key);
    else if (key == "delta") c.delta = get_optional_real(value, key);
    else if (key == "theta_norm_bound") c.theta_norm_bound = get_optional_real(value, key);
    else if (key == "gamma") c.gamma = get_real(value, key);
    else if (key == "base_seed") {
      if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0)) {
        throw ConfigError("'base_seed' must be a nonnegative integer");
      }
      c.base_seed = value.get<std::uint64_t>();
    }
    else if (key == "parallelism") c.parallelism = get_count(value, key);
    else if (key == "normalize_features") c.normalize_features = get_bool(value, key);
    else if (key == "identity_features") c.identity_features = get_bool(value, key);
    else if (key == "fixed_truth") c.fixed_truth = get_bool(value, key);
    else if (key == "output") c.output = get_string(value, key);
    else if (key == "num_items") c.num_items = get_count(value, key);
    else if (key == "k") c.k = get_count(value, key);
    else if (key == "high_mean") c.high_mean = get_real(value, key);
    else if (key == "low_mean") c.low_mean = get_real(value, key);
    else if (key == "env_csv") c.env_csv = get_string(value, key);
    else if (key == "quotas") {
      if (!value.is_array()) throw ConfigError("'quotas' must be an array of counts");
      c.quotas.clear();
      for (const auto& q : value) c.quotas.push_back(get_count(q, key));
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  nlohmann::json json;
  try {
    in >> json;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(json);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  auto optional = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["experiment"] = name_of(kExperimentNames, c.experiment);
  j["agent"] = name_of(kAgentNames, c.agent);
  j["m"] = c.m;
  j["d"] = c.d;
  j["n"] = c.n;
  j["runs"] = c.runs;
  j["lambda_true"] = c.lambda_true;
  j["sigma_true"] = c.sigma_true;
  j["lambda"] = c.lambda;
  j["sigma"] = c.sigma;
  j["c"] = optional(c.c);
  j["delta"] = optional(c.delta);
  j["theta_norm_bound"] = optional(c.theta_norm_bound);
  j["gamma"] = c.gamma;
  j["base_seed"] = c.base_seed;
  j["parallelism"] = c.parallelism;
  j["normalize_features"] = c.normalize_features;
  j["identity_features"] = c.identity_features;
  j["fixed_truth"] = c.fixed_truth;
  j["output"] = c.output;
  j["num_items"] = c.num_items;
  j["k"] = c.k;
  j["high_mean"] = c.high_mean;
  j["low_mean"] = c.low_mean;
  j["env_csv"] = c.env_csv;
  j["quotas"] = c.quotas;
  return j;
}

void validate_config(const ExperimentConfig& c) {
  if (c.n < 1) throw ConfigError("n must be at least 1");
  if (c.runs < 1) throw ConfigError("runs must be at least 1");
  if (c.parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (!(c.lambda > 0.0) || !(c.sigma > 0.0)) throw ConfigError("lambda and sigma must be positive");
  if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ConfigError("gamma must lie in [0, 1)");

  if (c.agent == AgentKind::kCombLinUCB) {
    if (c.c.has_value() == c.delta.has_value()) {
      throw ConfigError("comblinucb needs exactly one of 'c' or 'delta'");
    }
    if (c.c && !(*c.c > 0.0)) throw ConfigError("c must be positive");
    if (c.delta && !(*c.delta > 0.0 && *c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (c.theta_norm_bound && !(*c.theta_norm_bound >= 0.0)) {
      throw ConfigError("theta_norm_bound must be nonnegative");
    }
  }

  switch (c.experiment) {
    case ExperimentKind::kLongestPath:
      if (c.m < 1 || c.d < 1) throw ConfigError("longest_path needs m >= 1 and d >= 1");
      if (!(c.lambda_true > 0.0)) throw ConfigError("lambda_true must be positive");
      if (!(c.sigma_true >= 0.0)) throw ConfigError("sigma_true must be nonnegative");
      if (c.identity_features && c.d != 2 * c.m * (c.m + 1)) {
        throw ConfigError("identity_features needs d = 2m(m+1) = " +
                          std::to_string(2 * c.m * (c.m + 1)));
      }
      if (c.agent == AgentKind::kCombTS) {
        throw ConfigError("combts needs weights in [0, 1]; use a Bernoulli experiment");
      }
      break;
    case ExperimentKind::kBernoulliTopK:
    case ExperimentKind::kBernoulliPartition:
      if (c.num_items < 2) throw ConfigError("num_items must be at least 2");
      if (c.k < 1 || c.k > c.num_items) throw ConfigError("k must lie in [1, num_items]");
      if (c.d < 4) throw ConfigError("tabular features need d >= 4");
      if (!(c.high_mean >= 0.0 && c.high_mean <= 1.0) || !(c.low_mean >= 0.0 && c.low_mean <= 1.0)) {
        throw ConfigError("Bernoulli means must lie in [0, 1]");
      }
      if (c.experiment == ExperimentKind::kBernoulliPartition &&
          (c.k % 2 != 0 || c.num_items % 2 != 0)) {
        throw ConfigError("bernoulli_partition needs even k and num_items");
      }
      break;
    case ExperimentKind::kCsvEnv:
      if (c.env_csv.empty()) throw ConfigError("csv_env needs 'env_csv'");
      if (c.quotas.empty() && c.k < 1) throw ConfigError("k must be at least 1");
      break;
  }
}

namespace {

EnvironmentTruth normalized(EnvironmentTruth truth) {
  RowMatrix phi = truth.model.features();
  for (Eigen::Index e = 0; e < phi.rows(); ++e) {
    const double norm = phi.row(e).norm();
    if (norm > 0.0) phi.row(e) /= norm;
  }
  truth.model = GroundSetModel(std::move(phi));
  return truth;
}

bool shares_truth(const ExperimentConfig& c) {
  return c.fixed_truth || c.experiment == ExperimentKind::kCsvEnv;
}

std::uint64_t environment_index(const ExperimentConfig& c, std::size_t run_index) {
  return shares_truth(c) ? kSharedTruthIndex : run_index;
}

}  // namespace

EnvironmentTruth make_environment(const ExperimentConfig& c, std::size_t run_index) {
  Rng rng = make_rng(c.base_seed, environment_index(c, run_index), Stream::kEnvironment);
  switch (c.experiment) {
    case ExperimentKind::kLongestPath: {
      FeatureScheme scheme = FeatureScheme::kGaussian;
      if (c.identity_features) scheme = FeatureScheme::kIdentity;
      else if (c.normalize_features) scheme = FeatureScheme::kNormalized;
      return generate_coherent_gaussian(c.m, c.d, c.lambda_true, c.sigma_true, rng, scheme);
    }
    case ExperimentKind::kBernoulliTopK:
    case ExperimentKind::kBernoulliPartition: {
      BernoulliSpec spec;
      spec.num_items = c.num_items;
      spec.dim = c.d;
      spec.k = c.k;
      spec.partition = c.experiment == ExperimentKind::kBernoulliPartition;
      spec.high_mean = c.high_mean;
      spec.low_mean = c.low_mean;
      auto truth = generate_bernoulli_tabular(spec, rng);
      return c.normalize_features ? normalized(std::move(truth)) : truth;
    }
    case ExperimentKind::kCsvEnv: {
      TabularOptions options;
      options.k = c.k;
      options.quotas = c.quotas;
      auto truth = load_tabular_environment(c.env_csv, options);
      return c.normalize_features ? normalized(std::move(truth)) : truth;
    }
  }
  throw ConfigError("unknown experiment kind");
}

double confidence_scale(const ExperimentConfig& c, const EnvironmentTruth& truth) {
  if (c.c) return *c.c;
  if (!c.delta) throw ConfigError("comblinucb needs 'c' or 'delta'");
  const std::size_t d = truth.dim();
  const double s = c.theta_norm_bound.value_or(c.lambda * std::sqrt(static_cast<double>(d)));
  return recommended_c(c.lambda, c.sigma, d, c.n, family_max_size(truth.family), *c.delta, s);
}

std::unique_ptr<Agent> make_agent(const ExperimentConfig& c, const EnvironmentTruth& truth,
                                  std::size_t run_index) {
  std::unique_ptr<Oracle> oracle = make_exact_oracle(truth.family);
  if (c.gamma > 0.0) {
    oracle = std::make_unique<GammaApproximateOracle>(
        std::move(oracle), c.gamma, mix_seed(c.base_seed, run_index, Stream::kOracle));
  }
  switch (c.agent) {
    case AgentKind::kCombLinTS:
      return std::make_unique<CombLinTS>(truth.model, std::move(oracle), c.lambda, c.sigma);
    case AgentKind::kCombLinUCB:
      return std::make_unique<CombLinUCB>(truth.model, std::move(oracle), c.lambda, c.sigma,
                                          confidence_scale(c, truth));
    case AgentKind::kCombUCB1:
      return std::make_unique<CombUCB1>(truth.num_items(), std::move(oracle));
    case AgentKind::kCombTS:
      return std::make_unique<CombTS>(truth.num_items(), std::move(oracle));
  }
  throw ConfigError("unknown agent kind");
}

RunRecord simulate(const EnvironmentTruth& truth, Agent& agent, std::size_t n, Rng& weight_rng,
                   Rng& agent_rng, double gamma) {
  const auto exact = make_exact_oracle(truth.family);
  const Action a_star = exact->solve(truth.mean_weights);

  RunRecord record;
  record.optimal_mean_return = total_weight(a_star, truth.mean_weights);
  record.realized_regret.reserve(n);
  record.realized_return.reserve(n);
  record.environment.num_items = truth.num_items();
  record.environment.dim = truth.dim();
  record.environment.max_action_size = family_max_size(truth.family);
  record.environment.norm_bounded = truth.model.norm_bounded();

  for (std::size_t t = 1; t <= n; ++t) {
    try {
      const Action action = agent.select(t, agent_rng);
      if (!validate_action(action, truth.family)) {
        throw InputError("agent " + std::string(agent.name()) + " chose an infeasible action");
      }
      if (const auto width = agent.width_sum(action)) record.width_sum.push_back(*width);

      const Eigen::VectorXd w = sample_weights(truth, weight_rng);
      const std::span<const double> weights(w.data(), static_cast<std::size_t>(w.size()));
      agent.update(action, reveal(action, weights));

      const double achieved = total_weight(action, weights);
      record.realized_return.push_back(achieved);
      record.realized_regret.push_back(total_weight(a_star, weights) - achieved);
      if (gamma > 0.0) record.scaled_regret.push_back(scaled_realized_regret(a_star, action, weights, gamma));
    } catch (const NumericalError& e) {
      throw NumericalError("episode " + std::to_string(t) + ": " + e.what());
    }
  }
  return record;
}

namespace {

RunRecord run_with_truth(const ExperimentConfig& c, std::size_t run_index,
                         const EnvironmentTruth& truth) {
  try {
    auto agent = make_agent(c, truth, run_index);
    Rng weight_rng = make_rng(c.base_seed, run_index, Stream::kWeights);
    Rng agent_rng = make_rng(c.base_seed, run_index, Stream::kAgent);
    RunRecord record = simulate(truth, *agent, c.n, weight_rng, agent_rng, c.gamma);
    record.run_id = run_index;
    record.environment.seed = mix_seed(c.base_seed, environment_index(c, run_index), Stream::kEnvironment);
    return record;
  } catch (const NumericalError& e) {
    throw NumericalError("run " + std::to_string(run_index) + ", " + e.what());
  }
}

std::optional<double> width_bound_for(const ExperimentConfig& c, const RunRecord& r) {
  if (!is_linear_agent(c.agent) || !r.environment.norm_bounded) return std::nullopt;
  return lemma_width_bound(c.lambda, c.sigma, r.environment.dim, c.n, r.environment.max_action_size);
}

}  // namespace

RunRecord run_single(const ExperimentConfig& c, std::size_t run_index) {
  validate_config(c);
  const EnvironmentTruth truth = make_environment(c, run_index);
  return run_with_truth(c, run_index, truth);
}

ResultTable run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();

  std::shared_ptr<const EnvironmentTruth> shared;
  if (shares_truth(config)) shared = std::make_shared<const EnvironmentTruth>(make_environment(config, 0));

  const std::size_t runs = config.runs;
  std::vector<RunRecord> records(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::atomic<bool> abort{false};
  std::mutex progress_mutex;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= runs) return;
      try {
        if (shared) {
          records[i] = run_with_truth(config, i, *shared);
        } else {
          const EnvironmentTruth truth = make_environment(config, i);
          records[i] = run_with_truth(config, i, truth);
        }
      } catch (...) {
        errors[i] = std::current_exception();
        abort.store(true);
      }
      const std::size_t finished = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, runs);
      }
    }
  };

  const std::size_t threads = std::min(config.parallelism, runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ResultTable table;
  table.config = config;
  table.estimate = estimate_bayes_regret(records);
  table.runs.reserve(runs);
  for (const auto& r : records) {
    RunSummary s;
    s.run_id = r.run_id;
    s.cum_regret = r.cumulative_regret();
    s.cum_return = r.cumulative_return();
    if (is_linear_agent(config.agent)) s.width_ledger_total = r.width_total();
    s.width_bound = width_bound_for(config, r);
    table.runs.push_back(s);
  }
  table.records = std::move(records);
  table.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return table;
}

SweepResult sweep(const ExperimentConfig& config, const std::string& param,
                  std::vector<double> values, const ProgressFn& progress) {
  static const std::set<std::string> kParams = {"m", "d", "sigma", "lambda"};
  if (!kParams.contains(param)) {
    throw ConfigError("cannot sweep '" + param + "'; choose one of m, d, sigma, lambda");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::sort(values.begin(), values.end());

  SweepResult result;
  result.param = param;
  result.values = values;
  for (double v : values) {
    ExperimentConfig c = config;
    if (param == "m" || param == "d") {
      if (!(v >= 1.0) || v != std::floor(v)) {
        throw ConfigError(param + " values must be positive integers, got " + format_double(v));
      }
      (param == "m" ? c.m : c.d) = static_cast<std::size_t>(v);
    } else if (param == "sigma") {
      c.sigma = v;
    } else {
      c.lambda = v;
    }
    validate_config(c);
    result.tables.push_back(run_experiment(c, progress));
  }
  return result;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string per_episode_csv(const ResultTable& table) {
  const auto& est = table.estimate;
  std::string out = "episode,mean_regret,se_regret,mean_cum_regret,mean_per_step_return\n";
  for (std::size_t t = 0; t < est.mean_regret.size(); ++t) {
    out += std::to_string(t + 1);
    for (double v : {est.mean_regret[t], est.se_regret[t], est.mean_cum_regret[t],
                     est.mean_per_step_return[t]}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::string per_run_csv(const ResultTable& table) {
  std::string out = "run_id,cum_regret,cum_return,width_ledger_total,width_bound\n";
  for (const auto& r : table.runs) {
    out += std::to_string(r.run_id) + ',' + format_double(r.cum_regret) + ',' +
           format_double(r.cum_return) + ',';
    if (r.width_ledger_total) out += format_double(*r.width_ledger_total);
    out += ',';
    if (r.width_bound) out += format_double(*r.width_bound);
    out += '\n';
  }
  return out;
}

std::string sweep_summary_csv(const SweepResult& result) {
  std::string out = "value,cum_regret,se_cum_regret\n";
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    const auto& est = result.tables[i].estimate;
    out += format_double(result.values[i]) + ',' + format_double(est.cumulative_regret) + ',' +
           format_double(est.cumulative_regret_se) + '\n';
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out << contents;
    out.flush();
    if (!out) throw InputError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void emit_results(const ResultTable& table, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create " + dir.string() + ": " + ec.message());
  write_file_atomic(dir / "per_episode.csv", per_episode_csv(table));
  write_file_atomic(dir / "per_run.csv", per_run_csv(table));
  write_file_atomic(dir / "config.json", to_json(table.config).dump(2) + "\n");
  nlohmann::json meta;
  meta["wall_seconds"] = table.wall_seconds;
  meta["runs"] = table.runs.size();
  meta["episodes"] = table.config.n;
  meta["cumulative_regret"] = table.estimate.cumulative_regret;
  meta["cumulative_regret_se"] = table.estimate.cumulative_regret_se;
  write_file_atomic(dir / "metadata.json", meta.dump(2) + "\n");
}

void emit_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%g", result.param.c_str(), result.values[i]);
    emit_results(result.tables[i], dir / name);
  }
  write_file_atomic(dir / "sweep_summary.csv", sweep_summary_csv(result));
}

std::vector<BoundCheck> check_bounds(ExperimentConfig config) {
  if (!is_linear_agent(config.agent)) {
    throw ConfigError("check-bounds needs a linear agent (comblints or comblinucb)");
  }
  if (!config.identity_features) config.normalize_features = true;
  const ResultTable table = run_experiment(config);
  std::vector<BoundCheck> checks;
  checks.reserve(table.runs.size());
  for (const auto& r : table.runs) {
    if (!r.width_bound) throw ConfigError("features are not norm-bounded; width bound does not apply");
    BoundCheck check;
    check.run_id = r.run_id;
    check.ledger_total = r.width_ledger_total.value_or(0.0);
    check.bound = *r.width_bound;
    check.passed = check.ledger_total <= check.bound;
    checks.push_back(check);
  }
  return checks;
}

}  // namespace comblin
