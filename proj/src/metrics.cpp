#include "comblin/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "comblin/errors.hpp"

namespace comblin {

double RunRecord::cumulative_regret() const {
  return std::accumulate(realized_regret.begin(), realized_regret.end(), 0.0);
}

double RunRecord::cumulative_return() const {
  return std::accumulate(realized_return.begin(), realized_return.end(), 0.0);
}

double RunRecord::width_total() const {
  return std::accumulate(width_sum.begin(), width_sum.end(), 0.0);
}

double realized_regret(const Action& a_star, const Action& a_t, std::span<const double> weights) {
  return total_weight(a_star, weights) - total_weight(a_t, weights);
}

double scaled_realized_regret(const Action& a_opt, const Action& a_t,
                              std::span<const double> weights, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ParameterError("gamma must lie in [0, 1), got " + std::to_string(gamma));
  }
  return total_weight(a_opt, weights) - total_weight(a_t, weights) / (1.0 - gamma);
}

namespace {

void check_records(std::span<const RunRecord> records) {
  if (records.empty()) throw InputError("no run records to aggregate");
  const std::size_t n = records.front().episodes();
  for (const auto& r : records) {
    if (r.episodes() != n || r.realized_return.size() != n) {
      throw InputError("run " + std::to_string(r.run_id) + " has " +
                       std::to_string(r.episodes()) + " episodes, expected " + std::to_string(n));
    }
  }
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

// Sample standard deviation over sqrt(count); zero for a single value.
double standard_error(const std::vector<double>& values, double mean) {
  if (values.size() < 2) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double k = static_cast<double>(values.size());
  return std::sqrt(ss / (k - 1.0) / k);
}

}  // namespace

BayesRegretEstimate estimate_bayes_regret(std::span<const RunRecord> records) {
  check_records(records);
  const std::size_t n = records.front().episodes();
  const std::size_t runs = records.size();
  const double k = static_cast<double>(runs);

  BayesRegretEstimate est;
  est.runs = runs;
  est.mean_regret.resize(n);
  est.se_regret.resize(n);
  est.mean_cum_regret.resize(n);
  est.mean_per_step_return.assign(n, 0.0);

  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> column(runs);
    for (std::size_t i = 0; i < runs; ++i) column[i] = records[i].realized_regret[t];
    est.mean_regret[t] = mean_of(column);
    est.se_regret[t] = standard_error(column, est.mean_regret[t]);
    est.mean_cum_regret[t] = (t == 0 ? 0.0 : est.mean_cum_regret[t - 1]) + est.mean_regret[t];
  }

  for (const auto& r : records) {
    double running = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      running += r.realized_return[t];
      est.mean_per_step_return[t] += running / static_cast<double>(t + 1);
    }
  }
  for (double& v : est.mean_per_step_return) v /= k;

  std::vector<double> totals(runs);
  for (std::size_t i = 0; i < runs; ++i) totals[i] = records[i].cumulative_regret();
  est.cumulative_regret = n > 0 ? est.mean_cum_regret.back() : 0.0;
  est.cumulative_regret_se = standard_error(totals, mean_of(totals));
  return est;
}

double per_step_return(std::span<const RunRecord> records, std::size_t episodes) {
  check_records(records);
  const std::size_t n = records.front().episodes();
  const std::size_t horizon = episodes == 0 ? n : episodes;
  if (horizon > n) {
    throw InputError("requested " + std::to_string(horizon) + " episodes, runs have " +
                     std::to_string(n));
  }
  double sum = 0.0;
  for (const auto& r : records) {
    const double total = std::accumulate(r.realized_return.begin(),
                                         r.realized_return.begin() + static_cast<std::ptrdiff_t>(horizon), 0.0);
    sum += total / static_cast<double>(horizon);
  }
  return sum / static_cast<double>(records.size());
}

double mean_optimal_return(std::span<const RunRecord> records) {
  check_records(records);
  double sum = 0.0;
  for (const auto& r : records) sum += r.optimal_mean_return;
  return sum / static_cast<double>(records.size());
}

double lemma_width_bound(double lambda, double sigma, std::size_t d, std::size_t n, std::size_t k) {
  if (!(lambda > 0.0) || !(sigma > 0.0) || d == 0 || n == 0 || k == 0) {
    throw ParameterError("width bound needs positive lambda, sigma, d, n and K");
  }
  const double dd = static_cast<double>(d);
  const double nn = static_cast<double>(n);
  const double kk = static_cast<double>(k);
  const double numerator = dd * nn * std::log1p(nn * kk * lambda * lambda / (dd * sigma * sigma));
  const double denominator = std::log1p(lambda * lambda / (sigma * sigma));
  return kk * lambda * std::sqrt(numerator / denominator);
}

}  // namespace comblin
