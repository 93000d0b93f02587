#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "comblin/core_model.hpp"

namespace comblin {

struct EnvironmentDigest {
  std::uint64_t seed = 0;
  std::size_t num_items = 0;
  std::size_t dim = 0;
  std::size_t max_action_size = 0;
  bool norm_bounded = false;

  friend bool operator==(const EnvironmentDigest&, const EnvironmentDigest&) = default;
};

// Per-episode ledger of one Monte-Carlo run.
struct RunRecord {
  std::size_t run_id = 0;
  std::vector<double> realized_regret;  // f(A*, w_t) - f(A^t, w_t)
  std::vector<double> realized_return;  // f(A^t, w_t)
  std::vector<double> width_sum;        // linear agents only, at selection time
  std::vector<double> scaled_regret;    // only when the agent's oracle has gamma > 0
  double optimal_mean_return = 0.0;     // f(A*, w_bar)
  EnvironmentDigest environment;

  std::size_t episodes() const { return realized_regret.size(); }
  double cumulative_regret() const;
  double cumulative_return() const;
  double width_total() const;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// R_t = f(A*, w_t) - f(A^t, w_t); may be negative in a single episode.
double realized_regret(const Action& a_star, const Action& a_t, std::span<const double> weights);

// R^gamma_t = f(A_opt, w_t) - f(A^t, w_t) / (1 - gamma). Throws
// ParameterError unless gamma lies in [0, 1).
double scaled_realized_regret(const Action& a_opt, const Action& a_t,
                              std::span<const double> weights, double gamma);

// Monte-Carlo estimate of the Bayes cumulative regret from independent runs.
struct BayesRegretEstimate {
  std::size_t runs = 0;
  std::vector<double> mean_regret;           // across-run mean of R_t
  std::vector<double> se_regret;             // its standard error
  std::vector<double> mean_cum_regret;       // running sum of mean_regret
  std::vector<double> mean_per_step_return;  // across-run mean of (1/t) sum_{s<=t} f(A^s, w_s)
  double cumulative_regret = 0.0;            // mean_cum_regret at episode n
  double cumulative_regret_se = 0.0;         // standard error of per-run totals
};

// Throws InputError on an empty set or unequal episode counts. Standard
// errors use the sample variance and are zero for a single run.
BayesRegretEstimate estimate_bayes_regret(std::span<const RunRecord> records);

// Across-run mean of the time-averaged return over the first `episodes`
// episodes (all of them when zero).
double per_step_return(std::span<const RunRecord> records, std::size_t episodes = 0);

// Mean of f(A*, w_bar) over runs.
double mean_optimal_return(std::span<const RunRecord> records);

// Worst-case bound on sum_t sum_{e in A^t} sqrt(phi_e' Sigma_t phi_e) for
// feature rows of norm at most 1:
//   K lambda sqrt(d n ln(1 + n K lambda^2 / (d sigma^2)) / ln(1 + lambda^2 / sigma^2)).
double lemma_width_bound(double lambda, double sigma, std::size_t d, std::size_t n, std::size_t k);

}  // namespace comblin
