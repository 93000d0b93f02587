#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "comblin/belief.hpp"
#include "comblin/core_model.hpp"
#include "comblin/oracles.hpp"
#include "comblin/rng.hpp"

namespace comblin {

// A learner in the semi-bandit protocol. It sees the features and the
// feedback on its own actions, nothing else.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;
  // episode is 1-based.
  virtual Action select(std::size_t episode, Rng& rng) = 0;
  virtual void update(const Action& action, const Feedback& feedback) = 0;
  // sum over the action of sqrt(phi' Sigma_t phi) under the current belief;
  // empty for agents without one.
  virtual std::optional<double> width_sum(const Action& /*action*/) const { return std::nullopt; }
};

// ---- Linear-generalization agents ----

// Scores Phi * theta for theta ~ N(mean, Sigma), maximized by the oracle.
Action comblints_select(const GaussianBelief& belief, const GroundSetModel& model, Oracle& oracle,
                        Rng& rng);

// UCB vector w_hat(e) = <phi_e, mean> + c * sqrt(phi_e' Sigma phi_e) for every item.
Eigen::VectorXd ucb_weights(const GaussianBelief& belief, const GroundSetModel& model, double c);

Action comblinucb_select(const GaussianBelief& belief, const GroundSetModel& model, Oracle& oracle,
                         double c);

double width_sum(const GaussianBelief& belief, const GroundSetModel& model, const Action& action);

class LinearAgent : public Agent {
 public:
  LinearAgent(const GroundSetModel& model, std::unique_ptr<Oracle> oracle, double lambda,
              double sigma);

  void update(const Action& action, const Feedback& feedback) override;
  std::optional<double> width_sum(const Action& action) const override;

  const GaussianBelief& belief() const { return belief_; }
  GaussianBelief& mutable_belief() { return belief_; }

 protected:
  const GroundSetModel& model_;
  std::unique_ptr<Oracle> oracle_;
  GaussianBelief belief_;
};

class CombLinTS final : public LinearAgent {
 public:
  using LinearAgent::LinearAgent;
  std::string_view name() const override { return "comblints"; }
  Action select(std::size_t episode, Rng& rng) override;
};

class CombLinUCB final : public LinearAgent {
 public:
  // c >= 0; zero is accepted for testing the bonus-free limit.
  CombLinUCB(const GroundSetModel& model, std::unique_ptr<Oracle> oracle, double lambda,
             double sigma, double c);
  std::string_view name() const override { return "comblinucb"; }
  Action select(std::size_t episode, Rng& rng) override;
  double c() const { return c_; }

 private:
  double c_;
};

// ---- Baselines without generalization ----

// Observation counts and running means per item (CombUCB1).
struct CountStats {
  std::vector<std::size_t> counts;
  std::vector<double> means;

  explicit CountStats(std::size_t num_items) : counts(num_items, 0), means(num_items, 0.0) {}
  void update(const Feedback& feedback);
};

// Beta(alpha, beta) posterior per item, starting at Beta(1, 1) (CombTS).
struct BetaStats {
  std::vector<double> alpha;
  std::vector<double> beta;

  explicit BetaStats(std::size_t num_items) : alpha(num_items, 1.0), beta(num_items, 1.0) {}
  // alpha += w, beta += 1 - w. Throws InputError for w outside [0, 1].
  void update(const Feedback& feedback);
};

// mean + sqrt(1.5 ln t / count); requires count >= 1, t >= 1.
double combucb1_index(double mean, std::size_t count, std::size_t episode);

// Per-item UCBs; unobserved items score 1 above the largest observed UCB.
std::vector<double> combucb1_scores(const CountStats& stats, std::size_t episode);

Action combucb1_select(const CountStats& stats, Oracle& oracle, std::size_t episode);

Action combts_select(const BetaStats& stats, Oracle& oracle, Rng& rng);

class CombUCB1 final : public Agent {
 public:
  CombUCB1(std::size_t num_items, std::unique_ptr<Oracle> oracle)
      : stats_(num_items), oracle_(std::move(oracle)) {}
  std::string_view name() const override { return "combucb1"; }
  Action select(std::size_t episode, Rng& rng) override;
  void update(const Action& action, const Feedback& feedback) override;
  const CountStats& stats() const { return stats_; }

 private:
  CountStats stats_;
  std::unique_ptr<Oracle> oracle_;
};

class CombTS final : public Agent {
 public:
  CombTS(std::size_t num_items, std::unique_ptr<Oracle> oracle)
      : stats_(num_items), oracle_(std::move(oracle)) {}
  std::string_view name() const override { return "combts"; }
  Action select(std::size_t episode, Rng& rng) override;
  void update(const Action& action, const Feedback& feedback) override;
  const BetaStats& stats() const { return stats_; }

 private:
  BetaStats stats_;
  std::unique_ptr<Oracle> oracle_;
};

// Smallest c admitted by the CombLinUCB regret bound:
//   (1/sigma) sqrt(d ln(1 + n K lambda^2 / (d sigma^2)) + 2 ln(1/delta)) + S / lambda
// where S bounds ||theta*||_2. Throws ParameterError unless delta in (0, 1),
// lambda, sigma > 0, d, n, K >= 1 and S >= 0.
double recommended_c(double lambda, double sigma, std::size_t d, std::size_t n, std::size_t k,
                     double delta, double theta_norm_bound);

}  // namespace comblin
