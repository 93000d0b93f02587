#include "comblin/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "comblin/errors.hpp"

namespace comblin {

namespace {

constexpr double kUcb1Exploration = 1.5;

}  // namespace

Action comblints_select(const GaussianBelief& belief, const GroundSetModel& model, Oracle& oracle,
                        Rng& rng) {
  const Eigen::VectorXd theta = sample_coefficients(belief, rng);
  return oracle.solve(model.scores(theta));
}

Eigen::VectorXd ucb_weights(const GaussianBelief& belief, const GroundSetModel& model, double c) {
  Eigen::VectorXd w = model.scores(belief.mean());
  if (c == 0.0) return w;
  const RowMatrix& phi = model.features();
  // Row e of (Phi Sigma) .* Phi sums to phi_e' Sigma phi_e.
  const RowMatrix projected = phi * belief.covariance();
  const Eigen::VectorXd quad = projected.cwiseProduct(phi).rowwise().sum();
  for (Eigen::Index e = 0; e < w.size(); ++e) w[e] += c * std::sqrt(std::max(quad[e], 0.0));
  return w;
}

Action comblinucb_select(const GaussianBelief& belief, const GroundSetModel& model, Oracle& oracle,
                         double c) {
  return oracle.solve(ucb_weights(belief, model, c));
}

double width_sum(const GaussianBelief& belief, const GroundSetModel& model, const Action& action) {
  double total = 0.0;
  for (Item e : action.items) total += belief.width(model.phi(e).transpose());
  return total;
}

LinearAgent::LinearAgent(const GroundSetModel& model, std::unique_ptr<Oracle> oracle, double lambda,
                         double sigma)
    : model_(model), oracle_(std::move(oracle)), belief_(model.dim(), lambda, sigma) {
  if (!oracle_) throw ParameterError("agent needs an oracle");
}

void LinearAgent::update(const Action& /*action*/, const Feedback& feedback) {
  belief_.observe(feedback, model_);
}

std::optional<double> LinearAgent::width_sum(const Action& action) const {
  return comblin::width_sum(belief_, model_, action);
}

Action CombLinTS::select(std::size_t /*episode*/, Rng& rng) {
  return comblints_select(belief_, model_, *oracle_, rng);
}

CombLinUCB::CombLinUCB(const GroundSetModel& model, std::unique_ptr<Oracle> oracle, double lambda,
                       double sigma, double c)
    : LinearAgent(model, std::move(oracle), lambda, sigma), c_(c) {
  if (!(c >= 0.0)) throw ParameterError("confidence scale c must be nonnegative");
}

Action CombLinUCB::select(std::size_t /*episode*/, Rng& /*rng*/) {
  return comblinucb_select(belief_, model_, *oracle_, c_);
}

void CountStats::update(const Feedback& feedback) {
  for (const auto& [e, w] : feedback.observations) {
    if (e >= counts.size()) throw InputError("feedback item " + std::to_string(e) + " out of range");
    ++counts[e];
    means[e] += (w - means[e]) / static_cast<double>(counts[e]);
  }
}

void BetaStats::update(const Feedback& feedback) {
  for (const auto& [e, w] : feedback.observations) {
    if (e >= alpha.size()) throw InputError("feedback item " + std::to_string(e) + " out of range");
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InputError("Beta posterior needs weights in [0, 1], item " + std::to_string(e) +
                       " observed " + std::to_string(w));
    }
  }
  for (const auto& [e, w] : feedback.observations) {
    alpha[e] += w;
    beta[e] += 1.0 - w;
  }
}

double combucb1_index(double mean, std::size_t count, std::size_t episode) {
  const double t = static_cast<double>(std::max<std::size_t>(episode, 1));
  return mean + std::sqrt(kUcb1Exploration * std::log(t) / static_cast<double>(count));
}

std::vector<double> combucb1_scores(const CountStats& stats, std::size_t episode) {
  const std::size_t n = stats.counts.size();
  std::vector<double> scores(n, 0.0);
  double largest = -std::numeric_limits<double>::infinity();
  bool any_unobserved = false;
  for (std::size_t e = 0; e < n; ++e) {
    if (stats.counts[e] == 0) {
      any_unobserved = true;
      continue;
    }
    scores[e] = combucb1_index(stats.means[e], stats.counts[e], episode);
    largest = std::max(largest, scores[e]);
  }
  if (any_unobserved) {
    const double surrogate = (std::isfinite(largest) ? std::max(largest, 0.0) : 0.0) + 1.0;
    for (std::size_t e = 0; e < n; ++e) {
      if (stats.counts[e] == 0) scores[e] = surrogate;
    }
  }
  return scores;
}

Action combucb1_select(const CountStats& stats, Oracle& oracle, std::size_t episode) {
  const auto scores = combucb1_scores(stats, episode);
  return oracle.solve(std::span<const double>(scores));
}

Action combts_select(const BetaStats& stats, Oracle& oracle, Rng& rng) {
  std::vector<double> draws(stats.alpha.size());
  for (std::size_t e = 0; e < draws.size(); ++e) {
    std::gamma_distribution<double> ga(stats.alpha[e], 1.0);
    std::gamma_distribution<double> gb(stats.beta[e], 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    draws[e] = (x + y > 0.0) ? x / (x + y) : 0.5;
  }
  return oracle.solve(std::span<const double>(draws));
}

Action CombUCB1::select(std::size_t episode, Rng& /*rng*/) {
  return combucb1_select(stats_, *oracle_, episode);
}

void CombUCB1::update(const Action& /*action*/, const Feedback& feedback) { stats_.update(feedback); }

Action CombTS::select(std::size_t /*episode*/, Rng& rng) { return combts_select(stats_, *oracle_, rng); }

void CombTS::update(const Action& /*action*/, const Feedback& feedback) { stats_.update(feedback); }

double recommended_c(double lambda, double sigma, std::size_t d, std::size_t n, std::size_t k,
                     double delta, double theta_norm_bound) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw ParameterError("delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (!(lambda > 0.0) || !(sigma > 0.0)) throw ParameterError("lambda and sigma must be positive");
  if (d == 0 || n == 0 || k == 0) throw ParameterError("d, n and K must be positive");
  if (!(theta_norm_bound >= 0.0)) throw ParameterError("theta norm bound must be nonnegative");
  const double dd = static_cast<double>(d);
  const double growth = static_cast<double>(n) * static_cast<double>(k) * lambda * lambda /
                        (dd * sigma * sigma);
  const double radius = std::sqrt(dd * std::log1p(growth) + 2.0 * std::log(1.0 / delta)) / sigma;
  return radius + theta_norm_bound / lambda;
}

}  // namespace comblin
