#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "comblin/core_model.hpp"
#include "comblin/rng.hpp"

namespace comblin {

// Gaussian belief N(mean, covariance) over the coefficient vector theta.
//
// Starts at N(0, lambda^2 I) and is refined one observation at a time by the
// rank-1 Kalman step
//   s     = phi' S phi + sigma^2
//   mean <- mean + S phi (w - phi' mean) / s
//   S    <- S - S phi phi' S / s
// which is the exact posterior of Bayesian linear regression with prior
// N(0, lambda^2 I) and N(0, sigma^2) observation noise.
class GaussianBelief {
 public:
  // Throws ParameterError unless dim >= 1, lambda > 0 and sigma > 0.
  GaussianBelief(std::size_t dim, double lambda, double sigma);

  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }
  double lambda() const { return lambda_; }
  double sigma() const { return sigma_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  // In-place rank-1 update with one (phi, w) pair. Skipped when
  // phi' S phi + sigma^2 underflows below 1e-300.
  void observe(const Eigen::Ref<const Eigen::VectorXd>& phi, double weight);

  // Applies every observation of the feedback in order.
  void observe(const Feedback& feedback, const GroundSetModel& model);

  // sqrt(phi' S phi).
  double width(const Eigen::Ref<const Eigen::VectorXd>& phi) const;

  // Lower Cholesky factor of the covariance. On failure adds
  // 1e-10 * trace / d to the diagonal and retries, at most 10 times, then
  // throws NumericalError.
  Eigen::MatrixXd cholesky_factor() const;

  // Overrides the state; used to build converged or degenerate beliefs in
  // tests and experiments.
  void set_state(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  double lambda_;
  double sigma_;
  Eigen::VectorXd scratch_;
};

GaussianBelief init_belief(std::size_t dim, double lambda, double sigma);

// Returns the updated belief; the input is left untouched.
GaussianBelief kalman_update(const GaussianBelief& belief, const Feedback& feedback,
                             const GroundSetModel& model);

// One draw from N(mean, covariance).
Eigen::VectorXd sample_coefficients(const GaussianBelief& belief, Rng& rng);

double confidence_width(const GaussianBelief& belief,
                        const Eigen::Ref<const Eigen::VectorXd>& phi);

// All (phi, w) pairs observed so far, oldest first.
class ObservationHistory {
 public:
  void append(Eigen::VectorXd phi, double weight) {
    entries_.emplace_back(std::move(phi), weight);
  }
  void append(const Feedback& feedback, const GroundSetModel& model);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<std::pair<Eigen::VectorXd, double>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<Eigen::VectorXd, double>> entries_;
};

struct InformationForm {
  Eigen::MatrixXd precision;       // (1/lambda^2) I + (1/sigma^2) sum phi phi'
  Eigen::VectorXd weighted_mean;   // (1/sigma^2) sum phi w
};

// Batch posterior in information form. Testing oracle only; agents never
// invert d x d matrices.
InformationForm information_form(double lambda, double sigma, std::size_t dim,
                                 const ObservationHistory& history);

// True iff the matrix is symmetric to 1e-10 relative and Cholesky succeeds
// without jitter.
bool is_symmetric_positive_definite(const Eigen::MatrixXd& matrix);

}  // namespace comblin
