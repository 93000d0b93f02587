#include "comblin/belief.hpp"

#include <cmath>
#include <random>
#include <string>

#include "comblin/errors.hpp"

namespace comblin {

namespace {

constexpr double kDivisionGuard = 1e-300;
constexpr int kMaxJitterRetries = 10;
constexpr double kJitterScale = 1e-10;

// The rank-1 update writes the lower triangle only; mirror it so the stored
// matrix is exactly symmetric.
void mirror_lower(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j + 1; i < n; ++i) m(j, i) = m(i, j);
  }
}

}  // namespace

GaussianBelief::GaussianBelief(std::size_t dim, double lambda, double sigma)
    : lambda_(lambda), sigma_(sigma) {
  if (dim < 1) throw ParameterError("belief dimension must be at least 1");
  if (!(lambda > 0.0)) throw ParameterError("lambda must be positive, got " + std::to_string(lambda));
  if (!(sigma > 0.0)) throw ParameterError("sigma must be positive, got " + std::to_string(sigma));
  const auto d = static_cast<Eigen::Index>(dim);
  mean_ = Eigen::VectorXd::Zero(d);
  covariance_ = lambda * lambda * Eigen::MatrixXd::Identity(d, d);
  scratch_.resize(d);
}

void GaussianBelief::observe(const Eigen::Ref<const Eigen::VectorXd>& phi, double weight) {
  if (phi.size() != mean_.size()) {
    throw InputError("feature vector has dimension " + std::to_string(phi.size()) +
                     ", belief has " + std::to_string(mean_.size()));
  }
  scratch_.noalias() = covariance_.selfadjointView<Eigen::Lower>() * phi;
  const double s = phi.dot(scratch_) + sigma_ * sigma_;
  if (!(s >= kDivisionGuard)) return;
  mean_ += scratch_ * ((weight - phi.dot(mean_)) / s);
  covariance_.selfadjointView<Eigen::Lower>().rankUpdate(scratch_, -1.0 / s);
  mirror_lower(covariance_);
}

void GaussianBelief::observe(const Feedback& feedback, const GroundSetModel& model) {
  for (const auto& [item, weight] : feedback.observations) {
    if (item >= model.num_items()) {
      throw InputError("feedback item " + std::to_string(item) + " out of range");
    }
    observe(model.phi(item).transpose(), weight);
  }
}

double GaussianBelief::width(const Eigen::Ref<const Eigen::VectorXd>& phi) const {
  const double q = phi.dot(covariance_.selfadjointView<Eigen::Lower>() * phi);
  return q > 0.0 ? std::sqrt(q) : 0.0;
}

Eigen::MatrixXd GaussianBelief::cholesky_factor() const {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const double d = static_cast<double>(covariance_.rows());
  double eps = kJitterScale * std::abs(covariance_.trace()) / d;
  if (!(eps > 0.0)) eps = 1e-290;  // all-zero covariance
  Eigen::MatrixXd jittered = covariance_;
  for (int attempt = 0; attempt < kMaxJitterRetries; ++attempt) {
    jittered.diagonal().array() += eps;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw NumericalError("covariance is not positive definite after jitter");
}

void GaussianBelief::set_state(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  if (mean.size() != mean_.size() || covariance.rows() != mean_.size() ||
      covariance.cols() != mean_.size()) {
    throw InputError("belief state has the wrong shape");
  }
  mean_ = std::move(mean);
  covariance_ = std::move(covariance);
}

GaussianBelief init_belief(std::size_t dim, double lambda, double sigma) {
  return GaussianBelief(dim, lambda, sigma);
}

GaussianBelief kalman_update(const GaussianBelief& belief, const Feedback& feedback,
                             const GroundSetModel& model) {
  GaussianBelief next = belief;
  next.observe(feedback, model);
  return next;
}

Eigen::VectorXd sample_coefficients(const GaussianBelief& belief, Rng& rng) {
  const Eigen::MatrixXd factor = belief.cholesky_factor();
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(static_cast<Eigen::Index>(belief.dim()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return belief.mean() + factor.triangularView<Eigen::Lower>() * z;
}

double confidence_width(const GaussianBelief& belief,
                        const Eigen::Ref<const Eigen::VectorXd>& phi) {
  return belief.width(phi);
}

void ObservationHistory::append(const Feedback& feedback, const GroundSetModel& model) {
  for (const auto& [item, weight] : feedback.observations) {
    append(model.phi(item).transpose(), weight);
  }
}

InformationForm information_form(double lambda, double sigma, std::size_t dim,
                                 const ObservationHistory& history) {
  if (!(lambda > 0.0) || !(sigma > 0.0)) throw ParameterError("lambda and sigma must be positive");
  const auto d = static_cast<Eigen::Index>(dim);
  InformationForm form{Eigen::MatrixXd::Identity(d, d) / (lambda * lambda),
                       Eigen::VectorXd::Zero(d)};
  const double inv_var = 1.0 / (sigma * sigma);
  for (const auto& [phi, w] : history.entries()) {
    form.precision.noalias() += inv_var * phi * phi.transpose();
    form.weighted_mean += inv_var * w * phi;
  }
  return form;
}

bool is_symmetric_positive_definite(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) return false;
  const double scale = matrix.cwiseAbs().maxCoeff();
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(matrix);
  return llt.info() == Eigen::Success;
}

}  // namespace comblin
