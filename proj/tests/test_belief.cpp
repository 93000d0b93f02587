#include <doctest.h>

#include <random>

#include "comblin/belief.hpp"
#include "comblin/errors.hpp"

using namespace comblin;

namespace {

// Posterior mean and covariance from the batch information form.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> batch_posterior(const InformationForm& info) {
  Eigen::MatrixXd cov = info.precision.inverse();
  return {cov * info.weighted_mean, cov};
}

double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("init_belief") {
  const auto b = init_belief(2, 1.0, 1.0);
  CHECK(b.mean().isZero());
  CHECK(b.covariance().isApprox(Eigen::MatrixXd::Identity(2, 2)));
  CHECK(init_belief(1, 10.0, 1.0).covariance()(0, 0) == 100.0);
  CHECK_THROWS_AS(init_belief(3, 0.0, 1.0), ParameterError);
  CHECK_THROWS_AS(init_belief(3, 1.0, -1.0), ParameterError);
  CHECK_THROWS_AS(init_belief(0, 1.0, 1.0), ParameterError);
}

TEST_CASE("scalar Kalman step") {
  RowMatrix phi(1, 1);
  phi << 1.0;
  GroundSetModel model(phi);
  const auto prior = init_belief(1, 1.0, 1.0);
  const auto post = kalman_update(prior, Feedback{{{0, 2.0}}}, model);
  CHECK(post.mean()(0) == doctest::Approx(1.0));
  CHECK(post.covariance()(0, 0) == doctest::Approx(0.5));
  // input untouched
  CHECK(prior.mean()(0) == 0.0);
  CHECK(prior.covariance()(0, 0) == 1.0);

  const auto same = kalman_update(prior, Feedback{}, model);
  CHECK(same.mean() == prior.mean());
  CHECK(same.covariance() == prior.covariance());
}

TEST_CASE("information form") {
  ObservationHistory empty;
  const auto prior = information_form(2.0, 1.0, 3, empty);
  CHECK(prior.precision.isApprox(0.25 * Eigen::MatrixXd::Identity(3, 3)));
  CHECK(prior.weighted_mean.isZero());

  ObservationHistory h;
  h.append(Eigen::VectorXd::Ones(1), 2.0);
  const auto info = information_form(1.0, 1.0, 1, h);
  CHECK(info.precision(0, 0) == doctest::Approx(2.0));
  CHECK(info.weighted_mean(0) == doctest::Approx(2.0));
  CHECK(info.weighted_mean(0) / info.precision(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("Kalman recursion matches the batch posterior on random histories") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> dim_dist(1, 6);
  std::uniform_int_distribution<int> len_dist(0, 40);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = static_cast<std::size_t>(dim_dist(rng));
    const double lambda = std::exp(normal(rng));
    const double sigma = std::exp(normal(rng));
    GaussianBelief belief(d, lambda, sigma);
    ObservationHistory history;
    const int len = len_dist(rng);
    for (int i = 0; i < len; ++i) {
      Eigen::VectorXd phi(d);
      for (auto& x : phi) x = normal(rng);
      const double w = 3.0 * normal(rng);
      belief.observe(phi, w);
      history.append(phi, w);
    }
    const auto [mean, cov] = batch_posterior(information_form(lambda, sigma, d, history));
    CHECK(max_rel_diff(belief.mean(), mean) < 1e-8);
    CHECK(max_rel_diff(belief.covariance(), cov) < 1e-8);
  }
}

TEST_CASE("update order does not change the posterior") {
  RowMatrix phi(2, 2);
  phi << 1.0, 0.5, -0.3, 2.0;
  GroundSetModel model(phi);
  const auto prior = init_belief(2, 3.0, 0.7);
  const auto ab = kalman_update(prior, Feedback{{{0, 1.2}, {1, -0.4}}}, model);
  const auto ba = kalman_update(prior, Feedback{{{1, -0.4}, {0, 1.2}}}, model);
  CHECK((ab.mean() - ba.mean()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ab.covariance() - ba.covariance()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("covariance stays symmetric positive definite and shrinks") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  const std::size_t d = 5;
  GaussianBelief belief(d, 10.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    Eigen::VectorXd phi(d);
    for (auto& x : phi) x = normal(rng);
    Eigen::VectorXd probe(d);
    for (auto& x : probe) x = normal(rng);
    const double before = belief.width(probe);
    belief.observe(phi, normal(rng));
    CHECK(is_symmetric_positive_definite(belief.covariance()));
    CHECK(belief.width(probe) <= before * (1.0 + 1e-12));
  }
}

TEST_CASE("confidence_width") {
  const auto b = init_belief(3, 10.0, 1.0);
  Eigen::VectorXd phi(3);
  phi << 0.6, 0.0, 0.8;
  CHECK(confidence_width(b, phi) == doctest::Approx(10.0));
  CHECK(confidence_width(b, Eigen::VectorXd::Zero(3)) == 0.0);
}

TEST_CASE("sample_coefficients") {
  auto b = init_belief(3, 1.0, 1.0);
  Rng r1(5), r2(5);
  CHECK(sample_coefficients(b, r1) == sample_coefficients(b, r2));

  Eigen::VectorXd mean(3);
  mean << 1.0, -2.0, 0.5;
  b.set_state(mean, 1e-16 * Eigen::MatrixXd::Identity(3, 3));
  Rng r3(9);
  CHECK((sample_coefficients(b, r3) - mean).cwiseAbs().maxCoeff() < 1e-6);

  // A singular covariance is rescued by jitter.
  b.set_state(mean, Eigen::MatrixXd::Zero(3, 3));
  CHECK((sample_coefficients(b, r3) - mean).cwiseAbs().maxCoeff() < 1e-6);

  // An indefinite one is not.
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(2, 2) = -1.0;
  b.set_state(mean, bad);
  CHECK_THROWS_AS(sample_coefficients(b, r3), NumericalError);
}

TEST_CASE("sample moments follow the belief") {
  auto b = init_belief(2, 1.0, 1.0);
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 1.0, 1.0, 2.0;
  Eigen::VectorXd mean(2);
  mean << 1.0, -1.0;
  b.set_state(mean, cov);
  Rng rng(3);
  const int draws = 20000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd x = sample_coefficients(b, rng) - mean;
    sum += x;
    outer += x * x.transpose();
  }
  CHECK((sum / draws).cwiseAbs().maxCoeff() < 0.05);
  CHECK(((outer / draws) - cov).cwiseAbs().maxCoeff() < 0.15);
}
