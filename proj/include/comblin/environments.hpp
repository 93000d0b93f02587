#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "comblin/core_model.hpp"
#include "comblin/rng.hpp"

namespace comblin {

enum class NoiseKind { kGaussian, kBernoulli };

struct NoiseModel {
  NoiseKind kind = NoiseKind::kGaussian;
  double sigma = 0.0;  // Gaussian only
};

// The simulator's hidden state (Phi, w_bar, P). Agents are handed `model`
// and never the truth itself.
struct EnvironmentTruth {
  GroundSetModel model;
  Eigen::VectorXd mean_weights;
  NoiseModel noise;
  FamilySpec family;
  std::optional<Eigen::VectorXd> theta_star;  // coherent environments only
  double lambda_true = 0.0;
  double sigma_true = 0.0;

  std::size_t num_items() const { return model.num_items(); }
  std::size_t dim() const { return model.dim(); }
};

enum class FeatureScheme {
  kGaussian,    // Phi_ij ~ N(0, 1) i.i.d.
  kNormalized,  // Gaussian rows rescaled to unit norm
  kIdentity,    // Phi = I (requires d = L)
};

// Longest-path environment on an (m+1)x(m+1) grid: Phi from the feature
// scheme, theta* ~ N(0, lambda_true^2 I), w_bar = Phi theta*, and
// N(0, sigma_true^2) observation noise. Throws ParameterError for m < 1,
// d < 1, lambda_true <= 0 or sigma_true < 0.
EnvironmentTruth generate_coherent_gaussian(std::size_t m, std::size_t d, double lambda_true,
                                            double sigma_true, Rng& rng,
                                            FeatureScheme scheme = FeatureScheme::kGaussian);

// Synthetic stand-in for a census-style targeting problem. Every item gets
//   - a one-hot age bin (d - 3 bins),
//   - a gender indicator (also its partition group; exactly half per group),
//   - an indicator for working more than 40 hours (probability 0.4),
//   - education years / 16, years uniform on {8, ..., 16}.
// The mean is two-level in the designated education feature:
//   w_bar(e) = high_mean if years >= education_threshold else low_mean,
// which no linear function of the features reproduces exactly.
struct BernoulliSpec {
  std::size_t num_items = 2000;
  std::size_t dim = 10;
  std::size_t k = 100;
  bool partition = true;  // quotas k/2 per gender; otherwise plain top-k
  double high_mean = 0.15;
  double low_mean = 0.05;
  int education_threshold = 14;
};

// Throws InputError when a mean lies outside [0, 1], ParameterError for an
// infeasible shape (d < 4, k > L, odd k or L with partition).
EnvironmentTruth generate_bernoulli_tabular(const BernoulliSpec& spec, Rng& rng);

struct TabularOptions {
  NoiseKind noise = NoiseKind::kBernoulli;
  double sigma = 0.0;                 // Gaussian noise only
  std::size_t k = 1;                  // top-k family when quotas are empty
  std::vector<std::size_t> quotas;    // per-group quotas; uses the group column
};

// Reads `item,group,mean,f1,...,fd`, one row per item 0..L-1 (any row
// order). Throws InputError naming the line on malformed input or a mean
// outside [0, 1] under Bernoulli noise.
EnvironmentTruth load_tabular_environment(const std::filesystem::path& path,
                                          const TabularOptions& options);

// Writes the same schema; groups are taken from a partition family, else -1.
void write_tabular_environment(const EnvironmentTruth& truth, const std::filesystem::path& path);

// One i.i.d. draw w_t ~ P for every item.
Eigen::VectorXd sample_weights(const EnvironmentTruth& truth, Rng& rng);

}  // namespace comblin
