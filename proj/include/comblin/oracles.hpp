#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "comblin/core_model.hpp"
#include "comblin/rng.hpp"

namespace comblin {

// Solves argmax_{A in family} f(A, w) for arbitrary real weights.
class Oracle {
 public:
  virtual ~Oracle() = default;

  virtual Action solve(std::span<const double> weights) = 0;
  virtual const FamilySpec& family() const = 0;

  Action solve(const Eigen::VectorXd& weights) {
    return solve(std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
  }
};

// Longest corner-to-corner path by dynamic programming over the grid DAG.
// Ties prefer the rightward edge. The path is emitted from the upper-left corner.
Action grid_longest_path(const GridFamily& grid, std::span<const double> weights);

// The k largest weights; ties go to the lower index. Emitted by decreasing weight.
Action top_k(std::span<const double> weights, std::size_t k);

// The quota-many largest items of every group, groups in id order.
Action partition_top_k(std::span<const double> weights, const PartitionSpec& spec);

// Exhaustive scan; among equal totals the lexicographically smallest sorted
// item list wins.
Action brute_force_oracle(const ExplicitFamily& family, std::span<const double> weights);

// Explicit enumeration of small families (grid paths, k-subsets, quota sets).
// Throws InputError when the family would exceed max_members sets.
ExplicitFamily enumerate_family(const FamilySpec& family, std::size_t max_members = 100000);

class GridOracle final : public Oracle {
 public:
  explicit GridOracle(GridFamily grid) : grid_(grid), family_(grid) {}
  Action solve(std::span<const double> weights) override { return grid_longest_path(grid_, weights); }
  const FamilySpec& family() const override { return family_; }
  using Oracle::solve;

 private:
  GridFamily grid_;
  FamilySpec family_;
};

class TopKOracle final : public Oracle {
 public:
  explicit TopKOracle(TopKFamily f) : k_(f.k), family_(f) {}
  Action solve(std::span<const double> weights) override { return top_k(weights, k_); }
  const FamilySpec& family() const override { return family_; }
  using Oracle::solve;

 private:
  std::size_t k_;
  FamilySpec family_;
};

class PartitionOracle final : public Oracle {
 public:
  explicit PartitionOracle(PartitionFamily f) : family_(std::move(f)) {}
  Action solve(std::span<const double> weights) override {
    return partition_top_k(weights, std::get<PartitionFamily>(family_).spec);
  }
  const FamilySpec& family() const override { return family_; }
  using Oracle::solve;

 private:
  FamilySpec family_;
};

class BruteForceOracle final : public Oracle {
 public:
  explicit BruteForceOracle(ExplicitFamily f) : family_(std::move(f)) {}
  Action solve(std::span<const double> weights) override {
    return brute_force_oracle(std::get<ExplicitFamily>(family_), weights);
  }
  const FamilySpec& family() const override { return family_; }
  using Oracle::solve;

 private:
  FamilySpec family_;
};

// Exact oracle for the family.
std::unique_ptr<Oracle> make_exact_oracle(const FamilySpec& family);

// Oracle with sub-optimality gap gamma: every emitted action satisfies
// f(A, w) >= (1 - gamma) * max_A f(A, w) whenever the maximum is nonnegative.
//
// With probability perturb_probability the inner oracle is re-run on
// noise-perturbed weights; the result is emitted only if its true value
// meets the guarantee, otherwise the exact solution is returned.
class GammaApproximateOracle final : public Oracle {
 public:
  GammaApproximateOracle(std::unique_ptr<Oracle> inner, double gamma, std::uint64_t seed,
                         double perturb_probability = 0.5);

  Action solve(std::span<const double> weights) override;
  const FamilySpec& family() const override { return inner_->family(); }
  using Oracle::solve;

  double gamma() const { return gamma_; }
  // Calls that emitted a perturbed action different from the exact one.
  std::size_t approximate_emissions() const { return approximate_emissions_; }

 private:
  std::unique_ptr<Oracle> inner_;
  double gamma_;
  double perturb_probability_;
  Rng rng_;
  std::vector<double> perturbed_;
  std::size_t approximate_emissions_ = 0;
};

}  // namespace comblin
