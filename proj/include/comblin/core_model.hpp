#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace comblin {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Item = std::size_t;

// Ground set E of L items together with the generalization matrix Phi
// (L rows, d columns; row e is the feature vector of item e).
class GroundSetModel {
 public:
  explicit GroundSetModel(RowMatrix features);

  std::size_t num_items() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }
  const RowMatrix& features() const { return features_; }
  auto phi(Item e) const { return features_.row(static_cast<Eigen::Index>(e)); }

  // max_e ||phi_e||_2; the width bound only applies when this is <= 1.
  double max_row_norm() const { return max_row_norm_; }
  bool norm_bounded() const { return max_row_norm_ <= 1.0 + 1e-12; }

  // Phi * theta, one score per item.
  Eigen::VectorXd scores(const Eigen::VectorXd& theta) const;

 private:
  RowMatrix features_;
  double max_row_norm_ = 0.0;
};

// A feasible subset of E in the order the oracle emitted it.
struct Action {
  std::vector<Item> items;

  std::size_t size() const { return items.size(); }
  bool empty() const { return items.empty(); }
  // Items sorted ascending; used to compare actions as sets.
  std::vector<Item> sorted_items() const;
  bool same_set(const Action& other) const { return sorted_items() == other.sorted_items(); }

  friend bool operator==(const Action&, const Action&) = default;
};

struct Observation {
  Item item;
  double weight;
};

// Semi-bandit feedback: the realized weight of every chosen item, in action order.
struct Feedback {
  std::vector<Observation> observations;

  std::size_t size() const { return observations.size(); }
};

// Reveals w_t(e) for e in the action only.
Feedback reveal(const Action& action, std::span<const double> weights);

// Every (m+1)x(m+1) lattice path from the upper-left to the bottom-right
// corner. L = 2m(m+1) directed edges: rightward edges first (row-major over
// their tail nodes), then downward edges (row-major over their tail nodes).
struct GridFamily {
  std::size_t m = 1;

  std::size_t num_items() const { return 2 * m * (m + 1); }
  std::size_t path_length() const { return 2 * m; }
  std::size_t right_edge(std::size_t row, std::size_t col) const { return row * m + col; }
  std::size_t down_edge(std::size_t row, std::size_t col) const {
    return m * (m + 1) + row * (m + 1) + col;
  }
};

// All subsets of exactly k items.
struct TopKFamily {
  std::size_t num_items = 1;
  std::size_t k = 1;
};

// Item e belongs to group groups[e] in [0, quotas.size()); a feasible set
// takes exactly quotas[g] items from group g.
struct PartitionSpec {
  std::vector<int> groups;
  std::vector<std::size_t> quotas;

  std::size_t num_items() const { return groups.size(); }
  std::size_t k() const;
};

struct PartitionFamily {
  PartitionSpec spec;
};

// A family listed member by member (small instances only).
struct ExplicitFamily {
  std::size_t num_items = 0;
  std::vector<Action> members;
};

using FamilySpec = std::variant<GridFamily, TopKFamily, PartitionFamily, ExplicitFamily>;

std::size_t family_num_items(const FamilySpec& family);
// K: the largest action size in the family.
std::size_t family_max_size(const FamilySpec& family);

// f(A, w) = sum of w(e) over e in A. Throws InputError on an out-of-range item.
double total_weight(const Action& action, std::span<const double> weights);
inline double total_weight(const Action& action, const Eigen::VectorXd& weights) {
  return total_weight(action, std::span<const double>(weights.data(), static_cast<std::size_t>(weights.size())));
}

// True iff the action is a member of the family. Never throws.
bool validate_action(const Action& action, const FamilySpec& family);

}  // namespace comblin
