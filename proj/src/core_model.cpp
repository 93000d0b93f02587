#include "comblin/core_model.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "comblin/errors.hpp"

namespace comblin {

GroundSetModel::GroundSetModel(RowMatrix features) : features_(std::move(features)) {
  if (features_.rows() < 1 || features_.cols() < 1) {
    throw InputError("ground set needs at least one item and one feature");
  }
  max_row_norm_ = features_.rowwise().norm().maxCoeff();
}

Eigen::VectorXd GroundSetModel::scores(const Eigen::VectorXd& theta) const {
  if (theta.size() != features_.cols()) {
    throw InputError("coefficient vector has dimension " + std::to_string(theta.size()) +
                     ", expected " + std::to_string(features_.cols()));
  }
  return features_ * theta;
}

std::vector<Item> Action::sorted_items() const {
  std::vector<Item> out = items;
  std::sort(out.begin(), out.end());
  return out;
}

Feedback reveal(const Action& action, std::span<const double> weights) {
  Feedback feedback;
  feedback.observations.reserve(action.size());
  for (Item e : action.items) {
    if (e >= weights.size()) throw InputError("action item " + std::to_string(e) + " out of range");
    feedback.observations.push_back({e, weights[e]});
  }
  return feedback;
}

std::size_t PartitionSpec::k() const {
  return std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});
}

std::size_t family_num_items(const FamilySpec& family) {
  if (const auto* g = std::get_if<GridFamily>(&family)) return g->num_items();
  if (const auto* t = std::get_if<TopKFamily>(&family)) return t->num_items;
  if (const auto* p = std::get_if<PartitionFamily>(&family)) return p->spec.num_items();
  return std::get<ExplicitFamily>(family).num_items;
}

std::size_t family_max_size(const FamilySpec& family) {
  if (const auto* g = std::get_if<GridFamily>(&family)) return g->path_length();
  if (const auto* t = std::get_if<TopKFamily>(&family)) return t->k;
  if (const auto* p = std::get_if<PartitionFamily>(&family)) return p->spec.k();
  const auto& members = std::get<ExplicitFamily>(family).members;
  std::size_t k = 0;
  for (const auto& a : members) k = std::max(k, a.size());
  return k;
}

double total_weight(const Action& action, std::span<const double> weights) {
  double sum = 0.0;
  for (Item e : action.items) {
    if (e >= weights.size()) {
      throw InputError("action item " + std::to_string(e) + " out of range for " +
                       std::to_string(weights.size()) + " weights");
    }
    sum += weights[e];
  }
  return sum;
}

namespace {

bool distinct_and_in_range(const Action& action, std::size_t num_items) {
  std::vector<Item> sorted = action.sorted_items();
  if (!sorted.empty() && sorted.back() >= num_items) return false;
  return std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
}

bool is_grid_path(const Action& action, const GridFamily& grid) {
  const std::size_t m = grid.m;
  if (m == 0 || action.size() != grid.path_length()) return false;
  if (!distinct_and_in_range(action, grid.num_items())) return false;
  // Walk from the upper-left corner along whichever outgoing edge is in the
  // set; 2m distinct edges all consumed by the walk means a path.
  const std::vector<Item> sorted = action.sorted_items();
  auto contains = [&](Item e) { return std::binary_search(sorted.begin(), sorted.end(), e); };
  std::size_t row = 0;
  std::size_t col = 0;
  for (std::size_t step = 0; step < grid.path_length(); ++step) {
    if (col < m && contains(grid.right_edge(row, col))) {
      ++col;
    } else if (row < m && contains(grid.down_edge(row, col))) {
      ++row;
    } else {
      return false;
    }
  }
  return row == m && col == m;
}

bool meets_quotas(const Action& action, const PartitionSpec& spec) {
  std::vector<std::size_t> taken(spec.quotas.size(), 0);
  for (Item e : action.items) {
    const int g = spec.groups[e];
    if (g < 0 || static_cast<std::size_t>(g) >= spec.quotas.size()) return false;
    ++taken[static_cast<std::size_t>(g)];
  }
  return taken == spec.quotas;
}

}  // namespace

bool validate_action(const Action& action, const FamilySpec& family) {
  if (!distinct_and_in_range(action, family_num_items(family))) return false;
  if (const auto* g = std::get_if<GridFamily>(&family)) return is_grid_path(action, *g);
  if (const auto* t = std::get_if<TopKFamily>(&family)) return action.size() == t->k;
  if (const auto* p = std::get_if<PartitionFamily>(&family)) return meets_quotas(action, p->spec);
  const auto& members = std::get<ExplicitFamily>(family).members;
  const auto sorted = action.sorted_items();
  return std::any_of(members.begin(), members.end(),
                     [&](const Action& a) { return a.sorted_items() == sorted; });
}

}  // namespace comblin
