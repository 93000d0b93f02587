#include "comblin/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "comblin/errors.hpp"

namespace comblin {

Action grid_longest_path(const GridFamily& grid, std::span<const double> weights) {
  const std::size_t m = grid.m;
  if (m == 0) throw InputError("grid needs m >= 1");
  if (weights.size() != grid.num_items()) {
    throw InputError("grid with m=" + std::to_string(m) + " needs " +
                     std::to_string(grid.num_items()) + " weights, got " +
                     std::to_string(weights.size()));
  }
  const std::size_t side = m + 1;
  // value[r * side + c]: best total weight from node (r, c) to the sink.
  std::vector<double> value(side * side, 0.0);
  std::vector<char> go_right(side * side, 0);
  for (std::size_t r = side; r-- > 0;) {
    for (std::size_t c = side; c-- > 0;) {
      const std::size_t node = r * side + c;
      const bool can_right = c < m;
      const bool can_down = r < m;
      if (!can_right && !can_down) continue;
      const double via_right =
          can_right ? weights[grid.right_edge(r, c)] + value[node + 1] : 0.0;
      const double via_down = can_down ? weights[grid.down_edge(r, c)] + value[node + side] : 0.0;
      if (can_right && (!can_down || via_right >= via_down)) {
        value[node] = via_right;
        go_right[node] = 1;
      } else {
        value[node] = via_down;
      }
    }
  }

  Action path;
  path.items.reserve(grid.path_length());
  std::size_t r = 0;
  std::size_t c = 0;
  while (r < m || c < m) {
    if (go_right[r * side + c]) {
      path.items.push_back(grid.right_edge(r, c));
      ++c;
    } else {
      path.items.push_back(grid.down_edge(r, c));
      ++r;
    }
  }
  return path;
}

namespace {

// Heavier first, then lower index: a strict total order on items.
struct ByWeightThenIndex {
  std::span<const double> w;
  bool operator()(Item a, Item b) const {
    if (w[a] != w[b]) return w[a] > w[b];
    return a < b;
  }
};

void select_largest(std::vector<Item>& candidates, std::size_t k, std::span<const double> weights,
                    std::vector<Item>& out) {
  const auto mid = candidates.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(candidates.begin(), mid, candidates.end(), ByWeightThenIndex{weights});
  out.insert(out.end(), candidates.begin(), mid);
}

}  // namespace

Action top_k(std::span<const double> weights, std::size_t k) {
  if (k < 1 || k > weights.size()) {
    throw InputError("top-k needs 1 <= k <= " + std::to_string(weights.size()) + ", got k=" +
                     std::to_string(k));
  }
  std::vector<Item> idx(weights.size());
  std::iota(idx.begin(), idx.end(), Item{0});
  Action out;
  out.items.reserve(k);
  select_largest(idx, k, weights, out.items);
  return out;
}

Action partition_top_k(std::span<const double> weights, const PartitionSpec& spec) {
  if (spec.groups.size() != weights.size()) {
    throw InputError("partition has " + std::to_string(spec.groups.size()) + " items but " +
                     std::to_string(weights.size()) + " weights");
  }
  std::vector<std::vector<Item>> members(spec.quotas.size());
  for (Item e = 0; e < spec.groups.size(); ++e) {
    const int g = spec.groups[e];
    if (g < 0) continue;
    if (static_cast<std::size_t>(g) >= spec.quotas.size()) {
      throw InputError("item " + std::to_string(e) + " has group " + std::to_string(g) +
                       " without a quota");
    }
    members[static_cast<std::size_t>(g)].push_back(e);
  }
  Action out;
  out.items.reserve(spec.k());
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (spec.quotas[g] > members[g].size()) {
      throw InputError("group " + std::to_string(g) + " has " + std::to_string(members[g].size()) +
                       " items, quota " + std::to_string(spec.quotas[g]) + " is infeasible");
    }
    if (spec.quotas[g] > 0) select_largest(members[g], spec.quotas[g], weights, out.items);
  }
  return out;
}

Action brute_force_oracle(const ExplicitFamily& family, std::span<const double> weights) {
  if (family.members.empty()) throw InputError("cannot maximize over an empty family");
  const Action* best = nullptr;
  double best_value = 0.0;
  std::vector<Item> best_sorted;
  for (const Action& a : family.members) {
    const double v = total_weight(a, weights);
    if (best == nullptr || v > best_value) {
      best = &a;
      best_value = v;
      best_sorted = a.sorted_items();
    } else if (v == best_value) {
      auto sorted = a.sorted_items();
      if (sorted < best_sorted) {
        best = &a;
        best_sorted = std::move(sorted);
      }
    }
  }
  return *best;
}

namespace {

void grid_paths(const GridFamily& grid, std::size_t r, std::size_t c, Action& prefix,
                std::vector<Action>& out) {
  if (r == grid.m && c == grid.m) {
    out.push_back(prefix);
    return;
  }
  if (c < grid.m) {
    prefix.items.push_back(grid.right_edge(r, c));
    grid_paths(grid, r, c + 1, prefix, out);
    prefix.items.pop_back();
  }
  if (r < grid.m) {
    prefix.items.push_back(grid.down_edge(r, c));
    grid_paths(grid, r + 1, c, prefix, out);
    prefix.items.pop_back();
  }
}

double binomial(std::size_t n, std::size_t k) {
  double v = 1.0;
  for (std::size_t i = 1; i <= k; ++i) v = v * static_cast<double>(n - k + i) / static_cast<double>(i);
  return v;
}

// Lexicographic k-subsets of pool.
std::vector<std::vector<Item>> combinations(const std::vector<Item>& pool, std::size_t k) {
  std::vector<std::vector<Item>> out;
  std::vector<std::size_t> pos(k);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  const std::size_t n = pool.size();
  if (k > n) return out;
  while (true) {
    std::vector<Item> subset(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = pool[pos[i]];
    out.push_back(std::move(subset));
    std::size_t i = k;
    while (i > 0 && pos[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pos[i - 1];
    for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
  return out;
}

void check_count(double count, std::size_t max_members) {
  if (count > static_cast<double>(max_members)) {
    throw InputError("family has about " + std::to_string(count) + " members, over the cap of " +
                     std::to_string(max_members));
  }
}

}  // namespace

ExplicitFamily enumerate_family(const FamilySpec& family, std::size_t max_members) {
  ExplicitFamily out;
  out.num_items = family_num_items(family);
  if (const auto* grid = std::get_if<GridFamily>(&family)) {
    check_count(binomial(2 * grid->m, grid->m), max_members);
    Action prefix;
    grid_paths(*grid, 0, 0, prefix, out.members);
  } else if (const auto* t = std::get_if<TopKFamily>(&family)) {
    check_count(binomial(t->num_items, t->k), max_members);
    std::vector<Item> pool(t->num_items);
    std::iota(pool.begin(), pool.end(), Item{0});
    for (auto& s : combinations(pool, t->k)) out.members.push_back(Action{std::move(s)});
  } else if (const auto* p = std::get_if<PartitionFamily>(&family)) {
    const auto& spec = p->spec;
    std::vector<std::vector<Item>> pools(spec.quotas.size());
    for (Item e = 0; e < spec.groups.size(); ++e) {
      if (spec.groups[e] >= 0) pools[static_cast<std::size_t>(spec.groups[e])].push_back(e);
    }
    double count = 1.0;
    for (std::size_t g = 0; g < pools.size(); ++g) count *= binomial(pools[g].size(), spec.quotas[g]);
    check_count(count, max_members);
    std::vector<Action> partial{Action{}};
    for (std::size_t g = 0; g < pools.size(); ++g) {
      const auto choices = combinations(pools[g], spec.quotas[g]);
      std::vector<Action> next;
      for (const auto& base : partial) {
        for (const auto& choice : choices) {
          Action a = base;
          a.items.insert(a.items.end(), choice.begin(), choice.end());
          next.push_back(std::move(a));
        }
      }
      partial = std::move(next);
    }
    out.members = std::move(partial);
  } else {
    out = std::get<ExplicitFamily>(family);
  }
  return out;
}

std::unique_ptr<Oracle> make_exact_oracle(const FamilySpec& family) {
  if (const auto* g = std::get_if<GridFamily>(&family)) return std::make_unique<GridOracle>(*g);
  if (const auto* t = std::get_if<TopKFamily>(&family)) return std::make_unique<TopKOracle>(*t);
  if (const auto* p = std::get_if<PartitionFamily>(&family)) {
    return std::make_unique<PartitionOracle>(*p);
  }
  return std::make_unique<BruteForceOracle>(std::get<ExplicitFamily>(family));
}

GammaApproximateOracle::GammaApproximateOracle(std::unique_ptr<Oracle> inner, double gamma,
                                               std::uint64_t seed, double perturb_probability)
    : inner_(std::move(inner)),
      gamma_(gamma),
      perturb_probability_(perturb_probability),
      rng_(seed) {
  if (!inner_) throw ParameterError("gamma-approximate oracle needs an inner oracle");
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw ParameterError("gamma must lie in [0, 1), got " + std::to_string(gamma));
  }
  if (!(perturb_probability >= 0.0 && perturb_probability <= 1.0)) {
    throw ParameterError("perturbation probability must lie in [0, 1]");
  }
}

Action GammaApproximateOracle::solve(std::span<const double> weights) {
  Action exact = inner_->solve(weights);
  if (gamma_ == 0.0) return exact;
  std::bernoulli_distribution perturb(perturb_probability_);
  if (!perturb(rng_)) return exact;

  double scale = 0.0;
  for (double w : weights) scale = std::max(scale, std::abs(w));
  std::normal_distribution<double> noise(0.0, gamma_ * scale + 1e-300);
  perturbed_.assign(weights.begin(), weights.end());
  for (double& w : perturbed_) w += noise(rng_);

  Action candidate = inner_->solve(std::span<const double>(perturbed_));
  const double optimum = total_weight(exact, weights);
  if (total_weight(candidate, weights) >= (1.0 - gamma_) * optimum) {
    if (!candidate.same_set(exact)) ++approximate_emissions_;
    return candidate;
  }
  return exact;
}

}  // namespace comblin
