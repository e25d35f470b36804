#include "stableperm/analytics.hpp"

namespace stableperm {
namespace {

void require_fixed_point_free(const Permutation& p) {
  if (p.has_fixed_point()) {
    throw ValidationError("the integral representation needs a fixed-point-free permutation, got " +
                          format_cycles(p));
  }
}

// cycle_len[a] = length of the cycle through a.
std::vector<int> cycle_lengths(const CycleDecomposition& cycles, int n) {
  std::vector<int> len(n);
  for (const auto& c : cycles.cycles) {
    for (int a : c) len[a] = static_cast<int>(c.size());
  }
  return len;
}

}  // namespace

PairSets pair_sets(const Permutation& p) {
  require_fixed_point_free(p);
  const int n = p.size();
  const auto len = cycle_lengths(cycle_decomposition(p), n);
  PairSets out;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || i == p(j)) continue;
      if (len[i] >= 3 || len[j] >= 3) {
        out.e2.push_back({i, j});
      } else if (i < p(j)) {
        out.e1_star.push_back({i, j});
      }
    }
  }
  return out;
}

IntegrandPlan make_integrand_plan(const Permutation& p) {
  require_fixed_point_free(p);
  const int n = p.size();
  const auto cycles = cycle_decomposition(p);
  const auto len = cycle_lengths(cycles, n);

  IntegrandPlan plan;
  plan.n = n;
  plan.successor = p.successors();
  plan.predecessor.resize(n);
  for (int i = 0; i < n; ++i) plan.predecessor[i] = p.pred(i);

  plan.y_index.assign(n, -1);
  for (int a : cycles.long_cycle_agents) plan.y_index[a] = plan.y_count++;
  for (const auto& c : cycles.cycles) {
    if (c.size() >= 3) plan.long_cycles.push_back(c);
  }

  const auto sets = pair_sets(p);
  plan.published = sets.e1_star;
  plan.published.insert(plan.published.end(), sets.e2.begin(), sets.e2.end());

  std::vector<char> paired(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || i == p(j) || paired[static_cast<std::size_t>(i) * n + j]) continue;
      if (len[i] >= 3 && j == p.pred(p.pred(i))) {
        plan.determined.push_back(i);
        continue;
      }
      const OrderedPair partner{p(j), p.pred(i)};
      paired[static_cast<std::size_t>(i) * n + j] = 1;
      paired[static_cast<std::size_t>(partner.i) * n + partner.j] = 1;
      plan.couples.push_back({{i, j}, partner});
    }
  }
  return plan;
}

}  // namespace stableperm
