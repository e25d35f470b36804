#include "stableperm/stability.hpp"

namespace stableperm {

bool blocks(const PreferenceSystem& prefs, const Permutation& p, int i, int j) noexcept {
  const int target = p(j);
  if (i == j || i == target) return false;
  return prefs.prefers(i, target, p(i)) && prefs.prefers(target, i, j);
}

StabilityReport is_stable(const PreferenceSystem& prefs, const Permutation& p) {
  const int n = prefs.size();
  if (p.size() != n) throw ValidationError("permutation and preference system differ in size");
  for (int i = 0; i < n; ++i) {
    const int own = prefs.rank(i, p(i));
    if (own == 1) continue;  // nothing beats a first choice
    for (int j = 0; j < n; ++j) {
      const int target = p(j);
      if (j == i || target == i) continue;
      if (prefs.rank(i, target) < own && prefs.prefers(target, i, j)) {
        return {false, BlockingPair{i, j}};
      }
    }
  }
  return {};
}

TanReport tan_stability(const PreferenceSystem& prefs, const Permutation& p) {
  const int n = prefs.size();
  if (p.size() != n) throw ValidationError("permutation and preference system differ in size");
  TanReport report;
  for (int i = 0; i < n; ++i) {
    if (prefs.prefers(i, p.pred(i), p.succ(i))) report.successors_not_worse = false;
    for (int j = i + 1; j < n; ++j) {
      if (prefs.prefers(i, j, p.pred(i)) && prefs.prefers(j, i, p.pred(j))) {
        report.no_mutual_improvement = false;
        if (p.pred(i) == i || p.pred(j) == j) report.fixed_point_in_condition_a = true;
      }
    }
  }
  report.stable = report.no_mutual_improvement && report.successors_not_worse;
  return report;
}

bool classify_pi0_like(const PreferenceSystem& prefs, const Permutation& p) {
  if (p.has_fixed_point() || !is_stable(prefs, p).stable) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (p.succ(i) == p.pred(i)) continue;
    if (!prefs.prefers(i, p.succ(i), p.pred(i))) return false;
  }
  return true;
}

RankPair ranks(const PreferenceSystem& prefs, const Permutation& p) {
  if (p.size() != prefs.size()) throw ValidationError("permutation and preference system differ in size");
  RankPair out;
  for (int i = 0; i < p.size(); ++i) {
    out.r_s += prefs.rank(i, p.succ(i));
    out.r_p += prefs.rank(i, p.pred(i));
    if (p.succ(i) == i) out.has_fixed_point = true;
  }
  return out;
}

std::vector<CycleOrientation> cycle_orientation(const PreferenceSystem& prefs,
                                                const Permutation& p) {
  std::vector<CycleOrientation> out;
  for (auto& cycle : cycle_decomposition(p).cycles) {
    if (cycle.size() < 3) continue;
    auto forward = [&](int i) { return prefs.prefers(i, p.succ(i), p.pred(i)); };
    const bool head = forward(cycle.front());
    CycleOrientation verdict{std::move(cycle), head ? Orientation::Forward : Orientation::Backward,
                             std::nullopt};
    for (int i : verdict.cycle) {
      if (forward(i) != head) {
        verdict.orientation = Orientation::Mixed;
        verdict.witness = i;
        break;
      }
    }
    out.push_back(std::move(verdict));
  }
  return out;
}

}  // namespace stableperm
