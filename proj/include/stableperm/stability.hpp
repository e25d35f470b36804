#pragma once

// Stability checks, rank statistics and cycle orientation for a permutation
// under a preference system. Every comparison involving a fixed point uses the
// rank-n "no partner" slot.

#include <optional>
#include <vector>

#include "stableperm/core.hpp"

namespace stableperm {

/// (i, j) with i not in {j, p(j)}, i preferring p(j) to p(i) and p(j)
/// preferring i to j.
struct BlockingPair {
  int i = 0;
  int j = 0;

  friend bool operator==(const BlockingPair&, const BlockingPair&) = default;
};

struct StabilityReport {
  bool stable = true;
  std::optional<BlockingPair> witness;  // lexicographically first violation
};

StabilityReport is_stable(const PreferenceSystem& prefs, const Permutation& p);

/// True iff (i, j) violates the stability condition of p.
bool blocks(const PreferenceSystem& prefs, const Permutation& p, int i, int j) noexcept;

struct TanReport {
  bool stable = true;
  bool no_mutual_improvement = true;      // condition (a)
  bool successors_not_worse = true;       // condition (b), weak preference
  bool fixed_point_in_condition_a = false;  // a violation of (a) involves a fixed point
};

/// Tan's notion: (a) no i != j where i prefers j to p^-1(i) and j prefers i to
/// p^-1(j); (b) nobody strictly prefers p^-1(i) to p(i).
TanReport tan_stability(const PreferenceSystem& prefs, const Permutation& p);

inline bool is_tan_stable(const PreferenceSystem& prefs, const Permutation& p) {
  return tan_stability(prefs, p).stable;
}

/// Stable, fixed-point-free, and every agent on a cycle of length >= 3 strictly
/// prefers its successor to its predecessor.
bool classify_pi0_like(const PreferenceSystem& prefs, const Permutation& p);

/// Total successor rank and total predecessor rank. A fixed point contributes
/// rank n to both and is flagged.
struct RankPair {
  long long r_s = 0;
  long long r_p = 0;
  bool has_fixed_point = false;

  friend bool operator==(const RankPair&, const RankPair&) = default;
};

RankPair ranks(const PreferenceSystem& prefs, const Permutation& p);

enum class Orientation { Forward, Backward, Mixed };

struct CycleOrientation {
  std::vector<int> cycle;     // as in cycle_decomposition
  Orientation orientation = Orientation::Forward;
  std::optional<int> witness;  // Mixed: first agent whose preference differs from the cycle head's
};

/// One verdict per cycle of length >= 3.
std::vector<CycleOrientation> cycle_orientation(const PreferenceSystem& prefs,
                                                const Permutation& p);

}  // namespace stableperm
