#pragma once

// Brute-force ground truth: all stable permutations of an instance, and exact
// probabilities over every preference profile of a tiny n.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "stableperm/core.hpp"

namespace stableperm {

inline constexpr int kMaxEnumerationSize = 9;  // 9! permutations
inline constexpr int kMaxProfileSize = 4;      // ((n-1)!)^n = 1296 profiles at n = 4

using BigInt = boost::multiprecision::cpp_int;

struct StableSet {
  std::vector<Permutation> all_stable;  // lexicographic in the successor array
  std::vector<Permutation> pi0_like;
  std::vector<std::pair<int, int>> fixed_pairs;  // (a < b), matched in every stable permutation
};

/// Scans all n! permutations. Throws CapExceeded above kMaxEnumerationSize.
StableSet enumerate_stable(const PreferenceSystem& prefs);

struct ClauseCheck {
  bool passed = true;
  std::optional<int> witness;  // offending agent
};

/// Structural claims about Pi0 checked against the full stable set:
///  successor_optimal    pi0(i) is i's best successor over all stable permutations
///  predecessor_pessimal pi0^-1(i) is i's worst predecessor over all stable permutations
///  matches_fixed        every 2-cycle of pi0 is a 2-cycle of every stable permutation
///  fixed_points_shared  all stable permutations have the same fixed points, at most one
struct StructureReport {
  ClauseCheck successor_optimal;
  ClauseCheck predecessor_pessimal;
  ClauseCheck matches_fixed;
  ClauseCheck fixed_points_shared;
  std::size_t stable_count = 0;

  bool passed() const noexcept {
    return successor_optimal.passed && predecessor_pessimal.passed && matches_fixed.passed &&
           fixed_points_shared.passed;
  }
};

StructureReport verify_structure(const PreferenceSystem& prefs);
StructureReport verify_structure(const PreferenceSystem& prefs, const StableSet& stable,
                                 const Permutation& pi0);

/// Exact rational. The denominator is kept as produced (((n-1)!)^n for
/// profile counts); equality compares values.
struct ExactProbability {
  BigInt numerator = 0;
  BigInt denominator = 1;

  ExactProbability reduced() const;
  std::string str() const;  // reduced "p/q"
  double to_double() const;

  ExactProbability& operator+=(const ExactProbability& other);
  friend ExactProbability operator+(ExactProbability a, const ExactProbability& b) {
    return a += b;
  }
  friend bool operator==(const ExactProbability& a, const ExactProbability& b) {
    return a.numerator * b.denominator == b.numerator * a.denominator;
  }
};

std::uint64_t profile_count(int n);

/// Calls `visit` once per preference profile of n agents.
void for_each_profile(int n, const std::function<void(const PreferenceSystem&)>& visit);

/// Fraction of profiles satisfying `predicate`.
ExactProbability enumerate_profiles(int n,
                                    const std::function<bool(const PreferenceSystem&)>& predicate);

/// P(target is stable) under uniform preferences.
ExactProbability enumerate_profiles(int n, const Permutation& target);

/// P(target stable, R_s = k, R_p = l), keyed by (k, l). Target must be
/// fixed-point-free.
std::map<std::pair<long long, long long>, ExactProbability> exact_rank_distribution(
    int n, const Permutation& target);

}  // namespace stableperm
