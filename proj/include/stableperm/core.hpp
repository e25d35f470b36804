#pragma once

// Preference systems and permutations of [n].
//
// Agents are 0-based indices everywhere inside the library. The only 1-based
// surfaces are AgentId, the instance/cycle text formats and CLI output.

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stableperm/errors.hpp"
#include "stableperm/rng.hpp"

namespace stableperm {

/// 1-based agent label as it appears in files and on the command line.
struct AgentId {
  int value = 1;

  constexpr int index() const noexcept { return value - 1; }
  static constexpr AgentId from_index(int i) noexcept { return AgentId{i + 1}; }

  constexpr auto operator<=>(const AgentId&) const = default;
};

/// Complete strict rankings of n agents over the other n-1 agents.
///
/// rank(i, j) is the 1-based position of j in i's list; rank(i, i) == n is the
/// implicit "no partner" slot, worse than every real partner.
class PreferenceSystem {
 public:
  PreferenceSystem() = default;

  /// Validating constructor. lists[i] holds the n-1 agents other than i, most
  /// preferred first, as 0-based indices.
  explicit PreferenceSystem(const std::vector<std::vector<int>>& lists);

  /// Same, from 1-based lists (test and example convenience).
  static PreferenceSystem from_one_based(
      std::initializer_list<std::initializer_list<int>> lists);

  int size() const noexcept { return n_; }

  std::span<const int> list(int i) const noexcept {
    return {lists_.data() + static_cast<std::size_t>(i) * (n_ - 1),
            static_cast<std::size_t>(n_ - 1)};
  }

  /// Agent at 0-based `position` of i's list.
  int choice(int i, int position) const noexcept {
    return lists_[static_cast<std::size_t>(i) * (n_ - 1) + position];
  }

  int rank(int i, int j) const noexcept {
    return ranks_[static_cast<std::size_t>(i) * n_ + j];
  }

  /// True iff i strictly prefers a to b (either may be i itself = no partner).
  bool prefers(int i, int a, int b) const noexcept { return rank(i, a) < rank(i, b); }

  friend bool operator==(const PreferenceSystem& a, const PreferenceSystem& b) {
    return a.n_ == b.n_ && a.lists_ == b.lists_;
  }

 private:
  struct Trusted {};
  PreferenceSystem(Trusted, int n, std::vector<int> flat_lists);
  void build_ranks();

  friend PreferenceSystem generate_instance(int n, Rng& rng);

  int n_ = 0;
  std::vector<int> lists_;  // n * (n - 1), row-major
  std::vector<int> ranks_;  // n * n
};

/// Parses the instance text format: a header line with n, then one line per
/// agent listing the other n-1 agents (1-based) best first. `#` starts a
/// comment; blank lines are skipped. Errors carry the offending line number.
PreferenceSystem parse_instance(std::string_view text);

/// Inverse of parse_instance (no comments, trailing newline).
std::string format_instance(const PreferenceSystem& prefs);

/// Uniform random instance: every list is an independent Fisher-Yates shuffle.
PreferenceSystem generate_instance(int n, Rng& rng);

/// Checked rank lookup on 1-based ids.
int rank_of(const PreferenceSystem& prefs, AgentId i, AgentId j);

/// A bijection on [n] stored as successor and predecessor tables.
class Permutation {
 public:
  Permutation() = default;

  /// Validating constructor from 0-based successors.
  explicit Permutation(std::vector<int> successors);

  static Permutation identity(int n);
  static Permutation from_one_based(std::initializer_list<int> successors);
  static Permutation from_one_based(std::span<const int> successors);

  int size() const noexcept { return static_cast<int>(succ_.size()); }
  int operator()(int i) const noexcept { return succ_[i]; }
  int succ(int i) const noexcept { return succ_[i]; }
  int pred(int i) const noexcept { return pred_[i]; }
  const std::vector<int>& successors() const noexcept { return succ_; }
  std::vector<int> one_based() const;

  bool has_fixed_point() const noexcept;

  friend bool operator==(const Permutation& a, const Permutation& b) {
    return a.succ_ == b.succ_;
  }
  friend auto operator<=>(const Permutation& a, const Permutation& b) {
    return a.succ_ <=> b.succ_;
  }

 private:
  std::vector<int> succ_;
  std::vector<int> pred_;
};

struct CycleDecomposition {
  /// Each cycle in successor order from its smallest member; cycles are
  /// ordered by smallest member.
  std::vector<std::vector<int>> cycles;
  std::vector<int> two_cycle_agents;   // ascending
  std::vector<int> long_cycle_agents;  // length >= 3, ascending
  std::vector<int> fixed_points;       // ascending

  int matched_agents() const noexcept { return static_cast<int>(two_cycle_agents.size()); }

  /// Cycle lengths sorted descending.
  std::vector<int> spectrum() const;
};

CycleDecomposition cycle_decomposition(const Permutation& p);

Permutation invert(const Permutation& p);

/// Parses cycle notation such as "(1 2)(3 4 5)". Agents of [n] that do not
/// appear are fixed points; repeated or out-of-range ids are rejected.
Permutation parse_cycle_spec(std::string_view spec, int n);

/// "(1 2)(3 4 5)(6)": every cycle, fixed points included.
std::string format_cycles(const Permutation& p);

}  // namespace stableperm
