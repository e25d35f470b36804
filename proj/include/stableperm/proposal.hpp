#pragma once

// One-sided sequential proposal algorithm producing the canonical stable
// permutation Pi0.

#include <cstdint>
#include <optional>
#include <vector>

#include "stableperm/core.hpp"

namespace stableperm {

enum class OrderKind {
  Lifo,    // the agent that was just rejected or displaced proposes next
  Fifo,    // unattached agents queue up
  Random,  // uniformly random unattached agent, driven by `seed`
};

/// Which unattached agent proposes next. `initial_order` (0-based) seeds the
/// unattached set; empty means 0..n-1.
struct OrderPolicy {
  OrderKind kind = OrderKind::Lifo;
  std::uint64_t seed = 0;
  std::vector<int> initial_order;

  static OrderPolicy lifo() { return {}; }
  static OrderPolicy fifo() { return {OrderKind::Fifo, 0, {}}; }
  static OrderPolicy random(std::uint64_t seed) { return {OrderKind::Random, seed, {}}; }
};

struct ProposalEvent {
  int proposer = 0;
  int proposee = 0;
  bool accepted = false;
  std::optional<int> displaced;  // previous holder pushed out by an accepted proposal

  friend bool operator==(const ProposalEvent&, const ProposalEvent&) = default;
};

struct ProposalOutcome {
  Permutation pi0;
  std::uint64_t proposals = 0;
  std::optional<int> pariah;                        // rejected by everyone; pi0(pariah) == pariah
  std::optional<std::vector<ProposalEvent>> trace;  // only when requested
};

/// Runs the proposal algorithm to completion. Total for every valid instance;
/// the returned pi0 does not depend on the policy.
ProposalOutcome run_proposals(const PreferenceSystem& prefs, const OrderPolicy& policy = {},
                              bool record_trace = false);

struct TerminalSets {
  bool consistent = false;  // S_t == P_t and |S_t| in {n-1, n}
  std::size_t successors = 0;
  std::size_t predecessors = 0;
};

/// Replays the trace to recover the terminal successor and predecessor sets.
/// Throws ValidationError when the outcome carries no trace.
TerminalSets verify_terminal_sets(const ProposalOutcome& outcome, int n);

}  // namespace stableperm
