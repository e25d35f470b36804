#include "stableperm/proposal.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace stableperm {
namespace {

// The unattached set U under each order policy.
class Unattached {
 public:
  Unattached(const OrderPolicy& policy, int n) : kind_(policy.kind), rng_(policy.seed) {
    std::vector<int> order = policy.initial_order;
    if (order.empty()) {
      order.resize(n);
      std::iota(order.begin(), order.end(), 0);
    } else {
      std::vector<char> seen(n);
      if (static_cast<int>(order.size()) != n) {
        throw ValidationError("initial order must list all " + std::to_string(n) + " agents");
      }
      for (int a : order) {
        if (a < 0 || a >= n || seen[a]) throw ValidationError("initial order is not a permutation");
        seen[a] = 1;
      }
    }
    if (kind_ == OrderKind::Lifo) {
      items_.assign(order.rbegin(), order.rend());
    } else {
      items_.assign(order.begin(), order.end());
    }
  }

  bool empty() const { return items_.empty(); }

  void push(int agent) { items_.push_back(agent); }

  int pop() {
    int agent = 0;
    switch (kind_) {
      case OrderKind::Lifo:
        agent = items_.back();
        items_.pop_back();
        break;
      case OrderKind::Fifo:
        agent = items_.front();
        items_.pop_front();
        break;
      case OrderKind::Random: {
        const auto k = static_cast<std::size_t>(rng_.below(items_.size()));
        agent = items_[k];
        items_[k] = items_.back();
        items_.pop_back();
        break;
      }
    }
    return agent;
  }

 private:
  OrderKind kind_;
  Rng rng_;
  std::deque<int> items_;
};

}  // namespace

ProposalOutcome run_proposals(const PreferenceSystem& prefs, const OrderPolicy& policy,
                              bool record_trace) {
  const int n = prefs.size();
  if (n < 2) throw ValidationError("run_proposals requires n >= 2");

  // cursor[u]: position in u's list of the next (or current) proposee.
  std::vector<int> cursor(n, 0);
  // holder[v]: predecessor v currently holds, or -1.
  std::vector<int> holder(n, -1);
  std::optional<int> pariah;
  std::uint64_t proposals = 0;
  std::vector<ProposalEvent> trace;

  Unattached unattached(policy, n);

  // A rejected agent advances; it leaves the game once its list is exhausted.
  auto reject = [&](int agent) {
    if (++cursor[agent] < n - 1) {
      unattached.push(agent);
    } else {
      pariah = agent;
    }
  };

  while (!unattached.empty()) {
    const int u = unattached.pop();
    const int v = prefs.choice(u, cursor[u]);
    ++proposals;
    const int w = holder[v];
    if (w < 0) {
      holder[v] = u;
      if (record_trace) trace.push_back({u, v, true, std::nullopt});
    } else if (prefs.prefers(v, u, w)) {
      holder[v] = u;
      if (record_trace) trace.push_back({u, v, true, w});
      reject(w);
    } else {
      if (record_trace) trace.push_back({u, v, false, std::nullopt});
      reject(u);
    }
  }

  std::vector<int> succ(n, -1);
  for (int v = 0; v < n; ++v) {
    if (holder[v] >= 0) succ[holder[v]] = v;
  }
  if (pariah) succ[*pariah] = *pariah;

  ProposalOutcome out{Permutation(std::move(succ)), proposals, pariah, std::nullopt};
  if (record_trace) out.trace = std::move(trace);
  return out;
}

TerminalSets verify_terminal_sets(const ProposalOutcome& outcome, int n) {
  if (!outcome.trace) throw ValidationError("verify_terminal_sets needs a recorded trace");
  std::vector<int> holder(n, -1);
  for (const auto& e : *outcome.trace) {
    if (e.accepted) holder[e.proposee] = e.proposer;
  }
  std::vector<char> in_s(n), in_p(n);
  TerminalSets sets;
  for (int v = 0; v < n; ++v) {
    if (holder[v] < 0) continue;
    in_s[v] = 1;
    in_p[holder[v]] = 1;
    ++sets.successors;
  }
  sets.predecessors = static_cast<std::size_t>(std::count(in_p.begin(), in_p.end(), 1));
  const bool same = in_s == in_p;
  const auto size = sets.successors;
  sets.consistent = same && sets.successors == sets.predecessors &&
                    (size == static_cast<std::size_t>(n) || size + 1 == static_cast<std::size_t>(n));
  return sets;
}

}  // namespace stableperm
