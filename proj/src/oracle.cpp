#include "stableperm/oracle.hpp"

#include <algorithm>
#include <numeric>

#include "stableperm/proposal.hpp"
#include "stableperm/stability.hpp"

namespace stableperm {
namespace {

void check_enumeration_cap(int n) {
  if (n > kMaxEnumerationSize) {
    throw CapExceeded("stable-permutation enumeration is capped at n = " +
                      std::to_string(kMaxEnumerationSize) + ", got n = " + std::to_string(n));
  }
}

void check_profile_cap(int n) {
  if (n > kMaxProfileSize) {
    throw CapExceeded("profile enumeration is capped at n = " + std::to_string(kMaxProfileSize) +
                      ", got n = " + std::to_string(n));
  }
  if (n < 2) throw ValidationError("profile enumeration needs n >= 2");
}

std::vector<std::pair<int, int>> matched_pairs(const Permutation& p) {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < p.size(); ++i) {
    const int j = p(i);
    if (i < j && p(j) == i) out.emplace_back(i, j);
  }
  return out;
}

}  // namespace

StableSet enumerate_stable(const PreferenceSystem& prefs) {
  const int n = prefs.size();
  check_enumeration_cap(n);
  StableSet out;
  std::vector<int> succ(n);
  std::iota(succ.begin(), succ.end(), 0);
  do {
    Permutation p(succ);
    if (!is_stable(prefs, p).stable) continue;
    if (classify_pi0_like(prefs, p)) out.pi0_like.push_back(p);
    out.all_stable.push_back(std::move(p));
  } while (std::next_permutation(succ.begin(), succ.end()));

  if (!out.all_stable.empty()) {
    out.fixed_pairs = matched_pairs(out.all_stable.front());
    for (const auto& p : out.all_stable) {
      std::erase_if(out.fixed_pairs, [&](const auto& pair) { return p(pair.first) != pair.second; });
    }
  }
  return out;
}

StructureReport verify_structure(const PreferenceSystem& prefs) {
  check_enumeration_cap(prefs.size());
  return verify_structure(prefs, enumerate_stable(prefs), run_proposals(prefs).pi0);
}

StructureReport verify_structure(const PreferenceSystem& prefs, const StableSet& stable,
                                 const Permutation& pi0) {
  const int n = prefs.size();
  StructureReport report;
  report.stable_count = stable.all_stable.size();

  auto fail = [](ClauseCheck& clause, int agent) {
    if (clause.passed) clause = {false, agent};
  };

  for (const auto& p : stable.all_stable) {
    for (int i = 0; i < n; ++i) {
      if (prefs.prefers(i, p.succ(i), pi0.succ(i))) fail(report.successor_optimal, i);
      if (prefs.prefers(i, pi0.pred(i), p.pred(i))) fail(report.predecessor_pessimal, i);
      if (pi0(pi0(i)) == i && pi0(i) != i && p(i) != pi0(i)) fail(report.matches_fixed, i);
      if ((p(i) == i) != (pi0(i) == i)) fail(report.fixed_points_shared, i);
    }
  }
  int pi0_fixed = 0;
  for (int i = 0; i < n; ++i) pi0_fixed += pi0(i) == i;
  if (pi0_fixed > 1) fail(report.fixed_points_shared, 0);
  // pi0 must itself be among the stable permutations for the comparisons to mean anything.
  if (std::find(stable.all_stable.begin(), stable.all_stable.end(), pi0) == stable.all_stable.end()) {
    fail(report.successor_optimal, 0);
  }
  return report;
}

ExactProbability ExactProbability::reduced() const {
  if (numerator == 0) return {0, 1};
  BigInt g = boost::multiprecision::gcd(numerator, denominator);
  return {numerator / g, denominator / g};
}

std::string ExactProbability::str() const {
  auto r = reduced();
  return r.numerator.str() + "/" + r.denominator.str();
}

double ExactProbability::to_double() const {
  auto r = reduced();
  return r.numerator.convert_to<double>() / r.denominator.convert_to<double>();
}

ExactProbability& ExactProbability::operator+=(const ExactProbability& other) {
  if (denominator == other.denominator) {
    numerator += other.numerator;
  } else {
    numerator = numerator * other.denominator + other.numerator * denominator;
    denominator *= other.denominator;
  }
  return *this;
}

std::uint64_t profile_count(int n) {
  std::uint64_t orders = 1;
  for (int k = 2; k < n; ++k) orders *= static_cast<std::uint64_t>(k);
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= orders;
  return total;
}

void for_each_profile(int n, const std::function<void(const PreferenceSystem&)>& visit) {
  check_profile_cap(n);
  // orders[i]: every ranking agent i can hold.
  std::vector<std::vector<std::vector<int>>> orders(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j) {
      if (j != i) others.push_back(j);
    }
    do {
      orders[i].push_back(others);
    } while (std::next_permutation(others.begin(), others.end()));
  }

  std::vector<std::size_t> digit(n, 0);
  std::vector<std::vector<int>> lists(n);
  while (true) {
    for (int i = 0; i < n; ++i) lists[i] = orders[i][digit[i]];
    visit(PreferenceSystem(lists));
    int k = n - 1;
    while (k >= 0 && ++digit[k] == orders[k].size()) digit[k--] = 0;
    if (k < 0) break;
  }
}

ExactProbability enumerate_profiles(int n,
                                    const std::function<bool(const PreferenceSystem&)>& predicate) {
  check_profile_cap(n);
  BigInt hits = 0;
  for_each_profile(n, [&](const PreferenceSystem& prefs) {
    if (predicate(prefs)) ++hits;
  });
  return {hits, BigInt(profile_count(n))};
}

ExactProbability enumerate_profiles(int n, const Permutation& target) {
  if (target.size() != n) throw ValidationError("target permutation is not on [n]");
  return enumerate_profiles(n, [&](const PreferenceSystem& prefs) {
    return is_stable(prefs, target).stable;
  });
}

std::map<std::pair<long long, long long>, ExactProbability> exact_rank_distribution(
    int n, const Permutation& target) {
  check_profile_cap(n);
  if (target.size() != n) throw ValidationError("target permutation is not on [n]");
  if (target.has_fixed_point()) {
    throw ValidationError("exact_rank_distribution needs a fixed-point-free permutation");
  }
  std::map<std::pair<long long, long long>, BigInt> counts;
  for_each_profile(n, [&](const PreferenceSystem& prefs) {
    if (!is_stable(prefs, target).stable) return;
    const auto r = ranks(prefs, target);
    ++counts[{r.r_s, r.r_p}];
  });
  const BigInt total(profile_count(n));
  std::map<std::pair<long long, long long>, ExactProbability> out;
  for (auto& [key, count] : counts) out.emplace(key, ExactProbability{count, total});
  return out;
}

}  // namespace stableperm
