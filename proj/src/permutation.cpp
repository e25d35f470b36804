#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>
#include <numeric>
#include <sstream>

#include "stableperm/core.hpp"

namespace stableperm {

Permutation::Permutation(std::vector<int> successors) : succ_(std::move(successors)) {
  const int n = size();
  pred_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    const int s = succ_[i];
    if (s < 0 || s >= n) {
      throw ValidationError("successor of agent " + std::to_string(i + 1) + " out of range");
    }
    if (pred_[s] != -1) {
      throw ValidationError("agent " + std::to_string(s + 1) + " is the successor of two agents");
    }
    pred_[s] = i;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> succ(n);
  std::iota(succ.begin(), succ.end(), 0);
  return Permutation(std::move(succ));
}

Permutation Permutation::from_one_based(std::initializer_list<int> successors) {
  return from_one_based(std::span<const int>(successors.begin(), successors.size()));
}

Permutation Permutation::from_one_based(std::span<const int> successors) {
  std::vector<int> succ;
  succ.reserve(successors.size());
  for (int s : successors) succ.push_back(s - 1);
  return Permutation(std::move(succ));
}

std::vector<int> Permutation::one_based() const {
  std::vector<int> out(succ_);
  for (int& s : out) ++s;
  return out;
}

bool Permutation::has_fixed_point() const noexcept {
  for (int i = 0; i < size(); ++i) {
    if (succ_[i] == i) return true;
  }
  return false;
}

std::vector<int> CycleDecomposition::spectrum() const {
  std::vector<int> lengths;
  lengths.reserve(cycles.size());
  for (const auto& c : cycles) lengths.push_back(static_cast<int>(c.size()));
  std::sort(lengths.begin(), lengths.end(), std::greater<>());
  return lengths;
}

CycleDecomposition cycle_decomposition(const Permutation& p) {
  const int n = p.size();
  CycleDecomposition out;
  std::vector<char> seen(n);
  for (int start = 0; start < n; ++start) {
    if (seen[start]) continue;
    auto& cycle = out.cycles.emplace_back();
    for (int a = start; !seen[a]; a = p(a)) {
      seen[a] = 1;
      cycle.push_back(a);
    }
  }
  for (const auto& cycle : out.cycles) {
    auto& bucket = cycle.size() == 1   ? out.fixed_points
                   : cycle.size() == 2 ? out.two_cycle_agents
                                       : out.long_cycle_agents;
    bucket.insert(bucket.end(), cycle.begin(), cycle.end());
  }
  std::sort(out.two_cycle_agents.begin(), out.two_cycle_agents.end());
  std::sort(out.long_cycle_agents.begin(), out.long_cycle_agents.end());
  return out;
}

Permutation invert(const Permutation& p) {
  std::vector<int> succ(p.size());
  for (int i = 0; i < p.size(); ++i) succ[p(i)] = i;
  return Permutation(std::move(succ));
}

Permutation parse_cycle_spec(std::string_view spec, int n) {
  if (n < 1) throw ValidationError("cycle spec needs n >= 1");
  std::vector<int> succ(n, -1);
  std::vector<char> used(n);
  std::vector<int> cycle;
  bool open = false;

  auto bad = [&](const std::string& what) {
    return ValidationError("invalid cycle spec '" + std::string(spec) + "': " + what);
  };
  auto close_cycle = [&] {
    if (cycle.empty()) throw bad("empty cycle");
    for (std::size_t k = 0; k < cycle.size(); ++k) succ[cycle[k]] = cycle[(k + 1) % cycle.size()];
    cycle.clear();
  };

  std::size_t pos = 0;
  while (pos < spec.size()) {
    const char c = spec[pos];
    if (std::isspace(static_cast<unsigned char>(c)) || (c == ',' && open)) {
      ++pos;
    } else if (c == '(') {
      if (open) throw bad("nested '('");
      open = true;
      ++pos;
    } else if (c == ')') {
      if (!open) throw bad("unmatched ')'");
      close_cycle();
      open = false;
      ++pos;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      if (!open) throw bad("agent outside parentheses");
      int id = 0;
      auto [ptr, ec] = std::from_chars(spec.data() + pos, spec.data() + spec.size(), id);
      if (ec != std::errc{}) throw bad("invalid number");
      pos = static_cast<std::size_t>(ptr - spec.data());
      if (id < 1 || id > n) throw bad("agent " + std::to_string(id) + " out of range [1, " + std::to_string(n) + "]");
      if (used[id - 1]) throw bad("agent " + std::to_string(id) + " repeated");
      used[id - 1] = 1;
      cycle.push_back(id - 1);
    } else {
      throw bad(std::string("unexpected character '") + c + "'");
    }
  }
  if (open) throw bad("unterminated cycle");
  for (int i = 0; i < n; ++i) {
    if (succ[i] < 0) succ[i] = i;
  }
  return Permutation(std::move(succ));
}

std::string format_cycles(const Permutation& p) {
  std::ostringstream out;
  for (const auto& cycle : cycle_decomposition(p).cycles) {
    out << '(';
    for (std::size_t k = 0; k < cycle.size(); ++k) out << (k ? " " : "") << cycle[k] + 1;
    out << ')';
  }
  return out.str();
}

}  // namespace stableperm
