#include <algorithm>
#include <cctype>
#include <charconv>
#include <numeric>
#include <sstream>
#include <utility>

#include "stableperm/core.hpp"

namespace stableperm {
namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

// Splits on whitespace after stripping a trailing `#` comment.
std::vector<std::string_view> tokenize(std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) tokens.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return tokens;
}

bool parse_int(std::string_view token, long long& out) {
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

}  // namespace

PreferenceSystem::PreferenceSystem(const std::vector<std::vector<int>>& lists)
    : n_(static_cast<int>(lists.size())) {
  if (n_ < 2) throw ValidationError("a preference system needs at least 2 agents");
  lists_.reserve(static_cast<std::size_t>(n_) * (n_ - 1));
  std::vector<char> seen(n_);
  for (int i = 0; i < n_; ++i) {
    const auto& list = lists[i];
    if (static_cast<int>(list.size()) != n_ - 1) {
      throw ValidationError("list of agent " + std::to_string(i + 1) + " has " +
                            std::to_string(list.size()) + " entries, expected " +
                            std::to_string(n_ - 1));
    }
    std::fill(seen.begin(), seen.end(), 0);
    for (int j : list) {
      if (j < 0 || j >= n_) {
        throw ValidationError("agent " + std::to_string(j + 1) + " out of range in list of agent " +
                              std::to_string(i + 1));
      }
      if (j == i) {
        throw ValidationError("agent " + std::to_string(i + 1) + " appears in its own list");
      }
      if (seen[j]) {
        throw ValidationError("duplicate agent " + std::to_string(j + 1) + " in list of agent " +
                              std::to_string(i + 1));
      }
      seen[j] = 1;
      lists_.push_back(j);
    }
  }
  build_ranks();
}

PreferenceSystem::PreferenceSystem(Trusted, int n, std::vector<int> flat_lists)
    : n_(n), lists_(std::move(flat_lists)) {
  build_ranks();
}

PreferenceSystem PreferenceSystem::from_one_based(
    std::initializer_list<std::initializer_list<int>> lists) {
  std::vector<std::vector<int>> zero_based;
  for (const auto& list : lists) {
    auto& row = zero_based.emplace_back();
    for (int j : list) row.push_back(j - 1);
  }
  return PreferenceSystem(zero_based);
}

void PreferenceSystem::build_ranks() {
  ranks_.assign(static_cast<std::size_t>(n_) * n_, n_);
  for (int i = 0; i < n_; ++i) {
    auto row = list(i);
    for (int pos = 0; pos < n_ - 1; ++pos) {
      ranks_[static_cast<std::size_t>(i) * n_ + row[pos]] = pos + 1;
    }
  }
}

PreferenceSystem parse_instance(std::string_view text) {
  long long n = -1;
  std::size_t header_line = 0;
  std::vector<std::vector<int>> lists;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (n < 0) {
      if (tokens.size() != 1 || !parse_int(tokens[0], n)) {
        throw ValidationError(line_error(line_no, "malformed header, expected a single integer n"));
      }
      if (n < 2) throw ValidationError(line_error(line_no, "malformed header, n must be at least 2"));
      if (n > 1'000'000) throw ValidationError(line_error(line_no, "malformed header, n is too large"));
      header_line = line_no;
      continue;
    }

    const int agent = static_cast<int>(lists.size()) + 1;
    if (agent > n) {
      throw ValidationError(line_error(line_no, "unexpected extra line after " + std::to_string(n) +
                                                    " preference lists"));
    }
    if (static_cast<long long>(tokens.size()) != n - 1) {
      throw ValidationError(line_error(
          line_no, "list of agent " + std::to_string(agent) + " has " +
                       std::to_string(tokens.size()) + " entries, expected " + std::to_string(n - 1)));
    }
    auto& row = lists.emplace_back();
    std::vector<char> seen(static_cast<std::size_t>(n) + 1);
    for (auto token : tokens) {
      long long id = 0;
      if (!parse_int(token, id)) {
        throw ValidationError(line_error(line_no, "invalid agent id '" + std::string(token) + "'"));
      }
      if (id < 1 || id > n) {
        throw ValidationError(line_error(line_no, "agent " + std::to_string(id) +
                                                      " out of range in list of agent " +
                                                      std::to_string(agent)));
      }
      if (id == agent) {
        throw ValidationError(
            line_error(line_no, "agent " + std::to_string(agent) + " appears in its own list"));
      }
      if (seen[id]) {
        throw ValidationError(line_error(line_no, "duplicate agent " + std::to_string(id) +
                                                      " in list of agent " + std::to_string(agent)));
      }
      seen[id] = 1;
      row.push_back(static_cast<int>(id - 1));
    }
  }

  if (n < 0) throw ValidationError(line_error(line_no, "missing header"));
  if (static_cast<long long>(lists.size()) != n) {
    throw ValidationError(line_error(line_no, "expected " + std::to_string(n) +
                                                  " preference lists after header on line " +
                                                  std::to_string(header_line) + ", found " +
                                                  std::to_string(lists.size())));
  }
  return PreferenceSystem(lists);
}

std::string format_instance(const PreferenceSystem& prefs) {
  std::ostringstream out;
  out << prefs.size() << '\n';
  for (int i = 0; i < prefs.size(); ++i) {
    auto row = prefs.list(i);
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? " " : "") << row[k] + 1;
    out << '\n';
  }
  return out.str();
}

PreferenceSystem generate_instance(int n, Rng& rng) {
  if (n < 2) throw ValidationError("generate_instance requires n >= 2, got " + std::to_string(n));
  const std::size_t m = static_cast<std::size_t>(n - 1);
  std::vector<int> flat(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    int* row = flat.data() + static_cast<std::size_t>(i) * m;
    for (int k = 0, j = 0; j < n; ++j) {
      if (j != i) row[k++] = j;
    }
    for (std::size_t k = m - 1; k > 0; --k) {
      std::swap(row[k], row[rng.below(k + 1)]);
    }
  }
  return PreferenceSystem(PreferenceSystem::Trusted{}, n, std::move(flat));
}

int rank_of(const PreferenceSystem& prefs, AgentId i, AgentId j) {
  const int n = prefs.size();
  if (i.value < 1 || i.value > n || j.value < 1 || j.value > n) {
    throw ValidationError("agent id out of range [1, " + std::to_string(n) + "]");
  }
  return prefs.rank(i.index(), j.index());
}

}  // namespace stableperm
