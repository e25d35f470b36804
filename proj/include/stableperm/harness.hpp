#pragma once

// Seeded batch experiments over random instances: per-trial records streamed
// to CSV or JSONL, with per-n summary statistics in a sibling file.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stableperm/proposal.hpp"

namespace stableperm {

enum class Output : unsigned {
  Proposals = 1u << 0,
  FixedPoint = 1u << 1,
  Unmatched = 1u << 2,
  Ranks = 1u << 3,
  StableCount = 1u << 4,  // brute force, n <= kMaxEnumerationSize
  CycleSpectrum = 1u << 5,
};

class OutputSet {
 public:
  OutputSet() = default;
  OutputSet(std::initializer_list<Output> outputs) {
    for (auto o : outputs) add(o);
  }

  /// Comma-separated names: proposals, fixed_point, unmatched, ranks,
  /// stable_count, cycle_spectrum.
  static OutputSet parse(std::string_view names);
  static OutputSet all();

  void add(Output o) noexcept { bits_ |= static_cast<unsigned>(o); }
  bool has(Output o) const noexcept { return bits_ & static_cast<unsigned>(o); }
  bool empty() const noexcept { return bits_ == 0; }

  friend bool operator==(const OutputSet&, const OutputSet&) = default;

 private:
  unsigned bits_ = 0;
};

enum class OutputFormat { Csv, Jsonl };

OutputFormat parse_output_format(std::string_view name);

struct ExperimentConfig {
  std::vector<int> n_values;
  std::uint64_t trials_per_n = 0;
  std::uint64_t master_seed = 0;
  OrderPolicy policy;  // Random orders are re-seeded per trial from the trial seed
  OutputSet outputs;
  std::filesystem::path out_path;
  OutputFormat format = OutputFormat::Csv;
  unsigned threads = 1;

  /// Throws ValidationError, or CapExceeded for stable counts above the cap.
  void validate() const;
};

struct TrialRecord {
  int n = 0;
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> proposals;
  std::optional<bool> fixed_point;
  std::optional<int> unmatched;  // agents outside 2-cycles of Pi0
  std::optional<long long> r_s;
  std::optional<long long> r_p;
  std::optional<std::vector<int>> cycle_spectrum;  // cycle lengths, descending
  std::optional<std::uint64_t> stable_count;
  std::optional<std::uint64_t> pi0_like_count;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Seed of trial `trial` at size n. Independent of the other n values and of
/// the trial count.
std::uint64_t trial_seed(std::uint64_t master_seed, int n, std::uint64_t trial);

TrialRecord run_trial(const ExperimentConfig& config, int n, std::uint64_t trial);

/// Emits records in (n, trial) order regardless of `config.threads`.
void run_experiment(const ExperimentConfig& config,
                    const std::function<void(const TrialRecord&)>& sink);
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config);

struct StatSummary {
  std::string name;
  std::uint64_t count = 0;
  double mean = 0;
  double variance = 0;  // sample variance
  double min = 0;
  double max = 0;
  double ci_half_width = 0;  // 1.96 * sqrt(variance / count)
};

struct SizeSummary {
  int n = 0;
  std::uint64_t trials = 0;
  std::vector<StatSummary> stats;

  const StatSummary* find(std::string_view name) const;
};

struct SummaryStats {
  std::vector<SizeSummary> per_n;  // ascending n

  const SizeSummary* find(int n) const;
};

/// Online (Welford) accumulation; records must arrive in a fixed order for
/// bit-identical output.
class SummaryAccumulator {
 public:
  void add(const TrialRecord& record);
  SummaryStats result() const;

 private:
  struct Welford {
    std::uint64_t count = 0;
    double mean = 0;
    double m2 = 0;
    double min = 0;
    double max = 0;
    void add(double v);
  };
  struct PerN {
    std::uint64_t trials = 0;
    std::map<std::string, Welford> stats;
  };
  std::map<int, PerN> per_n_;
};

/// Statistics per n for every populated field, plus "proposal_ratio":
/// proposals / (0.5 n^{3/2}). Throws ValidationError on empty input.
SummaryStats summarize(const std::vector<TrialRecord>& records);

std::string csv_header();
std::string to_csv_line(const TrialRecord& record);
std::string to_jsonl_line(const TrialRecord& record);
TrialRecord parse_jsonl_line(std::string_view line);

/// "[3 2 1]"
std::string format_spectrum(const std::vector<int>& spectrum);

/// "<dir>/<stem>.summary<ext>"
std::filesystem::path summary_path(const std::filesystem::path& out_path);

std::string summary_text(const SummaryStats& summary, OutputFormat format);

/// Streams records to `path`; write errors throw IoError.
class RecordWriter {
 public:
  RecordWriter(const std::filesystem::path& path, OutputFormat format);
  void write(const TrialRecord& record);
  void close();

 private:
  std::filesystem::path path_;
  OutputFormat format_;
  std::ofstream out_;
};

void write_output(const std::vector<TrialRecord>& records, const SummaryStats& summary,
                  const std::filesystem::path& path, OutputFormat format);

/// run_experiment streamed into config.out_path plus its summary file.
SummaryStats simulate(const ExperimentConfig& config);

}  // namespace stableperm
