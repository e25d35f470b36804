#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stableperm/harness.hpp"
#include "stableperm/oracle.hpp"
#include "stableperm/stability.hpp"

using namespace stableperm;

namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("stableperm_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

ExperimentConfig config_for(std::vector<int> n_values, std::uint64_t trials, std::uint64_t seed,
                            OutputSet outputs) {
  ExperimentConfig c;
  c.n_values = std::move(n_values);
  c.trials_per_n = trials;
  c.master_seed = seed;
  c.outputs = outputs;
  return c;
}

}  // namespace

TEST(OutputSet, Parse) {
  const auto s = OutputSet::parse("proposals, ranks,cycle_spectrum");
  EXPECT_TRUE(s.has(Output::Proposals));
  EXPECT_TRUE(s.has(Output::Ranks));
  EXPECT_TRUE(s.has(Output::CycleSpectrum));
  EXPECT_FALSE(s.has(Output::FixedPoint));
  EXPECT_THROW(OutputSet::parse("proposals,bogus"), ValidationError);
  EXPECT_THROW(OutputSet::parse(""), ValidationError);
  EXPECT_THROW(parse_output_format("xml"), ValidationError);
}

TEST(ExperimentConfig, Validation) {
  auto c = config_for({5}, 10, 1, {Output::Proposals});
  EXPECT_NO_THROW(c.validate());
  c.n_values = {};
  EXPECT_THROW(c.validate(), ValidationError);
  c.n_values = {1};
  EXPECT_THROW(c.validate(), ValidationError);
  c.n_values = {5};
  c.trials_per_n = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c.trials_per_n = 1;
  c.outputs = {};
  EXPECT_THROW(c.validate(), ValidationError);
  c.outputs = {Output::StableCount};
  c.n_values = {9};
  EXPECT_NO_THROW(c.validate());
  c.n_values = {5, 10};
  EXPECT_THROW(c.validate(), CapExceeded);
}

TEST(RunExperiment, TwoAgentRecords) {
  const auto records = run_experiment(config_for({2}, 5, 123, OutputSet::all()));
  ASSERT_EQ(records.size(), 5u);
  for (std::uint64_t t = 0; t < 5; ++t) {
    const auto& r = records[t];
    EXPECT_EQ(r.n, 2);
    EXPECT_EQ(r.trial, t);
    EXPECT_EQ(r.seed, trial_seed(123, 2, t));
    EXPECT_EQ(r.proposals, 2u);
    EXPECT_EQ(r.unmatched, 0);
    EXPECT_EQ(r.fixed_point, false);
    EXPECT_EQ(r.r_s, 2);
    EXPECT_EQ(r.r_p, 2);
    EXPECT_EQ(r.cycle_spectrum, std::vector<int>{2});
    EXPECT_EQ(r.stable_count, 1u);
    EXPECT_EQ(r.pi0_like_count, 1u);
  }
}

TEST(RunExperiment, OnlyRequestedOutputs) {
  const auto records = run_experiment(config_for({4}, 3, 1, {Output::FixedPoint}));
  for (const auto& r : records) {
    EXPECT_TRUE(r.fixed_point);
    EXPECT_FALSE(r.proposals);
    EXPECT_FALSE(r.r_s);
    EXPECT_FALSE(r.cycle_spectrum);
    EXPECT_FALSE(r.stable_count);
  }
}

TEST(RunExperiment, FixedPointFrequencyAtThree) {
  const double exact =
      enumerate_profiles(3, [](const PreferenceSystem& prefs) {
        return run_proposals(prefs).pariah.has_value();
      }).to_double();
  constexpr std::uint64_t kTrials = 80'000;
  const auto records = run_experiment(config_for({3}, kTrials, 1, {Output::FixedPoint}));
  double hits = 0;
  for (const auto& r : records) hits += *r.fixed_point;
  const double freq = hits / kTrials;
  const double sigma = std::sqrt(exact * (1 - exact) / kTrials);
  EXPECT_LT(std::abs(freq - exact), 3 * sigma) << freq;
}

TEST(RunExperiment, RecordConsistency) {
  auto c = config_for({3, 6, 9}, 200, 77, OutputSet::all());
  c.threads = 2;
  for (const auto& r : run_experiment(c)) {
    Rng rng(r.seed);
    const auto prefs = generate_instance(r.n, rng);
    const auto out = run_proposals(prefs);
    EXPECT_TRUE(is_stable(prefs, out.pi0).stable);
    const auto rp = ranks(prefs, out.pi0);
    EXPECT_EQ(*r.r_s, rp.r_s);
    EXPECT_EQ(*r.r_p, rp.r_p);
    const auto& spectrum = *r.cycle_spectrum;
    const bool has_one = std::find(spectrum.begin(), spectrum.end(), 1) != spectrum.end();
    EXPECT_EQ(*r.fixed_point, has_one);
    EXPECT_EQ(*r.fixed_point, out.pariah.has_value());
    const auto twos = std::count(spectrum.begin(), spectrum.end(), 2);
    EXPECT_EQ(*r.unmatched, r.n - 2 * twos);
    if (!*r.fixed_point) {
      EXPECT_EQ(static_cast<long long>(*r.proposals), *r.r_s);
    }
    EXPECT_EQ(*r.pi0_like_count >= 1, !*r.fixed_point);
    EXPECT_TRUE(std::is_sorted(spectrum.rbegin(), spectrum.rend()));
  }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  auto c = config_for({5, 40}, 1500, 9, OutputSet::parse("proposals,fixed_point,unmatched,ranks"));
  c.policy = OrderPolicy::random(3);
  const auto serial = run_experiment(c);
  EXPECT_EQ(run_experiment(c), serial);
  for (unsigned threads : {2u, 3u, 8u}) {
    c.threads = threads;
    EXPECT_EQ(run_experiment(c), serial) << threads;
  }
}

TEST(RunExperiment, TrialSeedsIndependentOfOtherSizes) {
  const auto alone = run_experiment(config_for({7}, 20, 5, {Output::Proposals}));
  const auto mixed = run_experiment(config_for({4, 7}, 20, 5, {Output::Proposals}));
  EXPECT_TRUE(std::equal(alone.begin(), alone.end(), mixed.begin() + 20));
}

TEST(Summarize, IdenticalTwoAgentRecords) {
  TrialRecord r;
  r.n = 2;
  r.proposals = 2;
  const auto s = summarize(std::vector<TrialRecord>(5, r));
  ASSERT_EQ(s.per_n.size(), 1u);
  const auto* size = s.find(2);
  ASSERT_NE(size, nullptr);
  EXPECT_EQ(size->trials, 5u);
  const auto* proposals = size->find("proposals");
  ASSERT_NE(proposals, nullptr);
  EXPECT_EQ(proposals->mean, 2.0);
  EXPECT_EQ(proposals->variance, 0.0);
  EXPECT_EQ(proposals->ci_half_width, 0.0);
  EXPECT_NEAR(size->find("proposal_ratio")->mean, std::sqrt(2.0), 1e-15);
}

TEST(Summarize, SampleVariance) {
  TrialRecord a, b;
  a.n = b.n = 10;
  a.proposals = 3;
  b.proposals = 5;
  const auto* st = summarize({a, b}).find(10)->find("proposals");
  EXPECT_EQ(st->mean, 4.0);
  EXPECT_EQ(st->variance, 2.0);
  EXPECT_EQ(st->min, 3.0);
  EXPECT_EQ(st->max, 5.0);
  EXPECT_DOUBLE_EQ(st->ci_half_width, 1.96 * std::sqrt(2.0 / 2.0));
}

TEST(Summarize, EmptyInput) { EXPECT_THROW(summarize({}), ValidationError); }

TEST(Summarize, GroupsBySize) {
  const auto records = run_experiment(config_for({3, 8}, 50, 2, OutputSet::all()));
  const auto s = summarize(records);
  ASSERT_EQ(s.per_n.size(), 2u);
  EXPECT_EQ(s.per_n[0].n, 3);
  EXPECT_EQ(s.per_n[1].n, 8);
  EXPECT_NE(s.per_n[1].find("stable_count"), nullptr);
  EXPECT_EQ(s.find(5), nullptr);
}

TEST(CsvFormat, HeaderAndTwoAgentLine) {
  EXPECT_EQ(csv_header(),
            "n,trial,seed,proposals,fixed_point,unmatched,r_s,r_p,cycle_spectrum,stable_count,"
            "pi0_like_count");
  const auto records = run_experiment(
      config_for({2}, 1, 0, OutputSet::parse("proposals,fixed_point,unmatched,ranks,cycle_spectrum")));
  EXPECT_EQ(to_csv_line(records[0]),
            "2,0," + std::to_string(records[0].seed) + ",2,false,0,2,2,[2],,");
}

TEST(CsvFormat, Spectrum) {
  EXPECT_EQ(format_spectrum(cycle_decomposition(parse_cycle_spec("(1 2)(3 4 5)(6)", 6)).spectrum()),
            "[3 2 1]");
  EXPECT_EQ(format_spectrum({}), "[]");
}

TEST(JsonlFormat, RoundTrip) {
  auto records = run_experiment(config_for({3, 6}, 30, 4, OutputSet::all()));
  TrialRecord bare;
  bare.n = 5;
  bare.trial = 1;
  bare.seed = 0xFFFFFFFFFFFFFFFFULL;
  records.push_back(bare);
  for (const auto& r : records) EXPECT_EQ(parse_jsonl_line(to_jsonl_line(r)), r);
  EXPECT_THROW(parse_jsonl_line("{not json"), ValidationError);
  EXPECT_THROW(parse_jsonl_line("{\"trial\": 1}"), ValidationError);
}

TEST(JsonlFormat, NullsForUnrequestedOutputs) {
  TrialRecord r;
  r.n = 2;
  r.seed = 7;
  r.proposals = 2;
  EXPECT_EQ(to_jsonl_line(r),
            "{\"n\":2,\"trial\":0,\"seed\":7,\"proposals\":2,\"fixed_point\":null,"
            "\"unmatched\":null,\"r_s\":null,\"r_p\":null,\"cycle_spectrum\":null,"
            "\"stable_count\":null,\"pi0_like_count\":null}");
}

TEST(WriteOutput, FilesAndSummarySibling) {
  TempDir dir;
  const auto records = run_experiment(config_for({4}, 10, 3, OutputSet::all()));
  const auto out = dir.path() / "run.csv";
  write_output(records, summarize(records), out, OutputFormat::Csv);
  EXPECT_EQ(summary_path(out), dir.path() / "run.summary.csv");
  const auto text = slurp(out);
  EXPECT_EQ(text.rfind(csv_header() + "\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 11);
  const auto summary = slurp(dir.path() / "run.summary.csv");
  EXPECT_NE(summary.find("4,10,proposals,10,"), std::string::npos) << summary;
}

TEST(WriteOutput, JsonlLinesParse) {
  TempDir dir;
  const auto records = run_experiment(config_for({5}, 8, 3, OutputSet::all()));
  const auto out = dir.path() / "run.jsonl";
  write_output(records, summarize(records), out, OutputFormat::Jsonl);
  std::ifstream in(out);
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) EXPECT_EQ(parse_jsonl_line(line), records.at(k++));
  EXPECT_EQ(k, records.size());
  EXPECT_TRUE(fs::exists(dir.path() / "run.summary.jsonl"));
}

TEST(WriteOutput, UnwritablePathCarriesPath) {
  TempDir dir;
  const auto bad = dir.path() / "missing" / "run.csv";
  try {
    write_output({}, {}, bad, OutputFormat::Csv);
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_EQ(e.path(), bad.string());
  }
}

TEST(Simulate, ByteIdenticalAcrossRunsAndThreads) {
  TempDir dir;
  auto c = config_for({3, 6}, 600, 42, OutputSet::all());
  c.out_path = dir.path() / "a.csv";
  simulate(c);
  c.out_path = dir.path() / "b.csv";
  simulate(c);
  c.out_path = dir.path() / "c.csv";
  c.threads = 8;
  simulate(c);
  const auto a = slurp(dir.path() / "a.csv");
  EXPECT_EQ(a, slurp(dir.path() / "b.csv"));
  EXPECT_EQ(a, slurp(dir.path() / "c.csv"));
  const auto sa = slurp(dir.path() / "a.summary.csv");
  EXPECT_EQ(sa, slurp(dir.path() / "c.summary.csv"));
  EXPECT_FALSE(sa.empty());
}

TEST(Simulate, SummaryMatchesSummarize) {
  TempDir dir;
  auto c = config_for({6, 20}, 300, 8, OutputSet::parse("proposals,unmatched"));
  c.out_path = dir.path() / "s.jsonl";
  c.format = OutputFormat::Jsonl;
  const auto streamed = simulate(c);
  const auto batch = summarize(run_experiment(c));
  ASSERT_EQ(streamed.per_n.size(), batch.per_n.size());
  for (std::size_t k = 0; k < batch.per_n.size(); ++k) {
    ASSERT_EQ(streamed.per_n[k].stats.size(), batch.per_n[k].stats.size());
    for (std::size_t s = 0; s < batch.per_n[k].stats.size(); ++s) {
      EXPECT_EQ(streamed.per_n[k].stats[s].mean, batch.per_n[k].stats[s].mean);
      EXPECT_EQ(streamed.per_n[k].stats[s].variance, batch.per_n[k].stats[s].variance);
    }
  }
}

TEST(Simulate, StableCountCap) {
  TempDir dir;
  auto c = config_for({12}, 1, 0, OutputSet::parse("stable_count"));
  c.out_path = dir.path() / "x.csv";
  EXPECT_THROW(simulate(c), CapExceeded);
  EXPECT_FALSE(fs::exists(c.out_path));
}
