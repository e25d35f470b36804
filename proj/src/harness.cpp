#include "stableperm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "stableperm/oracle.hpp"
#include "stableperm/stability.hpp"

namespace stableperm {
namespace {

using Json = nlohmann::ordered_json;

struct OutputName {
  Output output;
  std::string_view name;
};

constexpr OutputName kOutputNames[] = {
    {Output::Proposals, "proposals"},     {Output::FixedPoint, "fixed_point"},
    {Output::Unmatched, "unmatched"},     {Output::Ranks, "ranks"},
    {Output::StableCount, "stable_count"}, {Output::CycleSpectrum, "cycle_spectrum"},
};

// Shortest round-trip decimal; locale-independent.
std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

template <class T>
std::string cell(const std::optional<T>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

OutputSet OutputSet::parse(std::string_view names) {
  OutputSet out;
  std::size_t start = 0;
  while (start <= names.size()) {
    auto comma = names.find(',', start);
    if (comma == std::string_view::npos) comma = names.size();
    const auto name = trim(names.substr(start, comma - start));
    const auto it = std::find_if(std::begin(kOutputNames), std::end(kOutputNames),
                                 [&](const OutputName& o) { return o.name == name; });
    if (it == std::end(kOutputNames)) {
      throw ValidationError("unknown output '" + name +
                            "' (expected proposals, fixed_point, unmatched, ranks, "
                            "stable_count, cycle_spectrum)");
    }
    out.add(it->output);
    start = comma + 1;
  }
  return out;
}

OutputSet OutputSet::all() {
  OutputSet out;
  for (const auto& o : kOutputNames) out.add(o.output);
  return out;
}

OutputFormat parse_output_format(std::string_view name) {
  if (name == "csv") return OutputFormat::Csv;
  if (name == "jsonl") return OutputFormat::Jsonl;
  throw ValidationError("unknown format '" + std::string(name) + "' (expected csv or jsonl)");
}

void ExperimentConfig::validate() const {
  if (n_values.empty()) throw ValidationError("no n values given");
  for (int n : n_values) {
    if (n < 2) throw ValidationError("n must be at least 2, got " + std::to_string(n));
  }
  if (trials_per_n == 0) throw ValidationError("trials must be positive");
  if (outputs.empty()) throw ValidationError("no outputs requested");
  if (threads == 0) throw ValidationError("threads must be positive");
  if (outputs.has(Output::StableCount)) {
    const int max_n = *std::max_element(n_values.begin(), n_values.end());
    if (max_n > kMaxEnumerationSize) {
      throw CapExceeded("stable_count enumerates all permutations and is capped at n = " +
                        std::to_string(kMaxEnumerationSize) + ", got n = " +
                        std::to_string(max_n));
    }
  }
}

std::uint64_t trial_seed(std::uint64_t master_seed, int n, std::uint64_t trial) {
  return derive_seed(derive_seed(master_seed, static_cast<std::uint64_t>(n)), trial);
}

TrialRecord run_trial(const ExperimentConfig& config, int n, std::uint64_t trial) {
  TrialRecord rec;
  rec.n = n;
  rec.trial = trial;
  rec.seed = trial_seed(config.master_seed, n, trial);

  Rng rng(rec.seed);
  const auto prefs = generate_instance(n, rng);
  OrderPolicy policy = config.policy;
  if (policy.kind == OrderKind::Random) policy.seed = derive_seed(rec.seed, config.policy.seed);
  const auto outcome = run_proposals(prefs, policy);
  const auto& out = config.outputs;

  if (out.has(Output::Proposals)) rec.proposals = outcome.proposals;
  if (out.has(Output::FixedPoint)) rec.fixed_point = outcome.pariah.has_value();
  if (out.has(Output::Unmatched) || out.has(Output::CycleSpectrum)) {
    const auto cycles = cycle_decomposition(outcome.pi0);
    if (out.has(Output::Unmatched)) rec.unmatched = n - cycles.matched_agents();
    if (out.has(Output::CycleSpectrum)) rec.cycle_spectrum = cycles.spectrum();
  }
  if (out.has(Output::Ranks)) {
    const auto r = ranks(prefs, outcome.pi0);
    rec.r_s = r.r_s;
    rec.r_p = r.r_p;
  }
  if (out.has(Output::StableCount)) {
    const auto stable = enumerate_stable(prefs);
    rec.stable_count = stable.all_stable.size();
    rec.pi0_like_count = stable.pi0_like.size();
  }
  return rec;
}

void run_experiment(const ExperimentConfig& config,
                    const std::function<void(const TrialRecord&)>& sink) {
  config.validate();
  const std::uint64_t batch = config.threads == 1 ? 1 : 256ULL * config.threads;
  std::vector<TrialRecord> buffer;
  for (int n : config.n_values) {
    for (std::uint64_t first = 0; first < config.trials_per_n; first += batch) {
      const std::uint64_t count = std::min(batch, config.trials_per_n - first);
      if (config.threads == 1 || count == 1) {
        for (std::uint64_t t = first; t < first + count; ++t) sink(run_trial(config, n, t));
        continue;
      }
      buffer.assign(count, {});
      std::atomic<std::uint64_t> next{0};
      std::exception_ptr error;
      std::mutex error_mutex;
      {
        std::vector<std::jthread> workers;
        const auto nworkers = std::min<std::uint64_t>(config.threads, count);
        for (std::uint64_t w = 0; w < nworkers; ++w) {
          workers.emplace_back([&] {
            try {
              for (auto k = next++; k < count; k = next++) {
                buffer[k] = run_trial(config, n, first + k);
              }
            } catch (...) {
              std::lock_guard lock(error_mutex);
              if (!error) error = std::current_exception();
              next = count;
            }
          });
        }
      }
      if (error) std::rethrow_exception(error);
      for (const auto& rec : buffer) sink(rec);
    }
  }
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config) {
  std::vector<TrialRecord> out;
  run_experiment(config, [&](const TrialRecord& r) { out.push_back(r); });
  return out;
}

const StatSummary* SizeSummary::find(std::string_view name) const {
  for (const auto& s : stats) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

const SizeSummary* SummaryStats::find(int n) const {
  for (const auto& s : per_n) {
    if (s.n == n) return &s;
  }
  return nullptr;
}

void SummaryAccumulator::Welford::add(double v) {
  if (count == 0) {
    min = max = v;
  } else {
    min = std::min(min, v);
    max = std::max(max, v);
  }
  ++count;
  const double delta = v - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (v - mean);
}

void SummaryAccumulator::add(const TrialRecord& r) {
  auto& slot = per_n_[r.n];
  ++slot.trials;
  auto put = [&](const char* name, double v) { slot.stats[name].add(v); };
  if (r.proposals) {
    put("proposals", static_cast<double>(*r.proposals));
    put("proposal_ratio", static_cast<double>(*r.proposals) / (0.5 * std::pow(r.n, 1.5)));
  }
  if (r.fixed_point) put("fixed_point", *r.fixed_point ? 1.0 : 0.0);
  if (r.unmatched) put("unmatched", *r.unmatched);
  if (r.r_s) put("r_s", static_cast<double>(*r.r_s));
  if (r.r_p) put("r_p", static_cast<double>(*r.r_p));
  if (r.cycle_spectrum) put("cycle_count", static_cast<double>(r.cycle_spectrum->size()));
  if (r.stable_count) put("stable_count", static_cast<double>(*r.stable_count));
  if (r.pi0_like_count) put("pi0_like_count", static_cast<double>(*r.pi0_like_count));
}

SummaryStats SummaryAccumulator::result() const {
  // Fixed statistic order, independent of std::map's alphabetical order.
  static constexpr std::string_view kOrder[] = {
      "proposals", "proposal_ratio", "fixed_point",  "unmatched",     "r_s",
      "r_p",       "cycle_count",    "stable_count", "pi0_like_count"};
  SummaryStats out;
  for (const auto& [n, slot] : per_n_) {
    SizeSummary size;
    size.n = n;
    size.trials = slot.trials;
    for (auto name : kOrder) {
      const auto it = slot.stats.find(std::string(name));
      if (it == slot.stats.end()) continue;
      const auto& w = it->second;
      StatSummary s;
      s.name = name;
      s.count = w.count;
      s.mean = w.mean;
      s.variance = w.count > 1 ? w.m2 / static_cast<double>(w.count - 1) : 0.0;
      s.min = w.min;
      s.max = w.max;
      s.ci_half_width = 1.96 * std::sqrt(s.variance / static_cast<double>(w.count));
      size.stats.push_back(std::move(s));
    }
    out.per_n.push_back(std::move(size));
  }
  return out;
}

SummaryStats summarize(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw ValidationError("cannot summarize an empty record set");
  SummaryAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

std::string format_spectrum(const std::vector<int>& spectrum) {
  std::string out = "[";
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    if (k) out += ' ';
    out += std::to_string(spectrum[k]);
  }
  return out + "]";
}

std::string csv_header() {
  return "n,trial,seed,proposals,fixed_point,unmatched,r_s,r_p,cycle_spectrum,stable_count,"
         "pi0_like_count";
}

std::string to_csv_line(const TrialRecord& r) {
  std::string out = std::to_string(r.n) + ',' + std::to_string(r.trial) + ',' +
                    std::to_string(r.seed) + ',' + cell(r.proposals) + ',';
  if (r.fixed_point) out += *r.fixed_point ? "true" : "false";
  out += ',' + cell(r.unmatched) + ',' + cell(r.r_s) + ',' + cell(r.r_p) + ',';
  if (r.cycle_spectrum) out += format_spectrum(*r.cycle_spectrum);
  out += ',' + cell(r.stable_count) + ',' + cell(r.pi0_like_count);
  return out;
}

std::string to_jsonl_line(const TrialRecord& r) {
  auto opt = [](const auto& v) -> Json { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["n"] = r.n;
  j["trial"] = r.trial;
  j["seed"] = r.seed;
  j["proposals"] = opt(r.proposals);
  j["fixed_point"] = opt(r.fixed_point);
  j["unmatched"] = opt(r.unmatched);
  j["r_s"] = opt(r.r_s);
  j["r_p"] = opt(r.r_p);
  j["cycle_spectrum"] = opt(r.cycle_spectrum);
  j["stable_count"] = opt(r.stable_count);
  j["pi0_like_count"] = opt(r.pi0_like_count);
  return j.dump();
}

TrialRecord parse_jsonl_line(std::string_view line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
  auto get = [&]<class T>(const char* key, std::optional<T>& field) {
    if (!j.contains(key) || j[key].is_null()) {
      field.reset();
    } else {
      field = j[key].get<T>();
    }
  };
  try {
    TrialRecord r;
    r.n = j.at("n").get<int>();
    r.trial = j.at("trial").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    get("proposals", r.proposals);
    get("fixed_point", r.fixed_point);
    get("unmatched", r.unmatched);
    get("r_s", r.r_s);
    get("r_p", r.r_p);
    get("cycle_spectrum", r.cycle_spectrum);
    get("stable_count", r.stable_count);
    get("pi0_like_count", r.pi0_like_count);
    return r;
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
}

std::filesystem::path summary_path(const std::filesystem::path& out_path) {
  auto name = out_path.stem().string() + ".summary" + out_path.extension().string();
  return out_path.parent_path() / name;
}

std::string summary_text(const SummaryStats& summary, OutputFormat format) {
  std::ostringstream out;
  if (format == OutputFormat::Csv) {
    out << "n,trials,statistic,count,mean,variance,min,max,ci_low,ci_high\n";
  }
  for (const auto& size : summary.per_n) {
    for (const auto& s : size.stats) {
      const double lo = s.mean - s.ci_half_width;
      const double hi = s.mean + s.ci_half_width;
      if (format == OutputFormat::Csv) {
        out << size.n << ',' << size.trials << ',' << s.name << ',' << s.count << ','
            << format_double(s.mean) << ',' << format_double(s.variance) << ','
            << format_double(s.min) << ',' << format_double(s.max) << ',' << format_double(lo)
            << ',' << format_double(hi) << '\n';
      } else {
        Json j;
        j["n"] = size.n;
        j["trials"] = size.trials;
        j["statistic"] = s.name;
        j["count"] = s.count;
        j["mean"] = s.mean;
        j["variance"] = s.variance;
        j["min"] = s.min;
        j["max"] = s.max;
        j["ci_low"] = lo;
        j["ci_high"] = hi;
        out << j.dump() << '\n';
      }
    }
  }
  return out.str();
}

RecordWriter::RecordWriter(const std::filesystem::path& path, OutputFormat format)
    : path_(path), format_(format), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError(path_.string(), "cannot open for writing");
  if (format_ == OutputFormat::Csv) out_ << csv_header() << '\n';
}

void RecordWriter::write(const TrialRecord& record) {
  out_ << (format_ == OutputFormat::Csv ? to_csv_line(record) : to_jsonl_line(record)) << '\n';
  if (!out_) throw IoError(path_.string(), "write failed");
}

void RecordWriter::close() {
  out_.close();
  if (!out_) throw IoError(path_.string(), "close failed");
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace

void write_output(const std::vector<TrialRecord>& records, const SummaryStats& summary,
                  const std::filesystem::path& path, OutputFormat format) {
  RecordWriter writer(path, format);
  for (const auto& r : records) writer.write(r);
  writer.close();
  write_text(summary_path(path), summary_text(summary, format));
}

SummaryStats simulate(const ExperimentConfig& config) {
  config.validate();
  if (config.out_path.empty()) throw ValidationError("no output path given");
  RecordWriter writer(config.out_path, config.format);
  SummaryAccumulator acc;
  run_experiment(config, [&](const TrialRecord& r) {
    writer.write(r);
    acc.add(r);
  });
  writer.close();
  auto summary = acc.result();
  write_text(summary_path(config.out_path), summary_text(summary, config.format));
  return summary;
}

}  // namespace stableperm
