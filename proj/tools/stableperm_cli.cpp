// Command-line front end: solve, enumerate, simulate, exact, integrate.
//
// Exit codes: 0 success, 1 validation error, 2 cap exceeded, 3 I/O error.

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "stableperm/analytics.hpp"
#include "stableperm/core.hpp"
#include "stableperm/harness.hpp"
#include "stableperm/oracle.hpp"
#include "stableperm/proposal.hpp"
#include "stableperm/stability.hpp"

namespace sp = stableperm;

namespace {

sp::PreferenceSystem load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw sp::IoError(path, "cannot open instance file");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw sp::IoError(path, "read failed");
  return sp::parse_instance(text.str());
}

sp::OrderPolicy parse_order(const std::string& name, std::uint64_t seed) {
  if (name == "lifo") return sp::OrderPolicy::lifo();
  if (name == "fifo") return sp::OrderPolicy::fifo();
  if (name == "random") return sp::OrderPolicy::random(seed);
  throw sp::ValidationError("unknown order '" + name + "' (expected lifo, fifo or random)");
}

std::vector<int> parse_n_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw sp::ValidationError("bad n value '" + item + "' in --n");
    }
  }
  if (out.empty()) throw sp::ValidationError("--n needs at least one value");
  return out;
}

std::string agent(int i) { return std::to_string(i + 1); }

int run_solve(const std::string& path, const std::string& order, std::uint64_t order_seed,
              bool trace) {
  const auto prefs = load_instance(path);
  const auto outcome = sp::run_proposals(prefs, parse_order(order, order_seed), trace);
  if (outcome.trace) {
    for (const auto& e : *outcome.trace) {
      std::cout << "propose " << agent(e.proposer) << " -> " << agent(e.proposee) << ' '
                << (e.accepted ? "accepted" : "rejected");
      if (e.displaced) std::cout << " displaced " << agent(*e.displaced);
      std::cout << '\n';
    }
  }
  std::cout << "pi0: " << sp::format_cycles(outcome.pi0) << '\n'
            << "proposals: " << outcome.proposals << '\n'
            << "pariah: " << (outcome.pariah ? agent(*outcome.pariah) : "none") << '\n';
  return 0;
}

int run_enumerate(const std::string& path, bool tan, int max_n) {
  const auto prefs = load_instance(path);
  if (max_n > sp::kMaxEnumerationSize) {
    throw sp::CapExceeded("--max-n cannot exceed " + std::to_string(sp::kMaxEnumerationSize));
  }
  if (prefs.size() > max_n) {
    throw sp::CapExceeded("instance has n = " + std::to_string(prefs.size()) +
                          ", above --max-n " + std::to_string(max_n));
  }
  const auto stable = sp::enumerate_stable(prefs);
  std::cout << "stable permutations: " << stable.all_stable.size() << '\n';
  for (const auto& p : stable.all_stable) {
    const bool like = std::find(stable.pi0_like.begin(), stable.pi0_like.end(), p) !=
                      stable.pi0_like.end();
    std::cout << sp::format_cycles(p) << " pi0_like=" << (like ? "true" : "false");
    if (tan) std::cout << " tan=" << (sp::is_tan_stable(prefs, p) ? "true" : "false");
    std::cout << '\n';
  }
  std::cout << "fixed pairs:";
  if (stable.fixed_pairs.empty()) std::cout << " none";
  for (const auto& [a, b] : stable.fixed_pairs) std::cout << " (" << agent(a) << ' ' << agent(b) << ')';
  std::cout << '\n';
  return 0;
}

int run_simulate(const std::string& n_list, std::uint64_t trials, std::uint64_t seed,
                 const std::string& outputs, const std::string& out, const std::string& format,
                 const std::string& order, unsigned threads) {
  sp::ExperimentConfig config;
  config.n_values = parse_n_list(n_list);
  config.trials_per_n = trials;
  config.master_seed = seed;
  config.policy = parse_order(order, 0);
  config.outputs = sp::OutputSet::parse(outputs);
  config.out_path = out;
  config.format = sp::parse_output_format(format);
  config.threads = threads;
  const auto summary = sp::simulate(config);
  std::cout << "wrote " << out << " and " << sp::summary_path(out).string() << '\n';
  for (const auto& size : summary.per_n) {
    for (const auto& s : size.stats) {
      std::cout << "n=" << size.n << ' ' << s.name << " mean=" << s.mean << " +- "
                << s.ci_half_width << '\n';
    }
  }
  return 0;
}

int run_exact(int n, const std::string& pi, const std::string& stat) {
  if (n > sp::kMaxProfileSize) {
    throw sp::CapExceeded("exact enumeration is capped at n = " +
                          std::to_string(sp::kMaxProfileSize));
  }
  if (n < 2) throw sp::ValidationError("--n must be 2, 3 or 4");
  auto target = [&] {
    if (pi.empty()) throw sp::ValidationError("--stat " + stat + " needs --pi");
    return sp::parse_cycle_spec(pi, n);
  };
  if (stat == "stable_prob") {
    std::cout << sp::enumerate_profiles(n, target()).str() << '\n';
  } else if (stat == "fixed_point_prob") {
    const auto p = sp::enumerate_profiles(
        n, [](const sp::PreferenceSystem& prefs) { return sp::run_proposals(prefs).pariah.has_value(); });
    std::cout << p.str() << '\n';
  } else if (stat == "rank_dist") {
    std::cout << "r_s r_p probability\n";
    for (const auto& [key, prob] : sp::exact_rank_distribution(n, target())) {
      std::cout << key.first << ' ' << key.second << ' ' << prob.str() << '\n';
    }
  } else {
    throw sp::ValidationError("unknown --stat '" + stat +
                              "' (expected stable_prob, fixed_point_prob or rank_dist)");
  }
  return 0;
}

int run_integrate(const std::string& pi, int n, std::uint64_t samples, std::uint64_t seed,
                  bool joint, bool published, bool forward_only, unsigned threads) {
  if (n < 2) throw sp::ValidationError("--n must be at least 2");
  const auto p = sp::parse_cycle_spec(pi, n);
  sp::McOptions options;
  options.threads = threads;
  if (published) options.integrand.form = sp::IntegrandForm::AsPublished;
  if (forward_only) options.integrand.orientation = sp::OrientationFilter::ForwardOnly;
  const sp::Rng rng(seed);
  std::cout << std::setprecision(10);
  if (!joint) {
    const auto est = sp::mc_stable_probability(p, samples, rng, options);
    std::cout << "estimate: " << est.mean << " +- " << est.std_error << '\n';
    return 0;
  }
  const auto dist = sp::mc_rank_distribution(p, samples, rng, options);
  std::cout << "estimate: " << dist.mean.sum() << '\n' << "r_s r_p mean std_error\n";
  for (Eigen::Index a = 0; a < dist.mean.rows(); ++a) {
    for (Eigen::Index b = 0; b < dist.mean.cols(); ++b) {
      if (dist.mean(a, b) == 0) continue;
      std::cout << n + a << ' ' << n + b << ' ' << dist.mean(a, b) << ' ' << dist.std_error(a, b)
                << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stable permutations of n agents: solver, oracles and experiments"};
  app.require_subcommand(1);

  std::string instance, order = "lifo", pi, stat, n_list, outputs, out, format = "csv";
  std::uint64_t order_seed = 0, seed = 0, trials = 0, samples = 0;
  bool trace = false, tan = false, joint = false, published = false, forward_only = false;
  int max_n = sp::kMaxEnumerationSize, n = 0;
  unsigned threads = 1;

  auto* solve = app.add_subcommand("solve", "Run the proposal algorithm on an instance");
  solve->add_option("--instance", instance, "Instance file")->required();
  solve->add_option("--order", order, "lifo, fifo or random");
  solve->add_option("--order-seed", order_seed, "Seed for --order random");
  solve->add_flag("--trace", trace, "Print every proposal");

  auto* enumerate = app.add_subcommand("enumerate", "List all stable permutations");
  enumerate->add_option("--instance", instance, "Instance file")->required();
  enumerate->add_flag("--tan", tan, "Add Tan's stability verdict");
  enumerate->add_option("--max-n", max_n, "Refuse instances larger than this");

  auto* simulate = app.add_subcommand("simulate", "Seeded batch experiment");
  simulate->add_option("--n", n_list, "Comma-separated sizes")->required();
  simulate->add_option("--trials", trials, "Trials per size")->required();
  simulate->add_option("--seed", seed, "Master seed")->required();
  simulate->add_option("--outputs", outputs, "Comma-separated outputs")->required();
  simulate->add_option("--out", out, "Record file")->required();
  simulate->add_option("--format", format, "csv or jsonl");
  simulate->add_option("--order", order, "lifo, fifo or random");
  simulate->add_option("--threads", threads, "Worker threads");

  auto* exact = app.add_subcommand("exact", "Exact probabilities by profile enumeration");
  exact->add_option("--n", n, "2, 3 or 4")->required();
  exact->add_option("--pi", pi, "Cycle spec, e.g. \"(1 2 3)\"");
  exact->add_option("--stat", stat, "stable_prob, fixed_point_prob or rank_dist")->required();

  auto* integrate = app.add_subcommand("integrate", "Monte Carlo estimate of P(pi stable)");
  integrate->add_option("--pi", pi, "Cycle spec")->required();
  integrate->add_option("--n", n, "Number of agents")->required();
  integrate->add_option("--samples", samples, "Sample count")->required();
  integrate->add_option("--seed", seed, "Seed")->required();
  integrate->add_flag("--joint-ranks", joint, "Estimate the joint (R_s, R_p) distribution");
  integrate->add_flag("--published", published, "Use the integrand exactly as published");
  integrate->add_flag("--forward-only", forward_only,
                      "Keep only the orientation where agents prefer successors");
  integrate->add_option("--threads", threads, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) return run_solve(instance, order, order_seed, trace);
    if (*enumerate) return run_enumerate(instance, tan, max_n);
    if (*simulate) {
      return run_simulate(n_list, trials, seed, outputs, out, format, order, threads);
    }
    if (*exact) return run_exact(n, pi, stat);
    if (*integrate) {
      return run_integrate(pi, n, samples, seed, joint, published, forward_only, threads);
    }
  } catch (const sp::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const sp::CapExceeded& e) {
    std::cerr << "cap exceeded: " << e.what() << '\n';
    return 2;
  } catch (const sp::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
