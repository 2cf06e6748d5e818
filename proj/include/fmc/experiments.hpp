#pragma once

#include "fmc/simulator.hpp"

namespace fmc {

struct ExperimentConfig {
  std::vector<Rat> u_bounds;
  long sets_per_bound = 50;
  Rat horizon = rat(1000000);
  double overrun_prob = 0.1;
  std::vector<std::string> strategies = {"uniform", "drop", "static"};
  std::uint64_t master_seed = 1;
  int jobs = 1;  // worker threads for the simulation fan-out
  GeneratorParams generator;  // u_bound and seed are filled in per set

  void validate() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct StrategyCell {
  long sets = 0;          // generated sets at this bound
  long accepted = 0;      // sets passing this scheme's off-line test
  long simulated = 0;     // common-schedulable sets actually simulated
  double mean_pfj = 0.0;  // over the common-schedulable subset
  double mean_context_switches = 0.0;
  double acceptance_ratio() const {
    return sets == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(sets);
  }
};

struct DegradationRow {
  int k = 0;
  long count = 0;  // service-degraded LO jobs observed at this level
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double job_share = 0;  // fraction of all degraded jobs
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::vector<StrategyCell>> cells;  // [bound][strategy]
  std::vector<DegradationRow> degradation;       // from the uniform runs

  nlohmann::json to_json() const;
  std::string summary_csv() const;
  std::string degradation_csv() const;
  void write(const std::string& out_dir) const;
};

// Generates sets_per_bound sets per utilization bound (per-set seeds are a
// documented hash mix of master_seed, bound index, set index, and retry
// attempt), runs every strategy's off-line test, simulates the sets that
// all strategies accept on one shared trace each, and aggregates PFJ,
// context switches, and per-k service-degradation statistics.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct DegradationProfile {
  std::vector<Rat> z_line;  // analytic level after k worst-case switches
  std::map<int, std::vector<SampleRecord>> samples;
  bool bounds_ok = true;        // every sample s: z^k <= s <= 1
  bool suspended_ok = true;     // suspended samples: z^k <= s < z^{k-1}
  std::string first_violation;
};

// Runs the uniform strategy over the given traces and collects all per-k
// service-level samples together with the analytic degradation lines.
DegradationProfile degradation_profile(const TaskSet& set, const AnalysisContext& ctx,
                                       const std::vector<WorkloadTrace>& traces);

}  // namespace fmc
