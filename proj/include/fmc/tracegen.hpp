#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fmc/task.hpp"

namespace fmc {

// All randomness in the project flows through this wrapper so that draws
// are reproducible bit-for-bit across platforms: mt19937_64 raw output
// mapped by our own code, never by std distributions.
inline constexpr const char* kRngName = "mt19937_64+splitmix64";

std::uint64_t splitmix64(std::uint64_t x);

// Derived substream seed for (seed, stream): seeds are mixed, never reused.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform integer in [lo, hi], rejection-sampled.
  long uniform_int(long lo, long hi);
  // Uniform real in [lo, hi), 53-bit resolution.
  double uniform_real(double lo, double hi);
  bool bernoulli(double p) { return uniform_real(0.0, 1.0) < p; }

 private:
  std::mt19937_64 engine_;
};

struct GeneratorParams {
  Rat u_bound;
  long period_min = 20, period_max = 150;
  double u_lo_min = 0.05, u_lo_max = 0.15;
  double ratio_min = 2.0, ratio_max = 3.0;  // C^HI/C^LO utilization ratio
  double p_cri = 0.5;                       // probability a task is HI
  int min_hi_tasks = 3;
  std::uint64_t seed = 0;
  long retry_budget = 100000;  // candidate draws before giving up

  void validate() const;
};

// Draws tasks one at a time (period uniform integer, u^LO uniform real,
// WCETs floored to integers, utilizations recomputed from the floored
// values) until u_B - 1/20 <= max{u_LO^LO + u_HI^LO, u_HI^HI} <= u_B and
// at least min_hi_tasks HI tasks exist. A candidate that overshoots u_B
// or produces an invalid task is discarded and redrawn. Throws
// input_error when the retry budget runs out.
TaskSet generate_task_set(const GeneratorParams& params);

struct TraceJob {
  std::size_t task;  // index into the task set
  Rat arrival;
  Rat demand;
  bool overrun;  // HI job flagged to run to C^HI
};

struct WorkloadTrace {
  Rat horizon;
  double overrun_prob = 0.0;
  std::uint64_t seed = 0;
  std::string rng = kRngName;
  std::vector<TraceJob> jobs;  // sorted by (arrival, task index)
};

// Strictly periodic release at minimum inter-arrival (stress mode): every
// task releases at 0, T, 2T, ... < horizon. Each HI job is independently
// flagged as an overrun with the given probability; flagged jobs demand
// C^HI, everything else C^LO. jitter_frac > 0 stretches every gap by a
// uniform factor in [1, 1+jitter_frac] (exploratory sporadic mode).
WorkloadTrace generate_trace(const TaskSet& set, const Rat& horizon,
                             double overrun_prob, std::uint64_t seed,
                             double jitter_frac = 0.0);

// FNV-1a over the canonical rendering; used to confirm that strategies
// compared against each other consumed the identical trace.
std::uint64_t trace_hash(const WorkloadTrace& trace);

// Throws input_error if the trace does not fit the set (unknown tasks,
// overrun flags on LO jobs, demands that match neither WCET, unsorted
// arrivals).
void validate_trace(const TaskSet& set, const WorkloadTrace& trace);

nlohmann::json trace_to_json(const TaskSet& set, const WorkloadTrace& trace);
WorkloadTrace trace_from_json(const TaskSet& set, const nlohmann::json& j);
WorkloadTrace load_trace(const TaskSet& set, const std::string& path);
void save_trace(const TaskSet& set, const WorkloadTrace& trace, const std::string& path);

}  // namespace fmc
