#pragma once

#include <functional>
#include <optional>

#include "fmc/tracegen.hpp"
#include "fmc/tuning.hpp"

namespace fmc {

struct MissDetail {
  Rat time;
  std::string task_id;
  long job = -1;  // index within the trace
};

struct ModeSwitchEvent {
  Rat time;
  std::size_t task;
  int k;       // level after the switch
  Rat u_lo_k;  // admitted LO utilization after tuning
};

// Service-level observation for one LO job: executed / C^LO at the moment
// the job completed its budget or was suspended by a budget cut, tagged
// with the mode level in force at that moment.
struct SampleRecord {
  int k;
  Rat value;
  bool suspended;
};

// Optional structured event stream for debugging and replay diagnostics.
using EventSink = std::function<void(const nlohmann::json&)>;

struct SimOptions {
  bool collect_samples = true;
  bool collect_mode_events = true;
  // Trap for tuning bugs: assert after every switch that service levels
  // are monotone, respect mandatory floors, and keep u_LO^k within the
  // closed-form admissible bound for the switched set.
  bool check_assignments = true;
  EventSink sink;
};

struct SimReport {
  std::string strategy;
  std::uint64_t trace_hash = 0;

  long hi_deadline_misses = 0;
  std::optional<MissDetail> first_hi_miss;
  long lo_budget_misses = 0;

  long lo_jobs_counted = 0;   // LO jobs with deadline inside the horizon
  long lo_jobs_finished = 0;  // of those, completed the full C^LO in time
  double pfj() const {
    return lo_jobs_counted == 0
               ? 100.0
               : 100.0 * static_cast<double>(lo_jobs_finished) /
                     static_cast<double>(lo_jobs_counted);
  }

  long context_switches = 0;
  long mode_switches = 0;
  long switch_backs = 0;
  int max_k = 0;

  std::vector<ModeSwitchEvent> mode_switch_events;
  std::vector<SampleRecord> samples;

  nlohmann::json to_json(const TaskSet& set) const;
};

// Trace resolved against one (set, context): per-job absolute and virtual
// deadlines precomputed so repeated simulations share the work. Holds
// references; set, ctx, and trace must outlive it.
struct PreparedTrace {
  const TaskSet* set;
  const AnalysisContext* ctx;
  const WorkloadTrace* trace;
  std::vector<Rat> abs_deadline;
  std::vector<Rat> virt_deadline;  // arrival + x * T for HI jobs
  std::uint64_t hash;

  PreparedTrace(const TaskSet& s, const AnalysisContext& c, const WorkloadTrace& t);
};

// Runs the trace to completion under preemptive EDF on effective deadlines
// with FMC mode switching: an overrunning HI task alone switches (deadline
// reset, budget raised to C^HI), the strategy re-tunes LO service levels,
// exhausted LO jobs are suspended, and an empty ready queue switches the
// system back to LO mode. Deterministic: events at equal times process as
// completion < overrun < deadline check < arrival < dispatch.
SimReport simulate(const PreparedTrace& prepared, TuningStrategy& strategy,
                   const SimOptions& options = {});

// Convenience entry: prepares the trace and builds the strategy by name.
SimReport simulate(const TaskSet& set, const AnalysisContext& ctx,
                   const WorkloadTrace& trace, std::string_view strategy,
                   const SimOptions& options = {});

// Re-runs the simulation on identical inputs and compares against the
// given report byte-for-byte (canonical JSON). On mismatch returns false
// and, if detail is non-null, stores the first divergent line.
bool replay_check(const TaskSet& set, const AnalysisContext& ctx,
                  const WorkloadTrace& trace, std::string_view strategy,
                  const SimReport& expected, std::string* detail = nullptr);

}  // namespace fmc
