#include "fmc/simulator.hpp"

#include <set>

namespace fmc {

PreparedTrace::PreparedTrace(const TaskSet& s, const AnalysisContext& c,
                             const WorkloadTrace& t)
    : set(&s), ctx(&c), trace(&t) {
  validate_trace(s, t);
  std::vector<Rat> virt_offset(s.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    virt_offset[i] = s[i].is_hi() ? Rat(c.x * s[i].period) : s[i].period;
  abs_deadline.reserve(t.jobs.size());
  virt_deadline.reserve(t.jobs.size());
  for (const TraceJob& j : t.jobs) {
    abs_deadline.emplace_back(j.arrival + s[j.task].period);
    virt_deadline.emplace_back(j.arrival + virt_offset[j.task]);
  }
  hash = trace_hash(t);
}

namespace {

enum class JobState : std::uint8_t { unreleased, pending, finished, suspended, missed };

class Simulation {
 public:
  Simulation(const PreparedTrace& prepared, TuningStrategy& strategy,
             const SimOptions& options)
      : set_(*prepared.set),
        ctx_(*prepared.ctx),
        trace_(*prepared.trace),
        prep_(prepared),
        strategy_(strategy),
        opt_(options),
        lo_(set_),
        mode_(set_, lo_),
        ready_(ReadyCmp{this}),
        deadlines_(DeadlineCmp{this}) {}

  SimReport run() {
    const std::size_t n = trace_.jobs.size();
    executed_.assign(n, Rat(0));
    budget_.assign(n, Rat(0));
    state_.assign(n, JobState::unreleased);
    use_virtual_.assign(n, false);
    task_switched_.assign(set_.size(), false);
    lo_budget_.resize(set_.size());
    for (std::size_t i = 0; i < set_.size(); ++i) lo_budget_[i] = set_[i].wcet_lo;
    strategy_.reset();
    mode_.reset(set_, lo_);
    admissible_ = set_.u_lo_lo();

    report_.strategy = std::string(strategy_.name());
    report_.trace_hash = prep_.hash;

    Rat now = 0;
    std::size_t next_arrival = 0;
    long prev_running = -1;

    while (next_arrival < n || !ready_.empty()) {
      long running = ready_.empty() ? -1 : *ready_.begin();

      // Next event: running-job boundary, deadline expiry, or arrival.
      Rat when;
      bool have = false;
      Rat boundary;
      if (running >= 0) {
        boundary = now + threshold(running) - executed_[running];
        when = boundary;
        have = true;
      }
      if (!deadlines_.empty()) {
        const Rat& dl = prep_.abs_deadline[*deadlines_.begin()];
        if (!have || dl < when) {
          when = dl;
          have = true;
        }
      }
      if (next_arrival < n) {
        const Rat& arr = trace_.jobs[next_arrival].arrival;
        if (!have || arr < when) {
          when = arr;
          have = true;
        }
      }

      if (running >= 0) executed_[running] += when - now;
      now = when;

      // 1. running job reaches its execution boundary
      if (running >= 0 && executed_[running] == threshold(running)) {
        const TraceJob& job = trace_.jobs[running];
        if (set_[job.task].is_hi() && !task_switched_[job.task] &&
            job.demand > budget_[running]) {
          handle_overrun(running, now);
        } else {
          complete(running, now);
        }
      }

      // 2. deadline checks
      while (!deadlines_.empty() &&
             prep_.abs_deadline[*deadlines_.begin()] == now) {
        long j = *deadlines_.begin();
        deadlines_.erase(deadlines_.begin());
        miss(j, now);
      }

      // 3. arrivals
      while (next_arrival < n && trace_.jobs[next_arrival].arrival == now) {
        admit(static_cast<long>(next_arrival), now);
        ++next_arrival;
      }

      // 4. idle instant: switch back to LO mode
      if (ready_.empty() && mode_.k > 0) switch_back(now);

      // 5. dispatch
      long cur = ready_.empty() ? -1 : *ready_.begin();
      if (cur != prev_running) {
        if (cur >= 0) ++report_.context_switches;
        if (opt_.sink)
          opt_.sink({{"t", rat_to_string(now)},
                     {"event", "dispatch"},
                     {"job", cur >= 0 ? nlohmann::json(cur) : nlohmann::json()}});
        prev_running = cur;
      }
    }
    return std::move(report_);
  }

 private:
  struct ReadyCmp {
    Simulation* sim;
    bool operator()(long a, long b) const {
      const Rat& da = sim->effective_deadline(a);
      const Rat& db = sim->effective_deadline(b);
      int c = cmp(da, db);
      if (c != 0) return c < 0;
      std::size_t ta = sim->trace_.jobs[a].task, tb = sim->trace_.jobs[b].task;
      if (ta != tb) return ta < tb;
      return a < b;  // trace order == arrival order
    }
  };
  struct DeadlineCmp {
    Simulation* sim;
    bool operator()(long a, long b) const {
      int c = cmp(sim->prep_.abs_deadline[a], sim->prep_.abs_deadline[b]);
      if (c != 0) return c < 0;
      return a < b;
    }
  };

  const Rat& effective_deadline(long j) const {
    return use_virtual_[j] ? prep_.virt_deadline[j] : prep_.abs_deadline[j];
  }

  // Completion point of the running job under its current cap.
  Rat threshold(long j) const {
    const TraceJob& job = trace_.jobs[j];
    return job.demand < budget_[j] ? job.demand : budget_[j];
  }

  bool counts_for_metrics(long j) const {
    return prep_.abs_deadline[j] <= trace_.horizon;
  }

  void record_sample(long j, bool suspended) {
    if (!counts_for_metrics(j)) return;
    const TraceJob& job = trace_.jobs[j];
    if (set_[job.task].is_hi()) return;
    ++report_.lo_jobs_counted;
    if (executed_[j] == set_[job.task].wcet_lo) ++report_.lo_jobs_finished;
    if (opt_.collect_samples)
      report_.samples.push_back(
          {mode_.k, Rat(executed_[j] / set_[job.task].wcet_lo), suspended});
  }

  void admit(long j, const Rat& now) {
    const TraceJob& job = trace_.jobs[j];
    const McTask& task = set_[job.task];
    state_[j] = JobState::pending;
    if (task.is_hi()) {
      if (task_switched_[job.task]) {
        budget_[j] = *task.wcet_hi;
        use_virtual_[j] = false;
      } else {
        budget_[j] = task.wcet_lo;
        use_virtual_[j] = true;
      }
    } else {
      budget_[j] = lo_budget_[job.task];
      use_virtual_[j] = false;
      if (budget_[j] == 0) {
        // Degraded to nothing: the budget is exhausted on arrival.
        state_[j] = JobState::finished;
        record_sample(j, false);
        if (opt_.sink)
          opt_.sink({{"t", rat_to_string(now)}, {"event", "zero_budget"}, {"job", j}});
        return;
      }
    }
    ready_.insert(j);
    deadlines_.insert(j);
    if (opt_.sink)
      opt_.sink({{"t", rat_to_string(now)}, {"event", "arrival"}, {"job", j},
                 {"task", task.id}});
  }

  void complete(long j, const Rat& now) {
    ready_.erase(j);
    deadlines_.erase(j);
    state_[j] = JobState::finished;
    record_sample(j, false);
    if (opt_.sink)
      opt_.sink({{"t", rat_to_string(now)}, {"event", "completion"}, {"job", j},
                 {"executed", rat_to_string(executed_[j])}});
  }

  void miss(long j, const Rat& now) {
    ready_.erase(j);
    state_[j] = JobState::missed;
    const TraceJob& job = trace_.jobs[j];
    if (set_[job.task].is_hi()) {
      if (counts_for_metrics(j)) {
        ++report_.hi_deadline_misses;
        if (!report_.first_hi_miss)
          report_.first_hi_miss = MissDetail{now, set_[job.task].id, j};
      }
    } else {
      if (counts_for_metrics(j)) {
        ++report_.lo_budget_misses;
        ++report_.lo_jobs_counted;
      }
    }
    if (opt_.sink)
      opt_.sink({{"t", rat_to_string(now)}, {"event", "deadline_miss"}, {"job", j},
                 {"task", set_[job.task].id}});
  }

  void handle_overrun(long j, const Rat& now) {
    const std::size_t task = trace_.jobs[j].task;

    // The overrunning task alone enters HI mode: actual deadline, C^HI.
    ready_.erase(j);
    task_switched_[task] = true;
    use_virtual_[j] = false;
    budget_[j] = *set_[task].wcet_hi;
    ready_.insert(j);

    auto changes = strategy_.on_mode_switch(mode_, task);

    mode_.k += 1;
    mode_.switched.emplace_back(task, now);
    report_.mode_switches += 1;
    if (mode_.k > report_.max_k) report_.max_k = mode_.k;

    for (const ZChange& ch : changes) {
      std::size_t lt = lo_.tasks[ch.lo_pos];
      if (opt_.check_assignments) {
        if (ch.z > mode_.z[ch.lo_pos])
          throw internal_error("tuning raised a service level mid-window");
        if (ch.z < set_[lt].z_mandatory)
          throw internal_error("tuning violated a mandatory service floor");
      }
      mode_.u_lo_k += (ch.z - mode_.z[ch.lo_pos]) * set_[lt].u_lo();
      mode_.z[ch.lo_pos] = ch.z;
      lo_budget_[lt] = ch.z * set_[lt].wcet_lo;
    }

    if (opt_.check_assignments) {
      Rat delta = per_switch_reduction_bound_by_index(ctx_, task);
      if (delta < 0) admissible_ += delta;
      if (mode_.u_lo_k > admissible_)
        throw internal_error("tuning produced an inadmissible LO utilization");
    }

    // Suspend every active LO job that already used up its reduced budget.
    suspend_exhausted(now);

    if (opt_.collect_mode_events)
      report_.mode_switch_events.push_back({now, task, mode_.k, mode_.u_lo_k});
    if (opt_.sink)
      opt_.sink({{"t", rat_to_string(now)}, {"event", "mode_switch"},
                 {"task", set_[task].id}, {"k", mode_.k},
                 {"u_lo_k", rat_to_string(mode_.u_lo_k)}});
  }

  void suspend_exhausted(const Rat& now) {
    suspend_buf_.clear();
    for (long i : ready_) {
      const TraceJob& job = trace_.jobs[i];
      if (set_[job.task].is_hi()) continue;
      const Rat& cap = lo_budget_[job.task];
      if (budget_[i] == cap) continue;
      if (executed_[i] >= cap)
        suspend_buf_.push_back(i);
      else
        budget_[i] = cap;
    }
    for (long i : suspend_buf_) {
      ready_.erase(i);
      deadlines_.erase(i);
      state_[i] = JobState::suspended;
      record_sample(i, true);
      if (opt_.sink)
        opt_.sink({{"t", rat_to_string(now)}, {"event", "suspend"}, {"job", i},
                   {"executed", rat_to_string(executed_[i])}});
    }
  }

  void switch_back(const Rat& now) {
    ++report_.switch_backs;
    mode_.reset(set_, lo_);
    strategy_.reset();
    std::fill(task_switched_.begin(), task_switched_.end(), false);
    for (std::size_t i = 0; i < set_.size(); ++i) lo_budget_[i] = set_[i].wcet_lo;
    admissible_ = set_.u_lo_lo();
    if (opt_.sink)
      opt_.sink({{"t", rat_to_string(now)}, {"event", "switch_back"}});
  }

  const TaskSet& set_;
  const AnalysisContext& ctx_;
  const WorkloadTrace& trace_;
  const PreparedTrace& prep_;
  TuningStrategy& strategy_;
  const SimOptions& opt_;
  LoIndex lo_;
  ModeState mode_;

  std::set<long, ReadyCmp> ready_;
  std::set<long, DeadlineCmp> deadlines_;
  std::vector<Rat> executed_;
  std::vector<Rat> budget_;
  std::vector<JobState> state_;
  std::vector<bool> use_virtual_;
  std::vector<bool> task_switched_;
  std::vector<Rat> lo_budget_;  // z_i^k * C_i^LO per task index
  std::vector<long> suspend_buf_;
  Rat admissible_;  // closed-form bound for the currently switched set

  SimReport report_;
};

}  // namespace

SimReport simulate(const PreparedTrace& prepared, TuningStrategy& strategy,
                   const SimOptions& options) {
  Simulation sim(prepared, strategy, options);
  return sim.run();
}

SimReport simulate(const TaskSet& set, const AnalysisContext& ctx,
                   const WorkloadTrace& trace, std::string_view strategy,
                   const SimOptions& options) {
  PreparedTrace prepared(set, ctx, trace);
  LoIndex lo(set);
  auto strat = make_strategy(strategy, ctx, set, lo);
  return simulate(prepared, *strat, options);
}

bool replay_check(const TaskSet& set, const AnalysisContext& ctx,
                  const WorkloadTrace& trace, std::string_view strategy,
                  const SimReport& expected, std::string* detail) {
  SimReport again = simulate(set, ctx, trace, strategy);
  std::string a = expected.to_json(set).dump();
  std::string b = again.to_json(set).dump();
  if (a == b) return true;
  if (detail) {
    std::size_t i = 0;
    while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
    std::size_t from = i > 40 ? i - 40 : 0;
    *detail = "reports diverge at byte " + std::to_string(i) + ": ..." +
              a.substr(from, 80) + "... vs ..." + b.substr(from, 80) + "...";
  }
  return false;
}

nlohmann::json SimReport::to_json(const TaskSet& set) const {
  nlohmann::json j;
  j["strategy"] = strategy;
  j["trace_hash"] = trace_hash;
  j["hi_deadline_misses"] = hi_deadline_misses;
  if (first_hi_miss)
    j["first_hi_miss"] = {{"time", rat_to_string(first_hi_miss->time)},
                          {"task", first_hi_miss->task_id},
                          {"job", first_hi_miss->job}};
  j["lo_budget_misses"] = lo_budget_misses;
  j["lo_jobs_counted"] = lo_jobs_counted;
  j["lo_jobs_finished"] = lo_jobs_finished;
  j["pfj"] = pfj();
  j["context_switches"] = context_switches;
  j["mode_switches"] = mode_switches;
  j["switch_backs"] = switch_backs;
  j["max_k"] = max_k;
  nlohmann::json events = nlohmann::json::array();
  for (const ModeSwitchEvent& e : mode_switch_events)
    events.push_back({{"time", rat_to_string(e.time)},
                      {"task", set[e.task].id},
                      {"k", e.k},
                      {"u_lo_k", rat_to_string(e.u_lo_k)}});
  j["mode_switch_events"] = std::move(events);
  nlohmann::json samp = nlohmann::json::array();
  for (const SampleRecord& s : samples)
    samp.push_back({s.k, rat_to_string(s.value), s.suspended});
  j["service_samples"] = std::move(samp);
  return j;
}

}  // namespace fmc
