#pragma once

// Unit-tick reference scheduler used as an independent oracle for the
// event-driven simulator. Valid whenever every arrival and every budget is
// an integer (true for the drop strategy with zero mandatory floors, and
// for overrun-free runs), because then all scheduling events fall on tick
// boundaries and the two simulations must agree exactly.

#include <set>

#include "fmc/simulator.hpp"

namespace tickref {

struct TickReport {
  long hi_misses = 0;
  long lo_misses = 0;
  long counted = 0;
  long finished = 0;
  long context_switches = 0;
  long mode_switches = 0;
  long switch_backs = 0;
  int max_k = 0;
};

inline TickReport tick_simulate(const fmc::TaskSet& set, const fmc::AnalysisContext& ctx,
                                const fmc::WorkloadTrace& trace,
                                std::string_view strategy_name) {
  using fmc::Rat;
  const auto& jobs = trace.jobs;
  const std::size_t n = jobs.size();

  fmc::LoIndex lo(set);
  auto strategy = fmc::make_strategy(strategy_name, ctx, set, lo);
  strategy->reset();
  fmc::ModeState mode(set, lo);

  std::vector<Rat> abs_dl(n), virt_dl(n);
  std::vector<long> executed(n, 0);
  std::vector<Rat> budget(n);
  enum { unreleased, pending, finished, suspended, missed };
  std::vector<int> state(n, unreleased);
  std::vector<bool> use_virtual(n, false);
  std::vector<bool> task_switched(set.size(), false);
  std::vector<Rat> lo_budget(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) lo_budget[i] = set[i].wcet_lo;
  for (std::size_t j = 0; j < n; ++j) {
    abs_dl[j] = jobs[j].arrival + set[jobs[j].task].period;
    virt_dl[j] = jobs[j].arrival + ctx.x * set[jobs[j].task].period;
  }

  std::set<long> active;  // pending job indices
  TickReport report;
  long prev = -1;
  std::size_t next_arrival = 0;

  auto threshold = [&](long j) {
    return jobs[j].demand < budget[j] ? jobs[j].demand : budget[j];
  };
  auto counts = [&](long j) { return abs_dl[j] <= trace.horizon; };
  auto eff = [&](long j) -> const Rat& { return use_virtual[j] ? virt_dl[j] : abs_dl[j]; };

  for (Rat t = 0;; t += 1) {
    // completions and overruns
    for (auto it = active.begin(); it != active.end();) {
      long j = *it;
      if (Rat(executed[j]) < threshold(j)) {
        ++it;
        continue;
      }
      const auto& job = jobs[j];
      if (set[job.task].is_hi() && !task_switched[job.task] && job.demand > budget[j]) {
        // mode switch of this task alone
        task_switched[job.task] = true;
        use_virtual[j] = false;
        budget[j] = *set[job.task].wcet_hi;
        auto changes = strategy->on_mode_switch(mode, job.task);
        mode.k += 1;
        mode.switched.emplace_back(job.task, t);
        ++report.mode_switches;
        if (mode.k > report.max_k) report.max_k = mode.k;
        for (const auto& ch : changes) {
          std::size_t lt = lo.tasks[ch.lo_pos];
          mode.u_lo_k += (ch.z - mode.z[ch.lo_pos]) * set[lt].u_lo();
          mode.z[ch.lo_pos] = ch.z;
          lo_budget[lt] = ch.z * set[lt].wcet_lo;
        }
        // suspend exhausted LO jobs
        for (auto it2 = active.begin(); it2 != active.end();) {
          long i = *it2;
          if (!set[jobs[i].task].is_hi() && budget[i] != lo_budget[jobs[i].task]) {
            if (Rat(executed[i]) >= lo_budget[jobs[i].task]) {
              state[i] = suspended;
              if (!set[jobs[i].task].is_hi() && counts(i)) ++report.counted;
              it2 = active.erase(it2);
              continue;
            }
            budget[i] = lo_budget[jobs[i].task];
          }
          ++it2;
        }
        it = active.begin();  // restart scan; the switched job may re-qualify
        continue;
      }
      state[j] = finished;
      if (!set[job.task].is_hi() && counts(j)) {
        ++report.counted;
        if (Rat(executed[j]) == set[job.task].wcet_lo) ++report.finished;
      }
      it = active.erase(it);
    }

    // deadline misses
    for (auto it = active.begin(); it != active.end();) {
      long j = *it;
      if (abs_dl[j] == t) {
        state[j] = missed;
        if (set[jobs[j].task].is_hi()) {
          if (counts(j)) ++report.hi_misses;
        } else if (counts(j)) {
          ++report.lo_misses;
          ++report.counted;
        }
        it = active.erase(it);
      } else {
        ++it;
      }
    }

    // arrivals
    while (next_arrival < n && jobs[next_arrival].arrival == t) {
      long j = static_cast<long>(next_arrival++);
      const auto& job = jobs[j];
      state[j] = pending;
      if (set[job.task].is_hi()) {
        budget[j] = task_switched[job.task] ? *set[job.task].wcet_hi : set[job.task].wcet_lo;
        use_virtual[j] = !task_switched[job.task];
      } else {
        budget[j] = lo_budget[job.task];
        use_virtual[j] = false;
        if (budget[j] == 0) {
          state[j] = finished;
          if (counts(j)) ++report.counted;
          continue;
        }
      }
      active.insert(j);
    }

    // idle: back to LO mode
    if (active.empty()) {
      if (mode.k > 0) {
        ++report.switch_backs;
        mode.reset(set, lo);
        strategy->reset();
        std::fill(task_switched.begin(), task_switched.end(), false);
        for (std::size_t i = 0; i < set.size(); ++i) lo_budget[i] = set[i].wcet_lo;
      }
      if (next_arrival >= n) break;
    }

    // dispatch: EDF on effective deadlines, ties by task then arrival order
    long cur = -1;
    for (long j : active) {
      if (cur < 0 || cmp(eff(j), eff(cur)) < 0 ||
          (eff(j) == eff(cur) &&
           (jobs[j].task < jobs[cur].task ||
            (jobs[j].task == jobs[cur].task && j < cur))))
        cur = j;
    }
    if (cur != prev) {
      if (cur >= 0) ++report.context_switches;
      prev = cur;
    }
    if (cur >= 0) ++executed[cur];
  }
  return report;
}

}  // namespace tickref
