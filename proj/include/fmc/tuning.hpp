#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fmc/analysis.hpp"

namespace fmc {

// Maps task indices to positions in the list of LO tasks and back.
struct LoIndex {
  std::vector<std::size_t> tasks;     // LO position -> task index
  std::vector<std::ptrdiff_t> pos;    // task index -> LO position, -1 for HI

  explicit LoIndex(const TaskSet& set);
  std::size_t count() const { return tasks.size(); }
};

// Run-time mode state: how many HI tasks have switched in the current busy
// window, in which order, and the service levels currently granted to the
// LO tasks. k == switched.size(); u_lo_k == sum of z[i] * u_i^LO.
struct ModeState {
  int k = 0;
  std::vector<std::pair<std::size_t, Rat>> switched;  // (task index, switch time)
  std::vector<Rat> z;                                 // by LO position
  Rat u_lo_k;

  ModeState(const TaskSet& set, const LoIndex& lo);
  void reset(const TaskSet& set, const LoIndex& lo);  // back to LO mode, all z = 1
  std::map<std::string, Rat> z_by_id(const TaskSet& set, const LoIndex& lo) const;
};

// Uniform tuning: the common service level after an overrun of the given
// HI task, z_k = max(0, z_prev + min(0, phi / ((1 - x) * u_LO^LO))).
Rat uniform_next_level(const AnalysisContext& ctx, const TaskSet& set,
                       const Rat& z_prev, const std::string& overrun_id);

// Static-degradation baseline level: the uniform service level that
// survives every possible overrun, clamped to [0,1]. A scheme that drops
// all LO tasks to this level on the first overrun stays admissible no
// matter which HI tasks overrun afterwards.
Rat static_degradation_level(const AnalysisContext& ctx, const TaskSet& set);

// Off-line dropping-off table: LO tasks in ascending utilization order
// (ties by declaration order) over a Fenwick tree of droppable mass
// (z_i - z_i^man) * u_i^LO, so each mode switch selects the tasks to drop
// in O(log n).
class DropTable {
 public:
  DropTable(const AnalysisContext& ctx, const TaskSet& set);

  void reset();  // all LO tasks back to full service

  // Drops the shortest prefix of still-droppable tasks whose mass covers
  // `needed`; returns their task indices (ascending table order). Throws
  // internal_error if the remaining droppable mass is insufficient, which
  // cannot happen for sets that pass the feasibility test.
  std::vector<std::size_t> drop_for(const Rat& needed);

  const std::vector<std::size_t>& order() const { return order_; }

 private:
  Rat prefix_sum(std::size_t count) const;

  const TaskSet& set_;
  std::vector<std::size_t> order_;   // table position -> task index
  std::vector<Rat> mass_;            // current droppable mass per position
  std::vector<Rat> tree_;            // Fenwick tree over mass_
  std::vector<std::size_t> dropped_; // positions dropped since last reset
  Rat total_;
};

// Dropping-off tuning step: computes the required reduction for this
// overrun (net of utilization already shed beyond past requirements) and
// drops the cheapest still-running tasks to cover it. Returns the full
// post-switch service map. sorted_table must be the off-line TA_LO order:
// all LO ids ascending by u_i^LO.
std::map<std::string, Rat> dropping_off_next(const AnalysisContext& ctx, const TaskSet& set,
                                             const ModeState& state,
                                             const std::string& overrun_id,
                                             const std::vector<std::string>& sorted_table);

// Service-level change produced by a strategy at one mode switch.
struct ZChange {
  std::size_t lo_pos;
  Rat z;
};

// Strategy interface used by the simulator. on_mode_switch is called once
// per mode switch with the pre-switch state; the returned changes are
// applied and checked by the caller. reset() starts a fresh busy window.
class TuningStrategy {
 public:
  virtual ~TuningStrategy() = default;
  virtual std::string_view name() const = 0;
  virtual void reset() = 0;
  virtual std::vector<ZChange> on_mode_switch(const ModeState& state,
                                              std::size_t overrun_task) = 0;
};

// variant: "uniform", "drop", or "static". Throws input_error for unknown
// names or unsupported combinations (uniform and static require all
// mandatory service levels to be zero).
std::unique_ptr<TuningStrategy> make_strategy(std::string_view variant,
                                              const AnalysisContext& ctx,
                                              const TaskSet& set, const LoIndex& lo);

}  // namespace fmc
