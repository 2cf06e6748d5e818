#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmc/task.hpp"

namespace fmc {

// Off-line analysis state for one task set: the virtual-deadline factor,
// the per-HI-task discriminant phi, and its induced partition into margin
// tasks (phi > 0, overrun absorbed by slack) and compensation tasks
// (phi <= 0, overrun paid for by degrading LO service).
struct AnalysisContext {
  Rat x;                              // virtual-deadline factor, 0 < x < 1
  std::vector<Rat> phi;               // by task index; zero for LO tasks
  std::vector<std::size_t> margin_set;        // HI task indices, ascending
  std::vector<std::size_t> compensation_set;  // HI task indices, ascending
  std::vector<bool> is_compensation;  // by task index
  Rat u_lo_man;

  const Rat& phi_of(std::size_t task_index) const { return phi[task_index]; }
};

// x = u_HI^LO / (1 - u_LO^LO). Throws infeasible_error when u_LO^LO >= 1
// and input_error when the set has no HI task. The returned factor
// saturates the LO-mode utilization test with equality; it lies in (0,1)
// iff u_LO^LO + u_HI^LO < 1.
Rat compute_x(const TaskSet& set);

// LO-mode schedulability: u_LO^LO + u_HI^LO / x <= 1. Requires 0 < x < 1.
bool lo_mode_test(const TaskSet& set, const Rat& x);

// Computes phi for every HI task and partitions them. Requires that the
// LO-mode test passes at x (which also pins x to (0,1)). The mandatory
// utilization defaults to the set's aggregate and can be overridden.
AnalysisContext build_context(const TaskSet& set, const Rat& x,
                              std::optional<Rat> u_lo_man_override = std::nullopt);

// Run-time feasibility: (1 - x)(u_LO^LO - u_LO^man) + sum over the
// compensation set of phi >= 0. Guarantees that an admissible service
// assignment exists at every mode switch.
bool feasibility_test(const AnalysisContext& ctx, const TaskSet& set);

// Maximum admissible LO utilization once exactly the given HI tasks have
// overrun: u_LO^LO + (sum of phi over switched compensation tasks)/(1-x).
// Depends only on the set of switched tasks, not the overrun order.
Rat direct_utilization_bound(const AnalysisContext& ctx, const TaskSet& set,
                             const std::vector<std::string>& switched_ids);
Rat direct_utilization_bound_by_index(const AnalysisContext& ctx, const TaskSet& set,
                                      const std::vector<std::size_t>& switched);

// Signed admissible change of u_LO when this HI task overruns:
// phi / (1 - x). Negative for compensation tasks; a positive value means
// the overrun is absorbed and no reduction is required.
Rat per_switch_reduction_bound(const AnalysisContext& ctx, const TaskSet& set,
                               const std::string& overrun_id);
Rat per_switch_reduction_bound_by_index(const AnalysisContext& ctx, std::size_t task_index);

// Checks one service-level transition against the run-time test: (a) no
// service level increases, (b) the new LO utilization stays within the
// per-switch allowance of the overrunning task, and (c) no task falls
// below its mandatory floor. Both maps must cover exactly the LO tasks.
bool validate_service_assignment(const AnalysisContext& ctx, const TaskSet& set,
                                 const std::map<std::string, Rat>& prev_z,
                                 const std::map<std::string, Rat>& new_z,
                                 const std::string& overrun_id);

// Baseline: classic EDF-VD schedulability with x = u_HI^LO/(1-u_LO^LO),
// i.e. x * u_LO^LO + u_HI^HI <= 1, or total worst-case reservation
// u_LO^LO + u_HI^HI <= 1. Condition from the cited classic scheme; kept
// separate from the FMC tests.
bool classic_edfvd_test(const TaskSet& set);

// Worst-case direct bound after k overruns for k = 0..|HI|: compensation
// tasks are taken in ascending phi order, so entry k is the lowest
// admissible u_LO over all k-subsets of HI tasks.
std::vector<Rat> worst_case_bounds_per_k(const AnalysisContext& ctx, const TaskSet& set);

}  // namespace fmc
