#include "fmc/analysis.hpp"

#include <algorithm>

namespace fmc {

Rat compute_x(const TaskSet& set) {
  if (set.hi_count() == 0)
    throw input_error("FMC analysis needs at least one HI task");
  if (set.u_lo_lo() >= 1)
    throw infeasible_error("u_LO^LO >= 1: not schedulable in LO mode");
  return Rat(set.u_hi_lo() / (1 - set.u_lo_lo()));
}

bool lo_mode_test(const TaskSet& set, const Rat& x) {
  if (x <= 0 || x >= 1)
    throw input_error("virtual-deadline factor must lie in (0,1), got " + rat_to_string(x));
  return set.u_lo_lo() + set.u_hi_lo() / x <= 1;
}

AnalysisContext build_context(const TaskSet& set, const Rat& x,
                              std::optional<Rat> u_lo_man_override) {
  if (!lo_mode_test(set, x))
    throw infeasible_error("LO-mode test fails at x = " + rat_to_string(x));
  AnalysisContext ctx;
  ctx.x = x;
  ctx.u_lo_man = u_lo_man_override ? *u_lo_man_override : set.u_lo_man();
  ctx.phi.assign(set.size(), Rat(0));
  ctx.is_compensation.assign(set.size(), false);
  const Rat slack = 1 - set.u_lo_lo();
  for (std::size_t i = 0; i < set.size(); ++i) {
    const McTask& t = set[i];
    if (!t.is_hi()) continue;
    ctx.phi[i] = t.u_lo() / set.u_hi_lo() * slack - t.u_hi();
    if (ctx.phi[i] > 0) {
      ctx.margin_set.push_back(i);
    } else {
      ctx.compensation_set.push_back(i);
      ctx.is_compensation[i] = true;
    }
  }
  return ctx;
}

bool feasibility_test(const AnalysisContext& ctx, const TaskSet& set) {
  Rat lhs = (1 - ctx.x) * (set.u_lo_lo() - ctx.u_lo_man);
  for (std::size_t i : ctx.compensation_set) lhs += ctx.phi[i];
  return lhs >= 0;
}

Rat direct_utilization_bound_by_index(const AnalysisContext& ctx, const TaskSet& set,
                                      const std::vector<std::size_t>& switched) {
  Rat sum = 0;
  for (std::size_t i : switched) {
    if (i >= set.size() || !set[i].is_hi())
      throw input_error("switched set contains a non-HI task index");
    if (ctx.is_compensation[i]) sum += ctx.phi[i];
  }
  return Rat(set.u_lo_lo() + sum / (1 - ctx.x));
}

Rat direct_utilization_bound(const AnalysisContext& ctx, const TaskSet& set,
                             const std::vector<std::string>& switched_ids) {
  std::vector<std::size_t> idx;
  idx.reserve(switched_ids.size());
  for (const std::string& id : switched_ids) idx.push_back(set.index_of(id));
  return direct_utilization_bound_by_index(ctx, set, idx);
}

Rat per_switch_reduction_bound_by_index(const AnalysisContext& ctx, std::size_t task_index) {
  return Rat(ctx.phi[task_index] / (1 - ctx.x));
}

Rat per_switch_reduction_bound(const AnalysisContext& ctx, const TaskSet& set,
                               const std::string& overrun_id) {
  std::size_t i = set.index_of(overrun_id);
  if (!set[i].is_hi())
    throw input_error("task '" + overrun_id + "' is not a HI task");
  return per_switch_reduction_bound_by_index(ctx, i);
}

bool validate_service_assignment(const AnalysisContext& ctx, const TaskSet& set,
                                 const std::map<std::string, Rat>& prev_z,
                                 const std::map<std::string, Rat>& new_z,
                                 const std::string& overrun_id) {
  std::size_t overrun_index = set.index_of(overrun_id);
  if (!set[overrun_index].is_hi())
    throw input_error("overrun task '" + overrun_id + "' is not a HI task");
  if (prev_z.size() != set.lo_count() || new_z.size() != set.lo_count())
    throw input_error("service maps must cover exactly the LO tasks");

  Rat u_prev = 0, u_new = 0;
  for (const McTask& t : set.tasks()) {
    if (t.is_hi()) continue;
    auto pit = prev_z.find(t.id);
    auto nit = new_z.find(t.id);
    if (pit == prev_z.end() || nit == new_z.end())
      throw input_error("service maps are missing LO task '" + t.id + "'");
    const Rat& zp = pit->second;
    const Rat& zn = nit->second;
    if (zp < 0 || zp > 1 || zn < 0 || zn > 1)
      throw input_error("service levels must lie in [0,1]");
    if (zn > zp) return false;             // levels may never rise mid-window
    if (zn < t.z_mandatory) return false;  // mandatory floor
    u_prev += zp * t.u_lo();
    u_new += zn * t.u_lo();
  }
  return u_new <= u_prev + per_switch_reduction_bound_by_index(ctx, overrun_index);
}

bool classic_edfvd_test(const TaskSet& set) {
  if (set.u_lo_lo() + set.u_hi_hi() <= 1) return true;  // plain worst-case EDF
  if (set.u_lo_lo() >= 1) return false;
  Rat x = set.u_hi_lo() / (1 - set.u_lo_lo());
  return x * set.u_lo_lo() + set.u_hi_hi() <= 1;
}

std::vector<Rat> worst_case_bounds_per_k(const AnalysisContext& ctx, const TaskSet& set) {
  std::vector<Rat> phis;
  for (std::size_t i : ctx.compensation_set) phis.push_back(ctx.phi[i]);
  std::sort(phis.begin(), phis.end());
  std::vector<Rat> bounds;
  Rat u = set.u_lo_lo();
  bounds.push_back(u);
  for (std::size_t k = 1; k <= set.hi_count(); ++k) {
    if (k <= phis.size()) u += phis[k - 1] / (1 - ctx.x);
    bounds.push_back(u);
  }
  return bounds;
}

}  // namespace fmc
