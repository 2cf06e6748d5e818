#include "fmc/tuning.hpp"

#include <algorithm>

namespace fmc {

LoIndex::LoIndex(const TaskSet& set) : pos(set.size(), -1) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (!set[i].is_hi()) {
      pos[i] = static_cast<std::ptrdiff_t>(tasks.size());
      tasks.push_back(i);
    }
  }
}

ModeState::ModeState(const TaskSet& set, const LoIndex& lo) { reset(set, lo); }

void ModeState::reset(const TaskSet& set, const LoIndex& lo) {
  k = 0;
  switched.clear();
  z.assign(lo.count(), Rat(1));
  u_lo_k = set.u_lo_lo();
}

std::map<std::string, Rat> ModeState::z_by_id(const TaskSet& set, const LoIndex& lo) const {
  std::map<std::string, Rat> m;
  for (std::size_t p = 0; p < lo.count(); ++p) m[set[lo.tasks[p]].id] = z[p];
  return m;
}

Rat uniform_next_level(const AnalysisContext& ctx, const TaskSet& set,
                       const Rat& z_prev, const std::string& overrun_id) {
  if (z_prev < 0 || z_prev > 1)
    throw input_error("z_prev must lie in [0,1]");
  if (set.u_lo_lo() == 0)
    throw input_error("uniform tuning is vacuous without LO tasks");
  Rat delta = per_switch_reduction_bound(ctx, set, overrun_id) / set.u_lo_lo();
  if (delta > 0) delta = 0;
  Rat z = z_prev + delta;
  if (z < 0) z = 0;
  return z;
}

Rat static_degradation_level(const AnalysisContext& ctx, const TaskSet& set) {
  if (set.u_lo_lo() == 0)
    throw input_error("static degradation is vacuous without LO tasks");
  Rat sum = 0;
  for (std::size_t i : ctx.compensation_set) sum += ctx.phi[i];
  Rat z = 1 + sum / ((1 - ctx.x) * set.u_lo_lo());
  if (z < 0) z = 0;
  if (z > 1) z = 1;
  return z;
}

DropTable::DropTable(const AnalysisContext& ctx, const TaskSet& set) : set_(set) {
  (void)ctx;
  for (std::size_t i = 0; i < set.size(); ++i)
    if (!set[i].is_hi()) order_.push_back(i);
  std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
    return set[a].u_lo() < set[b].u_lo();
  });
  reset();
}

void DropTable::reset() {
  mass_.assign(order_.size(), Rat(0));
  tree_.assign(order_.size() + 1, Rat(0));
  dropped_.clear();
  total_ = 0;
  for (std::size_t p = 0; p < order_.size(); ++p) {
    const McTask& t = set_[order_[p]];
    Rat m = (1 - t.z_mandatory) * t.u_lo();
    mass_[p] = m;
    total_ += m;
    for (std::size_t i = p + 1; i <= order_.size(); i += i & (~i + 1)) tree_[i] += m;
  }
}

Rat DropTable::prefix_sum(std::size_t count) const {
  Rat s = 0;
  for (std::size_t i = count; i > 0; i -= i & (~i + 1)) s += tree_[i];
  return s;
}

std::vector<std::size_t> DropTable::drop_for(const Rat& needed) {
  std::vector<std::size_t> dropped;
  if (needed <= 0) return dropped;
  if (total_ < needed)
    throw internal_error("dropping-off: droppable utilization exhausted (feasibility violated)");

  // Fenwick descent: smallest prefix whose droppable mass reaches `needed`.
  std::size_t top = 1;
  while (top * 2 <= order_.size()) top *= 2;
  std::size_t idx = 0;
  Rat acc = 0;
  for (std::size_t step = top; step > 0; step /= 2) {
    std::size_t next = idx + step;
    if (next <= order_.size() && acc + tree_[next] < needed) {
      acc += tree_[next];
      idx = next;
    }
  }
  std::size_t cut = idx;  // prefix [0, cut] covers `needed`

  for (std::size_t p = 0; p <= cut && p < order_.size(); ++p) {
    if (mass_[p] == 0) continue;  // already dropped in this window
    total_ -= mass_[p];
    Rat neg = -mass_[p];
    for (std::size_t i = p + 1; i <= order_.size(); i += i & (~i + 1)) tree_[i] += neg;
    mass_[p] = 0;
    dropped_.push_back(p);
    dropped.push_back(order_[p]);
  }
  return dropped;
}

std::map<std::string, Rat> dropping_off_next(const AnalysisContext& ctx, const TaskSet& set,
                                             const ModeState& state,
                                             const std::string& overrun_id,
                                             const std::vector<std::string>& sorted_table) {
  if (sorted_table.size() != set.lo_count())
    throw input_error("sorted table must list exactly the LO tasks");
  for (std::size_t i = 1; i < sorted_table.size(); ++i) {
    if (set[set.index_of(sorted_table[i - 1])].u_lo() >
        set[set.index_of(sorted_table[i])].u_lo())
      throw input_error("sorted table must be ascending by u^LO");
  }

  std::size_t overrun_index = set.index_of(overrun_id);
  std::vector<std::size_t> switched;
  for (const auto& [task, time] : state.switched) switched.push_back(task);
  switched.push_back(overrun_index);
  Rat bound = direct_utilization_bound_by_index(ctx, set, switched);
  Rat needed = state.u_lo_k - bound;  // net of utilization already shed

  LoIndex lo(set);
  std::map<std::string, Rat> z = state.z_by_id(set, lo);
  if (needed <= 0) return z;

  Rat shed = 0;
  for (const std::string& id : sorted_table) {
    if (shed >= needed) break;
    const McTask& t = set[set.index_of(id)];
    Rat cur = z.at(id);
    if (cur <= t.z_mandatory) continue;
    shed += (cur - t.z_mandatory) * t.u_lo();
    z[id] = t.z_mandatory;
  }
  if (shed < needed)
    throw internal_error("dropping-off: droppable utilization exhausted (feasibility violated)");
  return z;
}

namespace {

class UniformStrategy final : public TuningStrategy {
 public:
  UniformStrategy(const AnalysisContext& ctx, const TaskSet& set, const LoIndex& lo)
      : ctx_(ctx), set_(set), lo_(lo) {
    for (std::size_t i : lo.tasks)
      if (set[i].z_mandatory != 0)
        throw input_error("uniform tuning does not support mandatory service floors");
    reset();
  }

  std::string_view name() const override { return "uniform"; }
  void reset() override { z_ = 1; }

  std::vector<ZChange> on_mode_switch(const ModeState&, std::size_t overrun_task) override {
    if (lo_.count() == 0) return {};
    Rat delta = per_switch_reduction_bound_by_index(ctx_, overrun_task) / set_.u_lo_lo();
    if (delta >= 0) return {};
    z_ += delta;
    if (z_ < 0) z_ = 0;
    std::vector<ZChange> changes;
    changes.reserve(lo_.count());
    for (std::size_t p = 0; p < lo_.count(); ++p) changes.push_back({p, z_});
    return changes;
  }

 private:
  const AnalysisContext& ctx_;
  const TaskSet& set_;
  const LoIndex& lo_;
  Rat z_;
};

class DroppingOffStrategy final : public TuningStrategy {
 public:
  DroppingOffStrategy(const AnalysisContext& ctx, const TaskSet& set, const LoIndex& lo)
      : ctx_(ctx), set_(set), lo_(lo), table_(ctx, set) {
    reset();
  }

  std::string_view name() const override { return "drop"; }

  void reset() override {
    table_.reset();
    bound_ = set_.u_lo_lo();
    shed_ = 0;
  }

  std::vector<ZChange> on_mode_switch(const ModeState&, std::size_t overrun_task) override {
    Rat delta = per_switch_reduction_bound_by_index(ctx_, overrun_task);
    if (delta < 0) bound_ += delta;
    Rat needed = (set_.u_lo_lo() - shed_) - bound_;
    std::vector<ZChange> changes;
    for (std::size_t task : table_.drop_for(needed)) {
      const McTask& t = set_[task];
      shed_ += (1 - t.z_mandatory) * t.u_lo();
      changes.push_back({static_cast<std::size_t>(lo_.pos[task]), t.z_mandatory});
    }
    return changes;
  }

 private:
  const AnalysisContext& ctx_;
  const TaskSet& set_;
  const LoIndex& lo_;
  DropTable table_;
  Rat bound_;  // closed-form admissible utilization for the switched set
  Rat shed_;   // utilization already taken away from LO tasks
};

// Global-trigger baseline: the first overrun of the window degrades every
// LO task to the precomputed worst-case level; later overruns change
// nothing until the window ends.
class StaticDegradationStrategy final : public TuningStrategy {
 public:
  StaticDegradationStrategy(const AnalysisContext& ctx, const TaskSet& set, const LoIndex& lo)
      : lo_(lo), level_(lo.count() > 0 ? static_degradation_level(ctx, set) : Rat(1)) {
    for (std::size_t i : lo.tasks)
      if (set[i].z_mandatory != 0)
        throw input_error("static degradation does not support mandatory service floors");
    reset();
  }

  std::string_view name() const override { return "static"; }
  void reset() override { triggered_ = false; }

  std::vector<ZChange> on_mode_switch(const ModeState&, std::size_t) override {
    if (triggered_) return {};
    triggered_ = true;
    std::vector<ZChange> changes;
    changes.reserve(lo_.count());
    for (std::size_t p = 0; p < lo_.count(); ++p) changes.push_back({p, level_});
    return changes;
  }

 private:
  const LoIndex& lo_;
  Rat level_;
  bool triggered_ = false;
};

}  // namespace

std::unique_ptr<TuningStrategy> make_strategy(std::string_view variant,
                                              const AnalysisContext& ctx,
                                              const TaskSet& set, const LoIndex& lo) {
  if (variant == "uniform") return std::make_unique<UniformStrategy>(ctx, set, lo);
  if (variant == "drop") return std::make_unique<DroppingOffStrategy>(ctx, set, lo);
  if (variant == "static") return std::make_unique<StaticDegradationStrategy>(ctx, set, lo);
  throw input_error("unknown strategy '" + std::string(variant) +
                    "' (expected uniform, drop, or static)");
}

}  // namespace fmc
