#include "fmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace fmc {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return 0.0;
  double pos = p * static_cast<double>(sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

// Off-line admission shared by all tuning schemes: LO-mode test at the
// prescribed x plus the run-time feasibility condition.
bool fmc_gate(const TaskSet& set, std::optional<AnalysisContext>& ctx_out) {
  if (set.hi_count() == 0) return false;
  if (set.u_lo_lo() >= 1) return false;
  Rat x = compute_x(set);
  if (x <= 0 || x >= 1) return false;
  AnalysisContext ctx = build_context(set, x);
  if (!lo_mode_test(set, x)) return false;
  if (!feasibility_test(ctx, set)) return false;
  ctx_out = std::move(ctx);
  return true;
}

struct SlotResult {
  bool generated = false;
  bool accepted = false;  // same Thm-5 gate for every scheme
  std::vector<double> pfj;  // per strategy
  std::vector<double> ctx_switches;
  std::vector<std::pair<int, float>> degraded;  // (k, level) from uniform run
};

}  // namespace

void ExperimentConfig::validate() const {
  if (u_bounds.empty()) throw input_error("experiment needs at least one u_bound");
  if (sets_per_bound < 1) throw input_error("sets_per_bound must be positive");
  if (horizon <= 0) throw input_error("horizon must be positive");
  if (strategies.empty()) throw input_error("experiment needs at least one strategy");
  if (overrun_prob < 0 || overrun_prob > 1)
    throw input_error("overrun_prob must lie in [0,1]");
  if (jobs < 1) throw input_error("jobs must be positive");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (!j.contains("u_bounds")) throw input_error("experiment config needs 'u_bounds'");
  for (const auto& b : j["u_bounds"]) c.u_bounds.push_back(rat_from_json(b));
  c.sets_per_bound = j.value("sets_per_bound", c.sets_per_bound);
  if (j.contains("horizon")) c.horizon = rat_from_json(j["horizon"]);
  c.overrun_prob = j.value("overrun_prob", c.overrun_prob);
  if (j.contains("strategies"))
    c.strategies = j["strategies"].get<std::vector<std::string>>();
  c.master_seed = j.value("master_seed", c.master_seed);
  c.jobs = j.value("jobs", c.jobs);
  if (j.contains("generator")) {
    const auto& g = j["generator"];
    c.generator.period_min = g.value("period_min", c.generator.period_min);
    c.generator.period_max = g.value("period_max", c.generator.period_max);
    c.generator.u_lo_min = g.value("u_lo_min", c.generator.u_lo_min);
    c.generator.u_lo_max = g.value("u_lo_max", c.generator.u_lo_max);
    c.generator.ratio_min = g.value("ratio_min", c.generator.ratio_min);
    c.generator.ratio_max = g.value("ratio_max", c.generator.ratio_max);
    c.generator.p_cri = g.value("p_cri", c.generator.p_cri);
    c.generator.min_hi_tasks = g.value("min_hi_tasks", c.generator.min_hi_tasks);
    c.generator.retry_budget = g.value("retry_budget", c.generator.retry_budget);
  }
  c.validate();
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json bounds = nlohmann::json::array();
  for (const Rat& b : u_bounds) bounds.push_back(rat_to_json(b));
  return {{"u_bounds", std::move(bounds)},
          {"sets_per_bound", sets_per_bound},
          {"horizon", rat_to_json(horizon)},
          {"overrun_prob", overrun_prob},
          {"strategies", strategies},
          {"master_seed", master_seed},
          {"jobs", jobs},
          {"generator",
           {{"period_min", generator.period_min},
            {"period_max", generator.period_max},
            {"u_lo_min", generator.u_lo_min},
            {"u_lo_max", generator.u_lo_max},
            {"ratio_min", generator.ratio_min},
            {"ratio_max", generator.ratio_max},
            {"p_cri", generator.p_cri},
            {"min_hi_tasks", generator.min_hi_tasks},
            {"retry_budget", generator.retry_budget}}}};
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::size_t n_bounds = config.u_bounds.size();
  const std::size_t n_strats = config.strategies.size();
  const long per_bound = config.sets_per_bound;

  bool want_degradation =
      std::find(config.strategies.begin(), config.strategies.end(), "uniform") !=
      config.strategies.end();

  std::vector<SlotResult> slots(n_bounds * per_bound);

  auto work_on = [&](std::size_t slot) {
    std::size_t bi = slot / per_bound;
    std::size_t si = slot % per_bound;
    SlotResult& out = slots[slot];
    out.pfj.assign(n_strats, 0.0);
    out.ctx_switches.assign(n_strats, 0.0);

    GeneratorParams gen = config.generator;
    gen.u_bound = config.u_bounds[bi];
    std::optional<TaskSet> set;
    for (std::uint64_t attempt = 0; attempt < 8 && !set; ++attempt) {
      gen.seed = mix_seed(config.master_seed, (bi << 32) | si, attempt);
      try {
        set = generate_task_set(gen);
      } catch (const input_error&) {
        // retry budget exhausted for this seed; mix in the attempt counter
      }
    }
    if (!set) return;  // generation failure recorded as an empty slot
    out.generated = true;

    std::optional<AnalysisContext> ctx;
    out.accepted = fmc_gate(*set, ctx);
    if (!out.accepted) return;

    WorkloadTrace trace = generate_trace(
        *set, config.horizon, config.overrun_prob,
        mix_seed(config.master_seed, 0x7472616365ULL /* "trace" */, slot));
    PreparedTrace prepared(*set, *ctx, trace);
    LoIndex lo(*set);

    for (std::size_t st = 0; st < n_strats; ++st) {
      auto strategy = make_strategy(config.strategies[st], *ctx, *set, lo);
      SimOptions options;
      options.collect_mode_events = false;
      options.collect_samples =
          want_degradation && config.strategies[st] == "uniform";
      SimReport report = simulate(prepared, *strategy, options);
      out.pfj[st] = report.pfj();
      out.ctx_switches[st] = static_cast<double>(report.context_switches);
      if (options.collect_samples) {
        for (const SampleRecord& s : report.samples)
          if (s.value < 1)
            out.degraded.emplace_back(s.k, static_cast<float>(rat_to_double(s.value)));
      }
    }
  };

  if (config.jobs <= 1) {
    for (std::size_t slot = 0; slot < slots.size(); ++slot) work_on(slot);
  } else {
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < config.jobs; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t slot = cursor.fetch_add(1);
          if (slot >= slots.size()) break;
          work_on(slot);
        }
      });
    for (auto& th : pool) th.join();
  }

  ExperimentResult result;
  result.config = config;
  result.cells.assign(n_bounds, std::vector<StrategyCell>(n_strats));
  std::map<int, std::vector<double>> degraded_by_k;
  long total_degraded = 0;

  for (std::size_t bi = 0; bi < n_bounds; ++bi) {
    for (std::size_t st = 0; st < n_strats; ++st) {
      StrategyCell& cell = result.cells[bi][st];
      for (long si = 0; si < per_bound; ++si) {
        const SlotResult& slot = slots[bi * per_bound + si];
        if (!slot.generated) continue;
        ++cell.sets;
        if (!slot.accepted) continue;
        ++cell.accepted;
        ++cell.simulated;
        cell.mean_pfj += slot.pfj[st];
        cell.mean_context_switches += slot.ctx_switches[st];
      }
      if (cell.simulated > 0) {
        cell.mean_pfj /= static_cast<double>(cell.simulated);
        cell.mean_context_switches /= static_cast<double>(cell.simulated);
      }
    }
  }
  for (const SlotResult& slot : slots)
    for (const auto& [k, level] : slot.degraded) {
      degraded_by_k[k].push_back(level);
      ++total_degraded;
    }
  for (auto& [k, values] : degraded_by_k) {
    std::sort(values.begin(), values.end());
    DegradationRow row;
    row.k = k;
    row.count = static_cast<long>(values.size());
    row.min = values.front();
    row.q1 = quantile(values, 0.25);
    row.median = quantile(values, 0.5);
    row.q3 = quantile(values, 0.75);
    row.max = values.back();
    row.job_share = total_degraded == 0
                        ? 0.0
                        : static_cast<double>(values.size()) /
                              static_cast<double>(total_degraded);
    result.degradation.push_back(row);
  }
  return result;
}

nlohmann::json ExperimentResult::to_json() const {
  nlohmann::json cells_json = nlohmann::json::array();
  for (std::size_t bi = 0; bi < cells.size(); ++bi)
    for (std::size_t st = 0; st < cells[bi].size(); ++st) {
      const StrategyCell& c = cells[bi][st];
      cells_json.push_back({{"u_bound", rat_to_json(config.u_bounds[bi])},
                            {"strategy", config.strategies[st]},
                            {"sets", c.sets},
                            {"accepted", c.accepted},
                            {"simulated", c.simulated},
                            {"acceptance_ratio", c.acceptance_ratio()},
                            {"mean_pfj", c.mean_pfj},
                            {"mean_context_switches", c.mean_context_switches}});
    }
  nlohmann::json deg = nlohmann::json::array();
  for (const DegradationRow& r : degradation)
    deg.push_back({{"k", r.k},
                   {"count", r.count},
                   {"min", r.min},
                   {"q1", r.q1},
                   {"median", r.median},
                   {"q3", r.q3},
                   {"max", r.max},
                   {"job_share", r.job_share}});
  return {{"config", config.to_json()}, {"cells", std::move(cells_json)},
          {"degradation", std::move(deg)}};
}

std::string ExperimentResult::summary_csv() const {
  std::string csv = "u_bound,strategy,acceptance_ratio,mean_pfj,mean_ctx_switches\n";
  for (std::size_t bi = 0; bi < cells.size(); ++bi)
    for (std::size_t st = 0; st < cells[bi].size(); ++st) {
      const StrategyCell& c = cells[bi][st];
      csv += fmt6(rat_to_double(config.u_bounds[bi])) + "," + config.strategies[st] +
             "," + fmt6(c.acceptance_ratio()) + "," + fmt6(c.mean_pfj) + "," +
             fmt6(c.mean_context_switches) + "\n";
    }
  return csv;
}

std::string ExperimentResult::degradation_csv() const {
  std::string csv = "k,min,q1,median,q3,max,job_share\n";
  for (const DegradationRow& r : degradation)
    csv += std::to_string(r.k) + "," + fmt6(r.min) + "," + fmt6(r.q1) + "," +
           fmt6(r.median) + "," + fmt6(r.q3) + "," + fmt6(r.max) + "," +
           fmt6(r.job_share) + "\n";
  return csv;
}

void ExperimentResult::write(const std::string& out_dir) const {
  std::filesystem::create_directories(out_dir);
  auto dump = [&](const std::string& name, const std::string& text) {
    std::ofstream out(out_dir + "/" + name);
    if (!out) throw input_error("cannot write '" + out_dir + "/" + name + "'");
    out << text;
  };
  dump("summary.csv", summary_csv());
  dump("degradation.csv", degradation_csv());
  dump("result.json", to_json().dump(2) + "\n");
}

DegradationProfile degradation_profile(const TaskSet& set, const AnalysisContext& ctx,
                                       const std::vector<WorkloadTrace>& traces) {
  DegradationProfile profile;
  if (set.u_lo_lo() == 0)
    throw input_error("degradation profile needs LO tasks");

  std::vector<Rat> bounds = worst_case_bounds_per_k(ctx, set);
  for (const Rat& b : bounds) {
    Rat z = b / set.u_lo_lo();
    if (z < 0) z = 0;
    profile.z_line.push_back(z);
  }

  LoIndex lo(set);
  for (const WorkloadTrace& trace : traces) {
    PreparedTrace prepared(set, ctx, trace);
    auto strategy = make_strategy("uniform", ctx, set, lo);
    SimOptions options;
    options.collect_mode_events = false;
    SimReport report = simulate(prepared, *strategy, options);
    for (const SampleRecord& s : report.samples) {
      const Rat& lower = profile.z_line[static_cast<std::size_t>(s.k)];
      if (s.value < lower || s.value > 1) {
        profile.bounds_ok = false;
        if (profile.first_violation.empty())
          profile.first_violation = "sample " + rat_to_string(s.value) + " at k=" +
                                    std::to_string(s.k) + " outside [z^k, 1]";
      }
      if (s.suspended && s.k >= 1) {
        const Rat& upper = profile.z_line[static_cast<std::size_t>(s.k - 1)];
        if (s.value >= upper) {
          profile.suspended_ok = false;
          if (profile.first_violation.empty())
            profile.first_violation = "suspended sample " + rat_to_string(s.value) +
                                      " at k=" + std::to_string(s.k) +
                                      " not below z^{k-1}";
        }
      }
      profile.samples[s.k].push_back(s);
    }
  }
  return profile;
}

}  // namespace fmc
