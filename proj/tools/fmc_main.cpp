#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "fmc/experiments.hpp"
#include "fmc/version.hpp"

namespace {

using namespace fmc;

// Exit codes: 0 success, 1 schedulability test negative (analyze),
// 2 input/validation error, 3 internal consistency failure.
constexpr int kExitNegative = 1;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

TaskSet load_checked(const std::string& path) {
  TaskSet set = load_task_set(path);
  ValidationReport report = validate_task_set(set);
  if (!report.ok()) {
    std::string msg = "invalid task set '" + path + "':";
    for (const std::string& v : report.violations) msg += "\n  - " + v;
    throw input_error(msg);
  }
  return set;
}

int cmd_analyze(const std::string& taskset_path, const std::string& u_man_text,
                const std::string& format) {
  TaskSet set = load_checked(taskset_path);
  std::optional<Rat> u_man;
  if (!u_man_text.empty()) u_man = rat_from_string(u_man_text);

  nlohmann::json out;
  out["taskset"] = taskset_path;
  out["u_lo_lo"] = rat_to_string(set.u_lo_lo());
  out["u_hi_lo"] = rat_to_string(set.u_hi_lo());
  out["u_hi_hi"] = rat_to_string(set.u_hi_hi());
  out["u_lo_man"] = rat_to_string(u_man ? *u_man : set.u_lo_man());
  out["classic_edfvd"] = classic_edfvd_test(set);
  out["plain_edf_note"] =
      set.u_lo_lo() + set.u_hi_hi() <= 1
          ? "schedulable by plain worst-case EDF (u_LO^LO + u_HI^HI <= 1)"
          : nullptr;

  bool feasible = false;
  try {
    Rat x = compute_x(set);
    out["x"] = rat_to_double(x);
    out["x_exact"] = rat_to_string(x);
    if (x > 0 && x < 1) {
      AnalysisContext ctx = build_context(set, x, u_man);
      bool lo_ok = lo_mode_test(set, x);
      bool run_ok = feasibility_test(ctx, set);
      feasible = lo_ok && run_ok;
      out["lo_mode_test"] = lo_ok;
      out["feasibility_test"] = run_ok;
      nlohmann::json phi = nlohmann::json::object();
      nlohmann::json margin = nlohmann::json::array();
      nlohmann::json compensation = nlohmann::json::array();
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (!set[i].is_hi()) continue;
        phi[set[i].id] = rat_to_string(ctx.phi[i]);
      }
      for (std::size_t i : ctx.margin_set) margin.push_back(set[i].id);
      for (std::size_t i : ctx.compensation_set) compensation.push_back(set[i].id);
      out["phi"] = std::move(phi);
      out["margin_set"] = std::move(margin);
      out["compensation_set"] = std::move(compensation);
      nlohmann::json bounds = nlohmann::json::array();
      for (const Rat& b : worst_case_bounds_per_k(ctx, set))
        bounds.push_back(rat_to_string(b));
      out["u_lo_k_bounds"] = std::move(bounds);
      out["static_degradation_level"] =
          set.lo_count() > 0 ? nlohmann::json(rat_to_string(static_degradation_level(ctx, set)))
                             : nlohmann::json();
    } else {
      out["lo_mode_test"] = false;
      out["feasibility_test"] = false;
      out["note"] = "x outside (0,1): u_LO^LO + u_HI^LO >= 1";
    }
  } catch (const infeasible_error& e) {
    out["lo_mode_test"] = false;
    out["feasibility_test"] = false;
    out["note"] = e.what();
  }
  out["fmc_schedulable"] = feasible;

  if (format == "text") {
    std::cout << "u_LO^LO = " << out["u_lo_lo"].get<std::string>()
              << ", u_HI^LO = " << out["u_hi_lo"].get<std::string>()
              << ", u_HI^HI = " << out["u_hi_hi"].get<std::string>() << "\n";
    if (out.contains("x_exact"))
      std::cout << "x = " << out["x_exact"].get<std::string>() << "\n";
    std::cout << "FMC schedulable: " << (feasible ? "yes" : "no") << "\n"
              << "classic EDF-VD:  " << (out["classic_edfvd"].get<bool>() ? "yes" : "no")
              << "\n";
  } else {
    std::cout << out.dump(2) << "\n";
  }
  return feasible ? 0 : kExitNegative;
}

int cmd_generate(const std::string& u_bound, long count, std::uint64_t seed,
                 const std::string& out_dir, GeneratorParams params) {
  params.u_bound = rat_from_string(u_bound);
  std::filesystem::create_directories(out_dir);
  for (long i = 0; i < count; ++i) {
    params.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    TaskSet set = generate_task_set(params);
    char name[64];
    std::snprintf(name, sizeof name, "taskset_%04ld.json", i);
    save_task_set(set, out_dir + "/" + name);
  }
  std::cerr << "wrote " << count << " task sets to " << out_dir << "\n";
  return 0;
}

int cmd_trace(const std::string& taskset_path, const std::string& horizon_text,
              double overrun_prob, std::uint64_t seed, const std::string& out_path,
              double jitter) {
  TaskSet set = load_checked(taskset_path);
  WorkloadTrace trace =
      generate_trace(set, rat_from_string(horizon_text), overrun_prob, seed, jitter);
  save_trace(set, trace, out_path);
  std::cerr << "wrote " << trace.jobs.size() << " jobs to " << out_path << "\n";
  return 0;
}

int cmd_simulate(const std::string& taskset_path, const std::string& trace_path,
                 const std::string& strategy, const std::string& report_path,
                 const std::string& events_path, bool no_samples) {
  TaskSet set = load_checked(taskset_path);
  WorkloadTrace trace = load_trace(set, trace_path);
  Rat x = compute_x(set);
  if (x <= 0 || x >= 1)
    throw input_error("task set is not schedulable in LO mode (x outside (0,1))");
  AnalysisContext ctx = build_context(set, x);
  if ((strategy == "uniform" || strategy == "drop") && !feasibility_test(ctx, set))
    throw input_error("task set fails the run-time feasibility test");

  SimOptions options;
  options.collect_samples = !no_samples;
  std::ofstream events;
  if (!events_path.empty()) {
    events.open(events_path);
    if (!events) throw input_error("cannot write event log '" + events_path + "'");
    options.sink = [&events](const nlohmann::json& e) { events << e.dump() << "\n"; };
  }

  SimReport report = simulate(set, ctx, trace, strategy, options);
  nlohmann::json j = report.to_json(set);
  if (report_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(report_path);
    if (!out) throw input_error("cannot write report '" + report_path + "'");
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out_dir,
                   int jobs_override) {
  std::ifstream in(config_path);
  if (!in) throw input_error("cannot open config '" + config_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad JSON in '" + config_path + "': " + e.what());
  }
  ExperimentConfig config = ExperimentConfig::from_json(j);
  if (jobs_override > 0) config.jobs = jobs_override;
  ExperimentResult result = run_experiment(config);
  result.write(out_dir);
  std::cerr << "results written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedulability analysis and run-time simulation for flexible "
               "mixed-criticality task sets under EDF-VD"};
  app.set_version_flag("--version", std::string("fmc ") + fmc::kVersion +
                                        " (rng: " + fmc::kRngName + ")");
  app.require_subcommand(1);

  std::string taskset_path, trace_path, out_path, format = "json";
  std::string u_man_text, u_bound_text, horizon_text = "1000000";
  std::string strategy = "uniform", report_path, events_path, config_path;
  std::uint64_t seed = 0;
  long count = 1;
  double overrun_prob = 0.1, jitter = 0.0;
  bool no_samples = false;
  int jobs = 0;
  fmc::GeneratorParams gen_params;

  auto* analyze = app.add_subcommand("analyze", "off-line schedulability tests");
  analyze->add_option("--taskset", taskset_path, "task set JSON")->required();
  analyze->add_option("--u-man", u_man_text, "override mandatory utilization (rational)");
  analyze->add_option("--format", format, "json|text")
      ->check(CLI::IsMember({"json", "text"}));

  auto* generate = app.add_subcommand("generate", "random task-set generation");
  generate->add_option("--u-bound", u_bound_text, "target utilization bound")->required();
  generate->add_option("--count", count, "number of task sets");
  generate->add_option("--seed", seed, "master seed");
  generate->add_option("--out", out_path, "output directory")->required();
  generate->add_option("--period-min", gen_params.period_min);
  generate->add_option("--period-max", gen_params.period_max);
  generate->add_option("--u-lo-min", gen_params.u_lo_min);
  generate->add_option("--u-lo-max", gen_params.u_lo_max);
  generate->add_option("--ratio-min", gen_params.ratio_min);
  generate->add_option("--ratio-max", gen_params.ratio_max);
  generate->add_option("--p-cri", gen_params.p_cri);
  generate->add_option("--min-hi", gen_params.min_hi_tasks);

  auto* trace = app.add_subcommand("trace", "pre-generate a workload trace");
  trace->add_option("--taskset", taskset_path, "task set JSON")->required();
  trace->add_option("--horizon", horizon_text, "trace horizon (rational)");
  trace->add_option("--overrun-prob", overrun_prob, "per-HI-job overrun probability");
  trace->add_option("--seed", seed, "trace seed");
  trace->add_option("--out", out_path, "output trace JSON")->required();
  trace->add_option("--arrival-jitter", jitter,
                    "sporadic slack: stretch gaps by up to this fraction");

  auto* simulate_cmd = app.add_subcommand("simulate", "run one trace");
  simulate_cmd->add_option("--taskset", taskset_path, "task set JSON")->required();
  simulate_cmd->add_option("--trace", trace_path, "trace JSON")->required();
  simulate_cmd->add_option("--strategy", strategy, "uniform|drop|static")
      ->check(CLI::IsMember({"uniform", "drop", "static"}));
  simulate_cmd->add_option("--report", report_path, "report JSON (default: stdout)");
  simulate_cmd->add_option("--emit-events", events_path, "NDJSON event log");
  simulate_cmd->add_flag("--no-samples", no_samples, "skip service-level samples");

  auto* experiment = app.add_subcommand("experiment", "batch experiment from config");
  experiment->add_option("--config", config_path, "experiment config JSON")->required();
  experiment->add_option("--out", out_path, "output directory")->required();
  experiment->add_option("--jobs", jobs, "worker threads");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(taskset_path, u_man_text, format);
    if (generate->parsed())
      return cmd_generate(u_bound_text, count, seed, out_path, gen_params);
    if (trace->parsed())
      return cmd_trace(taskset_path, horizon_text, overrun_prob, seed, out_path, jitter);
    if (simulate_cmd->parsed())
      return cmd_simulate(taskset_path, trace_path, strategy, report_path, events_path,
                          no_samples);
    if (experiment->parsed()) return cmd_experiment(config_path, out_path, jobs);
  } catch (const fmc::internal_error& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const fmc::input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const fmc::infeasible_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return 0;
}
