#include "doctest.h"
#include "fixtures.hpp"
#include "fmc/experiments.hpp"

using namespace fmc;
using fixtures::table1;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig config;
  config.u_bounds = {rat_from_string("0.75"), rat_from_string("0.85")};
  config.sets_per_bound = 6;
  config.horizon = rat(20000);
  config.overrun_prob = 0.1;
  config.strategies = {"uniform", "drop", "static"};
  config.master_seed = 2718;
  return config;
}

}  // namespace

TEST_CASE("zero overrun probability gives PFJ = 100 everywhere") {
  ExperimentConfig config = tiny_config();
  config.overrun_prob = 0.0;
  ExperimentResult result = run_experiment(config);
  for (const auto& row : result.cells)
    for (const StrategyCell& cell : row)
      if (cell.simulated > 0) CHECK(cell.mean_pfj == 100.0);
}

TEST_CASE("experiment is reproducible from the master seed") {
  ExperimentConfig config = tiny_config();
  ExperimentResult a = run_experiment(config);
  ExperimentResult b = run_experiment(config);
  CHECK(a.to_json().dump() == b.to_json().dump());
  CHECK(a.summary_csv() == b.summary_csv());
}

TEST_CASE("acceptance ratios agree across schemes and PFJ favors FMC") {
  ExperimentConfig config = tiny_config();
  config.sets_per_bound = 10;
  ExperimentResult result = run_experiment(config);
  for (std::size_t bi = 0; bi < result.cells.size(); ++bi) {
    const auto& row = result.cells[bi];
    // every scheme is gated by the same off-line test
    for (std::size_t st = 1; st < row.size(); ++st) {
      CHECK(row[st].accepted == row[0].accepted);
      CHECK(row[st].sets == row[0].sets);
    }
  }
  // drop vs static on the common subset: FMC keeps at least as much service
  double drop_pfj = 0, static_pfj = 0;
  long cells_counted = 0;
  for (const auto& row : result.cells) {
    if (row[1].simulated == 0) continue;
    drop_pfj += row[1].mean_pfj;
    static_pfj += row[2].mean_pfj;
    ++cells_counted;
  }
  if (cells_counted > 0) CHECK(drop_pfj >= static_pfj);
}

TEST_CASE("summary csv has the documented shape") {
  ExperimentConfig config = tiny_config();
  config.sets_per_bound = 3;
  config.horizon = rat(5000);
  ExperimentResult result = run_experiment(config);
  std::string csv = result.summary_csv();
  CHECK(csv.rfind("u_bound,strategy,acceptance_ratio,mean_pfj,mean_ctx_switches\n", 0) == 0);
  // one line per (bound, strategy) plus header
  long lines = static_cast<long>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(lines == 1 + 2 * 3);
}

TEST_CASE("degradation profile on table 1 matches the analytic lines") {
  TaskSet set = table1();
  AnalysisContext ctx = build_context(set, compute_x(set));
  std::vector<WorkloadTrace> traces;
  for (std::uint64_t seed = 0; seed < 5; ++seed)
    traces.push_back(generate_trace(set, rat(50000), 0.1, mix_seed(14, seed)));
  DegradationProfile profile = degradation_profile(set, ctx, traces);
  REQUIRE(profile.z_line.size() == 5);
  for (int k = 0; k <= 4; ++k)
    CHECK(profile.z_line[static_cast<std::size_t>(k)] == 1 - rat(k, 4));
  CHECK(profile.bounds_ok);
  CHECK(profile.suspended_ok);
  CHECK_FALSE(profile.samples.empty());
  // k = 0 samples are all full service
  for (const SampleRecord& s : profile.samples[0]) CHECK(s.value == 1);
}

TEST_CASE("experiment config json round-trip") {
  auto j = nlohmann::json::parse(R"({
    "u_bounds": [0.8, 0.9],
    "sets_per_bound": 4,
    "horizon": 100000,
    "overrun_prob": 0.2,
    "strategies": ["drop", "static"],
    "master_seed": 99,
    "generator": { "p_cri": 0.6, "min_hi_tasks": 2 }
  })");
  ExperimentConfig config = ExperimentConfig::from_json(j);
  CHECK(config.u_bounds[0] == rat(4, 5));
  CHECK(config.sets_per_bound == 4);
  CHECK(config.generator.p_cri == 0.6);
  CHECK(config.generator.min_hi_tasks == 2);
  ExperimentConfig again = ExperimentConfig::from_json(config.to_json());
  CHECK(again.to_json().dump() == config.to_json().dump());
  CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::object()), input_error);
}
