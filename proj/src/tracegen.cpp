#include "fmc/tracegen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace fmc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(seed, a), b);
}

long Rng::uniform_int(long lo, long hi) {
  if (hi < lo) throw input_error("empty integer range");
  std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t draw;
  do {
    draw = next_u64();
  } while (draw >= limit);
  return lo + static_cast<long>(draw % range);
}

double Rng::uniform_real(double lo, double hi) {
  double unit = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return lo + unit * (hi - lo);
}

void GeneratorParams::validate() const {
  if (u_bound <= 0) throw input_error("u_bound must be positive");
  if (period_min < 1 || period_max < period_min) throw input_error("bad period range");
  if (!(u_lo_min > 0) || u_lo_max < u_lo_min) throw input_error("bad u_lo range");
  if (ratio_min <= 1 || ratio_max < ratio_min) throw input_error("bad ratio range");
  if (p_cri < 0 || p_cri > 1) throw input_error("p_cri must lie in [0,1]");
  if (min_hi_tasks < 1) throw input_error("min_hi_tasks must be at least 1");
}

TaskSet generate_task_set(const GeneratorParams& params) {
  params.validate();
  Rng rng(params.seed);
  const Rat window(1, 20);

  std::vector<McTask> tasks;
  Rat u_ll = 0, u_hl = 0, u_hh = 0;
  int hi_count = 0;
  long draws = 0;

  while (true) {
    Rat mode_max = std::max(Rat(u_ll + u_hl), u_hh);
    if (mode_max >= params.u_bound - window && mode_max <= params.u_bound &&
        hi_count >= params.min_hi_tasks)
      break;
    if (++draws > params.retry_budget)
      throw input_error("task-set generation exhausted its retry budget (u_bound " +
                        rat_to_string(params.u_bound) + ", seed " +
                        std::to_string(params.seed) + ")");

    long period = rng.uniform_int(params.period_min, params.period_max);
    double u = rng.uniform_real(params.u_lo_min, params.u_lo_max);
    bool is_hi = rng.bernoulli(params.p_cri);
    double ratio = rng.uniform_real(params.ratio_min, params.ratio_max);

    long c_lo = static_cast<long>(std::floor(u * static_cast<double>(period)));
    if (c_lo < 1 || c_lo > period) continue;
    long c_hi = 0;
    if (is_hi) {
      c_hi = static_cast<long>(std::floor(u * ratio * static_cast<double>(period)));
      if (c_hi <= c_lo || c_hi > period) continue;
    }

    McTask t;
    t.id = "t" + std::to_string(tasks.size() + 1);
    t.period = rat(period);
    t.criticality = is_hi ? Criticality::high : Criticality::low;
    t.wcet_lo = rat(c_lo);
    if (is_hi) t.wcet_hi = rat(c_hi);

    Rat u_lo = t.u_lo();
    Rat n_ll = u_ll, n_hl = u_hl, n_hh = u_hh;
    if (is_hi) {
      n_hl += u_lo;
      n_hh += t.u_hi();
    } else {
      n_ll += u_lo;
    }
    if (std::max(Rat(n_ll + n_hl), n_hh) > params.u_bound) continue;  // overshoot: redraw

    tasks.push_back(std::move(t));
    u_ll = n_ll;
    u_hl = n_hl;
    u_hh = n_hh;
    if (is_hi) ++hi_count;
  }
  return TaskSet(std::move(tasks));
}

WorkloadTrace generate_trace(const TaskSet& set, const Rat& horizon,
                             double overrun_prob, std::uint64_t seed,
                             double jitter_frac) {
  if (horizon <= 0) throw input_error("horizon must be positive");
  if (overrun_prob < 0 || overrun_prob > 1)
    throw input_error("overrun probability must lie in [0,1]");

  WorkloadTrace trace;
  trace.horizon = horizon;
  trace.overrun_prob = overrun_prob;
  trace.seed = seed;

  for (std::size_t i = 0; i < set.size(); ++i) {
    const McTask& t = set[i];
    Rng rng(mix_seed(seed, i));  // per-task substream
    Rat arrival = 0;
    while (arrival < horizon) {
      TraceJob job;
      job.task = i;
      job.arrival = arrival;
      job.overrun = t.is_hi() && overrun_prob > 0 && rng.bernoulli(overrun_prob);
      job.demand = job.overrun ? *t.wcet_hi : t.wcet_lo;
      trace.jobs.push_back(std::move(job));
      if (jitter_frac > 0) {
        Rat stretch(rng.uniform_real(1.0, 1.0 + jitter_frac));
        arrival += t.period * stretch;
      } else {
        arrival += t.period;
      }
    }
  }
  std::stable_sort(trace.jobs.begin(), trace.jobs.end(),
                   [](const TraceJob& a, const TraceJob& b) {
                     int c = cmp(a.arrival, b.arrival);
                     if (c != 0) return c < 0;
                     return a.task < b.task;
                   });
  return trace;
}

std::uint64_t trace_hash(const WorkloadTrace& trace) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    h ^= 0x1f;
    h *= 0x100000001b3ULL;
  };
  feed(rat_to_string(trace.horizon));
  for (const TraceJob& j : trace.jobs) {
    feed(std::to_string(j.task));
    feed(rat_to_string(j.arrival));
    feed(rat_to_string(j.demand));
    feed(j.overrun ? "1" : "0");
  }
  return h;
}

void validate_trace(const TaskSet& set, const WorkloadTrace& trace) {
  if (trace.horizon <= 0) throw input_error("trace horizon must be positive");
  const Rat* prev_arrival = nullptr;
  for (const TraceJob& j : trace.jobs) {
    if (j.task >= set.size()) throw input_error("trace references an unknown task");
    const McTask& t = set[j.task];
    if (j.overrun && !t.is_hi())
      throw input_error("trace flags an overrun on LO task '" + t.id + "'");
    Rat expected = j.overrun ? *t.wcet_hi : t.wcet_lo;
    if (j.demand != expected)
      throw input_error("trace demand for task '" + t.id + "' does not match its WCET");
    if (j.arrival < 0 || j.arrival >= trace.horizon)
      throw input_error("trace arrival outside [0, horizon)");
    if (prev_arrival && *prev_arrival > j.arrival)
      throw input_error("trace jobs must be sorted by arrival time");
    prev_arrival = &j.arrival;
  }
}

nlohmann::json trace_to_json(const TaskSet& set, const WorkloadTrace& trace) {
  nlohmann::json jobs = nlohmann::json::array();
  for (const TraceJob& j : trace.jobs) {
    nlohmann::json o;
    o["task"] = set[j.task].id;
    o["arrival"] = rat_to_json(j.arrival);
    o["demand"] = rat_to_json(j.demand);
    if (j.overrun) o["overrun"] = true;
    jobs.push_back(std::move(o));
  }
  return nlohmann::json{{"horizon", rat_to_json(trace.horizon)},
                        {"overrun_prob", trace.overrun_prob},
                        {"seed", trace.seed},
                        {"rng", trace.rng},
                        {"jobs", std::move(jobs)}};
}

WorkloadTrace trace_from_json(const TaskSet& set, const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("horizon") || !j.contains("jobs"))
    throw input_error("trace JSON must carry 'horizon' and 'jobs'");
  WorkloadTrace trace;
  trace.horizon = rat_from_json(j["horizon"]);
  trace.overrun_prob = j.value("overrun_prob", 0.0);
  trace.seed = j.value("seed", std::uint64_t{0});
  trace.rng = j.value("rng", std::string(kRngName));
  for (const auto& o : j["jobs"]) {
    TraceJob job;
    job.task = set.index_of(o.at("task").get<std::string>());
    job.arrival = rat_from_json(o.at("arrival"));
    job.demand = rat_from_json(o.at("demand"));
    job.overrun = o.value("overrun", false);
    trace.jobs.push_back(std::move(job));
  }
  validate_trace(set, trace);
  return trace;
}

WorkloadTrace load_trace(const TaskSet& set, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open trace file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad JSON in '" + path + "': " + e.what());
  }
  return trace_from_json(set, j);
}

void save_trace(const TaskSet& set, const WorkloadTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write trace file '" + path + "'");
  out << trace_to_json(set, trace).dump() << '\n';
}

}  // namespace fmc
