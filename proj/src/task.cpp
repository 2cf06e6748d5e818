#include "fmc/task.hpp"

#include <fstream>
#include <unordered_set>

namespace fmc {

const char* to_string(Criticality c) {
  return c == Criticality::high ? "HI" : "LO";
}

Criticality criticality_from_string(std::string_view s) {
  if (s == "HI" || s == "hi") return Criticality::high;
  if (s == "LO" || s == "lo") return Criticality::low;
  throw input_error("unknown criticality '" + std::string(s) + "' (expected LO or HI)");
}

TaskSet::TaskSet(std::vector<McTask> tasks) : tasks_(std::move(tasks)) {
  if (tasks_.empty()) throw input_error("task set is empty");
  std::unordered_set<std::string> seen;
  for (const McTask& t : tasks_) {
    if (!seen.insert(t.id).second)
      throw input_error("duplicate task id '" + t.id + "'");
    if (t.period <= 0)
      throw input_error("task '" + t.id + "' has non-positive period");
  }
  u_lo_lo_ = 0;
  u_hi_lo_ = 0;
  u_hi_hi_ = 0;
  u_lo_man_ = 0;
  for (const McTask& t : tasks_) {
    if (t.is_hi()) {
      ++hi_count_;
      u_hi_lo_ += t.u_lo();
      if (t.wcet_hi) u_hi_hi_ += t.u_hi();
    } else {
      u_lo_lo_ += t.u_lo();
      u_lo_man_ += t.z_mandatory * t.u_lo();
    }
  }
}

std::size_t TaskSet::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < tasks_.size(); ++i)
    if (tasks_[i].id == id) return i;
  throw input_error("unknown task id '" + std::string(id) + "'");
}

bool TaskSet::contains(std::string_view id) const {
  for (const McTask& t : tasks_)
    if (t.id == id) return true;
  return false;
}

TaskSet compute_utilizations(std::vector<McTask> tasks) {
  return TaskSet(std::move(tasks));
}

ValidationReport validate_task_set(const TaskSet& set) {
  ValidationReport report;
  auto flag = [&](const McTask& t, const std::string& what) {
    report.violations.push_back("task '" + t.id + "': " + what);
  };
  for (const McTask& t : set.tasks()) {
    if (t.period <= 0) flag(t, "period must be positive");
    if (t.wcet_lo <= 0) flag(t, "C^LO must be positive");
    if (t.wcet_lo > t.period) flag(t, "C^LO ≤ period required");
    if (t.is_hi()) {
      if (!t.wcet_hi) {
        flag(t, "HI task must define C^HI");
      } else {
        if (*t.wcet_hi <= t.wcet_lo) flag(t, "C^LO < C^HI required");
        if (*t.wcet_hi > t.period) flag(t, "C^HI ≤ period required");
      }
      if (t.z_mandatory != 0) flag(t, "z^man applies to LO tasks only");
    } else {
      if (t.wcet_hi) flag(t, "LO task must not define C^HI");
      if (t.z_mandatory < 0 || t.z_mandatory > 1) flag(t, "z^man ∈ [0,1]");
    }
  }
  if (set.hi_count() == 0)
    report.violations.push_back("task set has no HI task (required for FMC analysis)");
  return report;
}

TaskSet task_set_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("tasks") || !j["tasks"].is_array())
    throw input_error("task set JSON must be an object with a 'tasks' array");
  std::vector<McTask> tasks;
  for (const auto& tj : j["tasks"]) {
    McTask t;
    if (!tj.contains("id") || !tj["id"].is_string())
      throw input_error("every task needs a string 'id'");
    t.id = tj["id"].get<std::string>();
    if (!tj.contains("period") || !tj.contains("criticality") || !tj.contains("wcet_lo"))
      throw input_error("task '" + t.id + "' needs period, criticality, and wcet_lo");
    t.period = rat_from_json(tj["period"]);
    t.criticality = criticality_from_string(tj["criticality"].get<std::string>());
    t.wcet_lo = rat_from_json(tj["wcet_lo"]);
    if (tj.contains("wcet_hi")) t.wcet_hi = rat_from_json(tj["wcet_hi"]);
    if (tj.contains("z_mandatory")) t.z_mandatory = rat_from_json(tj["z_mandatory"]);
    tasks.push_back(std::move(t));
  }
  return TaskSet(std::move(tasks));
}

nlohmann::json task_set_to_json(const TaskSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const McTask& t : set.tasks()) {
    nlohmann::json tj;
    tj["id"] = t.id;
    tj["period"] = rat_to_json(t.period);
    tj["criticality"] = to_string(t.criticality);
    tj["wcet_lo"] = rat_to_json(t.wcet_lo);
    if (t.wcet_hi) tj["wcet_hi"] = rat_to_json(*t.wcet_hi);
    if (!t.is_hi() && t.z_mandatory != 0) tj["z_mandatory"] = rat_to_json(t.z_mandatory);
    arr.push_back(std::move(tj));
  }
  return nlohmann::json{{"tasks", std::move(arr)}};
}

TaskSet load_task_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open task set file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw input_error("bad JSON in '" + path + "': " + e.what());
  }
  return task_set_from_json(j);
}

void save_task_set(const TaskSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write task set file '" + path + "'");
  out << task_set_to_json(set).dump(2) << '\n';
}

}  // namespace fmc
