#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fmc/rational.hpp"

namespace fmc {

enum class Criticality { low, high };

const char* to_string(Criticality c);
Criticality criticality_from_string(std::string_view s);

// One sporadic mixed-criticality task. The period doubles as the relative
// deadline and the minimum inter-arrival separation (implicit deadlines).
struct McTask {
  std::string id;
  Rat period;
  Criticality criticality = Criticality::low;
  Rat wcet_lo;
  std::optional<Rat> wcet_hi;  // present iff high-criticality
  Rat z_mandatory = 0;         // guaranteed service floor, low-criticality only

  bool is_hi() const { return criticality == Criticality::high; }
  Rat u_lo() const { return Rat(wcet_lo / period); }
  Rat u_hi() const { return Rat(*wcet_hi / period); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Immutable task set with the four utilization aggregates attached.
class TaskSet {
 public:
  // Throws input_error for an empty collection, duplicate ids, or a
  // non-positive period (anything else is reported by validate_task_set).
  explicit TaskSet(std::vector<McTask> tasks);

  const std::vector<McTask>& tasks() const { return tasks_; }
  std::size_t size() const { return tasks_.size(); }
  const McTask& operator[](std::size_t i) const { return tasks_[i]; }

  const Rat& u_lo_lo() const { return u_lo_lo_; }
  const Rat& u_hi_lo() const { return u_hi_lo_; }
  const Rat& u_hi_hi() const { return u_hi_hi_; }
  const Rat& u_lo_man() const { return u_lo_man_; }

  std::size_t hi_count() const { return hi_count_; }
  std::size_t lo_count() const { return tasks_.size() - hi_count_; }

  // Index lookup by id; throws input_error for unknown ids.
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const;

 private:
  std::vector<McTask> tasks_;
  Rat u_lo_lo_, u_hi_lo_, u_hi_hi_, u_lo_man_;
  std::size_t hi_count_ = 0;
};

// Builds the set and its aggregates (exact rational sums).
TaskSet compute_utilizations(std::vector<McTask> tasks);

// Checks every per-task and set-level invariant; an empty report means the
// set is a valid FMC instance.
ValidationReport validate_task_set(const TaskSet& set);

// JSON file format:
//   { "tasks": [ { "id": "t1", "period": 40, "criticality": "HI",
//                  "wcet_lo": 3, "wcet_hi": 8 }, ... ] }
// Rational fields accept integers, decimal strings, and "p/q" strings.
TaskSet task_set_from_json(const nlohmann::json& j);
nlohmann::json task_set_to_json(const TaskSet& set);
TaskSet load_task_set(const std::string& path);
void save_task_set(const TaskSet& set, const std::string& path);

}  // namespace fmc
