#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace fmc {

// Exact rational time/utilization value. All analysis and simulation
// arithmetic is done on these; doubles appear only in rendered output.
using Rat = mpq_class;

// Raised for malformed inputs, contract violations on user-supplied data,
// and file / CLI errors. Maps to exit code 2.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an internal consistency check fails (for example a tuning
// strategy handing the scheduler an assignment that fails the run-time
// admissibility test). Maps to exit code 3.
class internal_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised by the off-line analysis when a task set cannot be scheduled in
// low-criticality mode at all (utilization >= 1).
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonicalized rational from an integer pair.
inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Parses "3", "-7/2" or a decimal such as "0.125" / "1.5e-3" exactly.
Rat rat_from_string(std::string_view text);

// "n" when the denominator is 1, "n/d" otherwise.
std::string rat_to_string(const Rat& r);

inline double rat_to_double(const Rat& r) { return r.get_d(); }

// JSON bridge. Accepts integers, "p/q" strings, decimal strings, and JSON
// floats (floats are re-read from their shortest decimal rendering, so a
// literal 0.1 becomes exactly 1/10).
Rat rat_from_json(const nlohmann::json& j);

// Integers that fit in 64 bits are emitted as JSON numbers, everything
// else as an exact string.
nlohmann::json rat_to_json(const Rat& r);

}  // namespace fmc
