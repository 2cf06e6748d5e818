#pragma once

#include "fmc/analysis.hpp"

namespace fixtures {

using fmc::Criticality;
using fmc::McTask;
using fmc::Rat;
using fmc::rat;
using fmc::TaskSet;

inline McTask hi(std::string id, long period, long c_lo, long c_hi) {
  McTask t;
  t.id = std::move(id);
  t.period = rat(period);
  t.criticality = Criticality::high;
  t.wcet_lo = rat(c_lo);
  t.wcet_hi = rat(c_hi);
  return t;
}

inline McTask lo(std::string id, long period, long c_lo, Rat z_man = Rat(0)) {
  McTask t;
  t.id = std::move(id);
  t.period = rat(period);
  t.criticality = Criticality::low;
  t.wcet_lo = rat(c_lo);
  t.z_mandatory = std::move(z_man);
  return t;
}

// Four identical HI tasks (T=40, 3/8) plus two LO tasks (200/30, 300/75):
// u_LO^LO = 2/5, u_HI^LO = 3/10, u_HI^HI = 4/5, x = 1/2, phi = -1/20 each.
inline TaskSet table1() {
  return TaskSet({hi("t1", 40, 3, 8), hi("t2", 40, 3, 8), hi("t3", 40, 3, 8),
                  hi("t4", 40, 3, 8), lo("t5", 200, 30), lo("t6", 300, 75)});
}

// One HI (T=10, 2/4) and one LO (T=10, 4): x = 1/3, phi = +1/5 (margin).
inline TaskSet smoke() {
  return TaskSet({hi("h", 10, 2, 4), lo("l", 10, 4)});
}

}  // namespace fixtures
