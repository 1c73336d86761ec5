#pragma once

#include <vector>

#include "heasched/smart_charge.hpp"

// Reference solver for the fixed-schedule flattening problem, independent of
// the library's water-filling path: plain projected gradient with an exact
// per-task projection onto { sum x = target, 0 <= x <= cap }.
namespace oracle {

struct PgResult {
  std::vector<std::vector<double>> rates_w;  // [task][t]
  double objective_w2 = 0.0;
  int iters = 0;
  double grad_map_inf = 0.0;
};

PgResult projected_gradient_smart(const std::vector<heasched::ChargingTask>& tasks,
                                  const heasched::TimeGrid& grid, double tol = 1e-10,
                                  int max_iters = 2000000);

// Exposed for reuse by the other oracles.
void project_energy_box(std::vector<double>& x, double target_sum, double cap);

}  // namespace oracle
