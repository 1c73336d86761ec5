#pragma once

#include <string>
#include <vector>

#include "heasched/schedule.hpp"

namespace heasched {

// One aircraft's charging obligation: deliver energy_wh within the inclusive
// interval window [window_start, window_end] without exceeding rate_cap_w.
struct ChargingTask {
  std::string id;
  int window_start = 0;
  int window_end = 0;
  double energy_wh = 0.0;
  double rate_cap_w = 0.0;

  int window_len() const { return window_end - window_start + 1; }
  void validate(const TimeGrid& grid) const;
};

// Per-task power series on the grid, plus the pointwise aggregate.
class ChargingProfile {
 public:
  ChargingProfile() = default;
  ChargingProfile(const TimeGrid& grid, std::vector<std::string> task_ids);

  const TimeGrid& grid() const { return grid_; }
  int num_tasks() const { return static_cast<int>(rates_w_.size()); }
  const std::vector<std::string>& task_ids() const { return task_ids_; }

  std::vector<double>& rates_w(int task) { return rates_w_[task]; }
  const std::vector<double>& rates_w(int task) const { return rates_w_[task]; }

  std::vector<double> aggregate_w() const;
  double peak_w() const;
  // Sum over t of the squared aggregate (the flattening objective).
  double sum_sq_aggregate_w2() const;
  double task_energy_wh(int task) const;

 private:
  TimeGrid grid_;
  std::vector<std::string> task_ids_;
  std::vector<std::vector<double>> rates_w_;
};

struct SmartSolveInfo {
  int sweeps = 0;
  double kkt_residual_w = 0.0;
  bool hit_sweep_cap = false;
};

// Constant power E / dwell over each task's window; the battery rate cap is
// deliberately ignored (baseline), tasks that would exceed it are listed in
// *cap_exceeded when provided.
ChargingProfile naive_profile(const std::vector<ChargingTask>& tasks, const TimeGrid& grid,
                              std::vector<std::string>* cap_exceeded = nullptr);

// Minimizes sum_t (sum_n rate_n^t)^2 subject to per-task energy, window and
// rate-cap constraints, by cyclic exact water-filling over tasks. Terminates
// when the KKT residual drops below `tolerance` times the mean aggregate
// power, or after 10^4 sweeps (flagged in info).
ChargingProfile solve_smart(const std::vector<ChargingTask>& tasks, const TimeGrid& grid,
                            double tolerance = 1e-6, SmartSolveInfo* info = nullptr);

// Maximum stationarity/complementarity/feasibility violation of the profile
// for the flattening problem, in watts. Zero exactly at the optimum. Throws
// if the profile is not feasible to within fp noise.
double kkt_residual(const ChargingProfile& profile, const std::vector<ChargingTask>& tasks);

// Exact minimizer of sum((base + x)^2) over 0 <= x <= cap with sum(x) = total.
// Shared water-filling step; exposed for the joint rescheduler.
void water_fill(const std::vector<double>& base, double cap, double total,
                std::vector<double>& x_out);

}  // namespace heasched
