#include "heasched/smart_charge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "heasched/errors.hpp"

namespace heasched {

void ChargingTask::validate(const TimeGrid& grid) const {
  if (window_start > window_end)
    throw EmptyWindowError("task " + id + " has an empty charging window");
  if (!grid.contains(window_start) || !grid.contains(window_end))
    throw SlotOutOfRangeError("task " + id + " window outside grid");
  if (energy_wh < 0.0) throw Error("task " + id + " has negative energy");
  if (rate_cap_w <= 0.0) throw Error("task " + id + " has non-positive rate cap");
}

ChargingProfile::ChargingProfile(const TimeGrid& grid, std::vector<std::string> task_ids)
    : grid_(grid), task_ids_(std::move(task_ids)) {
  rates_w_.assign(task_ids_.size(), std::vector<double>(grid.num_intervals, 0.0));
}

std::vector<double> ChargingProfile::aggregate_w() const {
  std::vector<double> agg(grid_.num_intervals, 0.0);
  for (const auto& rates : rates_w_)
    for (int t = 0; t < grid_.num_intervals; ++t) agg[t] += rates[t];
  return agg;
}

double ChargingProfile::peak_w() const {
  auto agg = aggregate_w();
  return agg.empty() ? 0.0 : *std::max_element(agg.begin(), agg.end());
}

double ChargingProfile::sum_sq_aggregate_w2() const {
  double sum = 0.0;
  for (double a : aggregate_w()) sum += a * a;
  return sum;
}

double ChargingProfile::task_energy_wh(int task) const {
  double sum_w = std::accumulate(rates_w_[task].begin(), rates_w_[task].end(), 0.0);
  return sum_w * grid_.dt_hours();
}

ChargingProfile naive_profile(const std::vector<ChargingTask>& tasks, const TimeGrid& grid,
                              std::vector<std::string>* cap_exceeded) {
  std::vector<std::string> ids;
  for (const auto& t : tasks) ids.push_back(t.id);
  ChargingProfile profile(grid, std::move(ids));
  for (size_t n = 0; n < tasks.size(); ++n) {
    const auto& task = tasks[n];
    task.validate(grid);
    if (task.energy_wh == 0.0) continue;
    double rate = task.energy_wh / (task.window_len() * grid.dt_hours());
    if (rate > task.rate_cap_w && cap_exceeded) cap_exceeded->push_back(task.id);
    for (int t = task.window_start; t <= task.window_end; ++t) profile.rates_w(n)[t] = rate;
  }
  return profile;
}

void water_fill(const std::vector<double>& base, double cap, double total,
                std::vector<double>& x_out) {
  const size_t len = base.size();
  x_out.assign(len, 0.0);
  if (total <= 0.0) return;

  // x_t(level) = clamp(level - base_t, 0, cap) is nondecreasing and piecewise
  // linear in the water level; locate the level by walking sorted breakpoints.
  std::vector<double> breaks;
  breaks.reserve(2 * len);
  for (double b : base) {
    breaks.push_back(b);
    breaks.push_back(b + cap);
  }
  std::sort(breaks.begin(), breaks.end());

  auto volume_at = [&](double level) {
    double v = 0.0;
    for (double b : base) v += std::clamp(level - b, 0.0, cap);
    return v;
  };

  double level = breaks.back();
  double vol_hi = volume_at(level);
  if (vol_hi <= total) {
    // Every slot at cap (feasibility was checked by the caller).
    x_out.assign(len, cap);
  } else {
    // Binary search over breakpoint index, then linear interpolation.
    size_t lo = 0, hi = breaks.size() - 1;
    while (lo + 1 < hi) {
      size_t mid = (lo + hi) / 2;
      if (volume_at(breaks[mid]) >= total)
        hi = mid;
      else
        lo = mid;
    }
    double v_lo = volume_at(breaks[lo]);
    double v_hi = volume_at(breaks[hi]);
    if (v_hi <= v_lo) {
      level = breaks[hi];
    } else {
      // Count of slots active strictly between the two breakpoints gives the
      // slope; interpolate exactly.
      double slope = 0.0;
      double mid = 0.5 * (breaks[lo] + breaks[hi]);
      for (double b : base)
        if (mid - b > 0.0 && mid - b < cap) slope += 1.0;
      if (slope <= 0.0)
        level = breaks[hi];
      else
        level = breaks[lo] + (total - v_lo) / slope;
      level = std::min(level, breaks[hi]);
    }
    for (size_t t = 0; t < len; ++t) x_out[t] = std::clamp(level - base[t], 0.0, cap);
  }

  // Remove fp drift from the equality constraint by nudging interior slots.
  double drift = std::accumulate(x_out.begin(), x_out.end(), 0.0) - total;
  if (drift != 0.0) {
    for (size_t t = 0; t < len && drift != 0.0; ++t) {
      double adjusted = std::clamp(x_out[t] - drift, 0.0, cap);
      drift -= (x_out[t] - adjusted);
      x_out[t] = adjusted;
    }
  }
}

namespace {

// Scale for relative termination: mean aggregate power over covered slots.
double aggregate_scale_w(const std::vector<double>& agg, const std::vector<char>& covered) {
  double sum = 0.0;
  int n = 0;
  for (size_t t = 0; t < agg.size(); ++t) {
    if (covered[t]) {
      sum += agg[t];
      ++n;
    }
  }
  if (n == 0) return 1.0;
  return std::max(sum / n, 1e-12);
}

}  // namespace

ChargingProfile solve_smart(const std::vector<ChargingTask>& tasks, const TimeGrid& grid,
                            double tolerance, SmartSolveInfo* info) {
  constexpr int kSweepCap = 10000;
  for (const auto& task : tasks) {
    task.validate(grid);
    double deliverable = task.rate_cap_w * task.window_len() * grid.dt_hours();
    if (task.energy_wh > deliverable * (1.0 + 1e-12))
      throw InfeasibleTaskError(task.id, "task " + task.id + " needs " +
                                             std::to_string(task.energy_wh) + " Wh but at most " +
                                             std::to_string(deliverable) +
                                             " Wh fit in its window");
  }

  std::vector<std::string> ids;
  for (const auto& t : tasks) ids.push_back(t.id);
  ChargingProfile profile(grid, std::move(ids));

  std::vector<char> covered(grid.num_intervals, 0);
  for (const auto& task : tasks)
    for (int t = task.window_start; t <= task.window_end; ++t) covered[t] = 1;

  // Start from the cap-clipped uniform profile.
  std::vector<double> agg(grid.num_intervals, 0.0);
  std::vector<double> base, filled;
  for (size_t n = 0; n < tasks.size(); ++n) {
    const auto& task = tasks[n];
    double target_w = task.energy_wh / grid.dt_hours();  // sum of rates over the window
    base.assign(task.window_len(), 0.0);
    water_fill(base, task.rate_cap_w, target_w, filled);
    for (int k = 0; k < task.window_len(); ++k) {
      profile.rates_w(n)[task.window_start + k] = filled[k];
      agg[task.window_start + k] += filled[k];
    }
  }

  int sweep = 0;
  double residual = std::numeric_limits<double>::infinity();
  for (; sweep < kSweepCap; ++sweep) {
    for (size_t n = 0; n < tasks.size(); ++n) {
      const auto& task = tasks[n];
      double target_w = task.energy_wh / grid.dt_hours();
      base.assign(task.window_len(), 0.0);
      for (int k = 0; k < task.window_len(); ++k) {
        int t = task.window_start + k;
        base[k] = agg[t] - profile.rates_w(n)[t];
      }
      water_fill(base, task.rate_cap_w, target_w, filled);
      for (int k = 0; k < task.window_len(); ++k) {
        int t = task.window_start + k;
        agg[t] = base[k] + filled[k];
        profile.rates_w(n)[t] = filled[k];
      }
    }
    residual = kkt_residual(profile, tasks);
    if (residual <= tolerance * aggregate_scale_w(agg, covered)) break;
  }

  if (info) {
    info->sweeps = std::min(sweep + 1, kSweepCap);
    info->kkt_residual_w = residual;
    info->hit_sweep_cap = sweep >= kSweepCap;
  }
  return profile;
}

double kkt_residual(const ChargingProfile& profile, const std::vector<ChargingTask>& tasks) {
  const TimeGrid& grid = profile.grid();
  if (profile.num_tasks() != static_cast<int>(tasks.size()))
    throw Error("profile/task count mismatch");

  auto agg = profile.aggregate_w();
  std::vector<char> covered(grid.num_intervals, 0);
  for (const auto& task : tasks)
    for (int t = task.window_start; t <= task.window_end; ++t) covered[t] = 1;
  double scale = aggregate_scale_w(agg, covered);

  double residual = 0.0;
  for (int n = 0; n < profile.num_tasks(); ++n) {
    const auto& task = tasks[n];
    const auto& rates = profile.rates_w(n);

    double feas = 0.0;
    for (int t = 0; t < grid.num_intervals; ++t) {
      bool inside = t >= task.window_start && t <= task.window_end;
      if (!inside) feas = std::max(feas, std::abs(rates[t]));
      feas = std::max(feas, -rates[t]);
      feas = std::max(feas, rates[t] - task.rate_cap_w);
    }
    double energy_gap_w =
        std::abs(profile.task_energy_wh(n) - task.energy_wh) / grid.dt_hours();
    feas = std::max(feas, energy_gap_w);
    if (feas > 1e-6 * std::max(scale, task.rate_cap_w))
      throw Error("infeasible profile for task " + task.id);
    residual = std::max(residual, feas);

    // Tightest multiplier for the energy constraint: every slot at its cap
    // wants mu >= 2*agg, every empty slot wants mu <= 2*agg, interior slots
    // pin it. The best achievable violation is half the interval defect.
    const double act_tol = 1e-9 * std::max(task.rate_cap_w, scale);
    double lo_need = -std::numeric_limits<double>::infinity();
    double hi_need = std::numeric_limits<double>::infinity();
    for (int t = task.window_start; t <= task.window_end; ++t) {
      double v = 2.0 * agg[t];
      bool at_zero = rates[t] <= act_tol;
      bool at_cap = rates[t] >= task.rate_cap_w - act_tol;
      if (at_cap) lo_need = std::max(lo_need, v);
      if (at_zero) hi_need = std::min(hi_need, v);
      if (!at_zero && !at_cap) {
        lo_need = std::max(lo_need, v);
        hi_need = std::min(hi_need, v);
      }
    }
    if (lo_need > hi_need) residual = std::max(residual, 0.5 * (lo_need - hi_need));
  }
  return residual;
}

}  // namespace heasched
