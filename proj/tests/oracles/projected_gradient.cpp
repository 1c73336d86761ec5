#include "oracles/projected_gradient.hpp"

#include <algorithm>
#include <cmath>

namespace oracle {

void project_energy_box(std::vector<double>& x, double target_sum, double cap) {
  // Bisection on the shift tau with x_i(tau) = clamp(x_i - tau, 0, cap).
  double lo = -cap, hi = cap;
  for (double v : x) {
    lo = std::min(lo, v - cap);
    hi = std::max(hi, v);
  }
  auto mass = [&](double tau) {
    double s = 0.0;
    for (double v : x) s += std::clamp(v - tau, 0.0, cap);
    return s;
  };
  if (mass(lo) < target_sum) {
    for (auto& v : x) v = cap;
    return;
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mass(mid) >= target_sum)
      lo = mid;
    else
      hi = mid;
  }
  for (auto& v : x) v = std::clamp(v - lo, 0.0, cap);
  double drift = mass(0.0) - target_sum;
  for (auto& v : x) {
    if (drift == 0.0) break;
    double adj = std::clamp(v - drift, 0.0, cap);
    drift -= v - adj;
    v = adj;
  }
}

PgResult projected_gradient_smart(const std::vector<heasched::ChargingTask>& tasks,
                                  const heasched::TimeGrid& grid, double tol, int max_iters) {
  const int t_count = grid.num_intervals;
  const int n = static_cast<int>(tasks.size());
  PgResult out;
  out.rates_w.assign(n, std::vector<double>(t_count, 0.0));
  if (n == 0) return out;

  // Targets in summed watts per window.
  std::vector<double> target(n);
  for (int k = 0; k < n; ++k) target[k] = tasks[k].energy_wh / grid.dt_hours();

  // Start uniform (projected).
  std::vector<std::vector<double>> windows(n);
  for (int k = 0; k < n; ++k) {
    windows[k].assign(tasks[k].window_len(), target[k] / tasks[k].window_len());
    project_energy_box(windows[k], target[k], tasks[k].rate_cap_w);
  }

  const double step = 1.0 / (2.0 * n);
  std::vector<double> agg(t_count, 0.0);
  std::vector<std::vector<double>> next(n);

  double scale = 0.0;
  for (int k = 0; k < n; ++k) scale = std::max(scale, tasks[k].rate_cap_w);

  int it = 0;
  for (; it < max_iters; ++it) {
    std::fill(agg.begin(), agg.end(), 0.0);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < tasks[k].window_len(); ++j)
        agg[tasks[k].window_start + j] += windows[k][j];

    double move = 0.0;
    for (int k = 0; k < n; ++k) {
      next[k] = windows[k];
      for (int j = 0; j < tasks[k].window_len(); ++j)
        next[k][j] -= step * 2.0 * agg[tasks[k].window_start + j];
      project_energy_box(next[k], target[k], tasks[k].rate_cap_w);
      for (int j = 0; j < tasks[k].window_len(); ++j)
        move = std::max(move, std::abs(next[k][j] - windows[k][j]));
    }
    windows.swap(next);
    out.grad_map_inf = move;
    if (move <= tol * std::max(scale, 1.0)) break;
  }
  out.iters = it;

  std::fill(agg.begin(), agg.end(), 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < tasks[k].window_len(); ++j) {
      out.rates_w[k][tasks[k].window_start + j] = windows[k][j];
      agg[tasks[k].window_start + j] += windows[k][j];
    }
  out.objective_w2 = 0.0;
  for (double a : agg) out.objective_w2 += a * a;
  return out;
}

}  // namespace oracle
