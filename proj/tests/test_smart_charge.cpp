#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include <algorithm>

#include "heasched/errors.hpp"
#include "heasched/rng.hpp"
#include "heasched/smart_charge.hpp"
#include "oracles/projected_gradient.hpp"

using namespace heasched;

namespace {

// Random instances where each task's energy fits its window.
std::vector<ChargingTask> random_instance(Rng& rng, int max_tasks, int t_count) {
  int n = 1 + static_cast<int>(rng.uniform_int(0, max_tasks - 1));
  std::vector<ChargingTask> tasks;
  for (int k = 0; k < n; ++k) {
    ChargingTask task;
    task.id = "t" + std::to_string(k);
    task.window_start = static_cast<int>(rng.uniform_int(0, t_count - 1));
    task.window_end =
        static_cast<int>(rng.uniform_int(task.window_start, t_count - 1));
    task.rate_cap_w = rng.uniform(0.5, 4.0) * 1e6;
    double dt_h = 1.0 / 60.0;
    double deliverable = task.rate_cap_w * task.window_len() * dt_h;
    task.energy_wh = rng.uniform(0.1, 0.95) * deliverable;
    tasks.push_back(task);
  }
  return tasks;
}

}  // namespace

TEST_CASE("naive profile examples") {
  TimeGrid grid{120, 1.0};
  SUBCASE("uniform rate over the dwell") {
    ChargingTask task{"n1", 10, 69, 60e3, 1e9};
    auto profile = naive_profile({task}, grid);
    for (int t = 10; t <= 69; ++t) CHECK(profile.rates_w(0)[t] == doctest::Approx(60e3));
    CHECK(profile.rates_w(0)[9] == 0.0);
    CHECK(profile.rates_w(0)[70] == 0.0);
    CHECK(profile.task_energy_wh(0) == doctest::Approx(60e3));
  }
  SUBCASE("superposition of overlapping windows") {
    TimeGrid g3{3, 60.0};  // one-hour intervals
    ChargingTask a{"a", 0, 1, 2e3, 1e9};
    ChargingTask b{"b", 1, 2, 2e3, 1e9};
    auto profile = naive_profile({a, b}, g3);
    auto agg = profile.aggregate_w();
    CHECK(agg[0] == doctest::Approx(1e3));
    CHECK(agg[1] == doctest::Approx(2e3));
    CHECK(agg[2] == doctest::Approx(1e3));
  }
  SUBCASE("zero energy gives a zero profile") {
    ChargingTask z{"z", 5, 9, 0.0, 10.0};
    auto profile = naive_profile({z}, grid);
    CHECK(profile.peak_w() == 0.0);
  }
  SUBCASE("cap excess is flagged, not fixed") {
    ChargingTask hot{"hot", 0, 0, 10e3, 1.0};
    std::vector<std::string> flagged;
    auto profile = naive_profile({hot}, grid, &flagged);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged[0] == "hot");
    CHECK(profile.rates_w(0)[0] > hot.rate_cap_w);
  }
  SUBCASE("inverted window is rejected") {
    ChargingTask bad{"bad", 5, 4, 1.0, 1.0};
    CHECK_THROWS_AS(naive_profile({bad}, grid), EmptyWindowError);
  }
}

TEST_CASE("single task with slack cap charges uniformly") {
  TimeGrid grid{8, 30.0};
  ChargingTask task{"u", 2, 5, 100e3, 1e9};
  auto profile = solve_smart({task}, grid);
  double expect = 100e3 / (4 * 0.5);
  for (int t = 2; t <= 5; ++t) CHECK(profile.rates_w(0)[t] == doctest::Approx(expect));
  CHECK(kkt_residual(profile, {task}) <= 1e-6 * expect);
}

TEST_CASE("two overlapping tasks flatten to the hand-derived optimum") {
  TimeGrid grid{3, 60.0};
  ChargingTask a{"a", 0, 1, 2e3, 1e9};
  ChargingTask b{"b", 1, 2, 2e3, 1e9};
  auto profile = solve_smart({a, b}, grid, 1e-9);
  auto agg = profile.aggregate_w();
  CHECK(agg[0] == doctest::Approx(4.0e3 / 3).epsilon(1e-6));
  CHECK(agg[1] == doctest::Approx(4.0e3 / 3).epsilon(1e-6));
  CHECK(agg[2] == doctest::Approx(4.0e3 / 3).epsilon(1e-6));
  CHECK(profile.peak_w() == doctest::Approx(4.0e3 / 3).epsilon(1e-6));

  auto naive = naive_profile({a, b}, grid);
  CHECK(naive.peak_w() == doctest::Approx(2e3));
  CHECK(profile.sum_sq_aggregate_w2() < naive.sum_sq_aggregate_w2());
  // The naive profile is feasible but not stationary here.
  CHECK(kkt_residual(naive, {a, b}) > 0.0);
}

TEST_CASE("infeasible task is reported with its id") {
  TimeGrid grid{2, 60.0};
  ChargingTask task{"tight", 0, 1, 2e3, 0.8e3};
  try {
    solve_smart({task}, grid);
    FAIL("expected infeasibility");
  } catch (const InfeasibleTaskError& e) {
    CHECK(e.task_id() == "tight");
  }
}

TEST_CASE("kkt residual is zero at a known optimum and positive off it") {
  TimeGrid grid{4, 60.0};
  ChargingTask task{"k", 0, 3, 4e3, 1e9};
  auto profile = solve_smart({task}, grid, 1e-10);
  CHECK(kkt_residual(profile, {task}) <= 1e-7 * 1e3);

  // Push energy to the front: feasible but suboptimal.
  ChargingProfile skew(grid, {"k"});
  skew.rates_w(0) = {2e3, 2e3, 0.0, 0.0};
  CHECK(kkt_residual(skew, {task}) > 1.0);

  // Infeasible profiles are rejected outright.
  ChargingProfile bad(grid, {"k"});
  bad.rates_w(0) = {4e3, 0.0, 0.0, 0.0};
  bad.rates_w(0)[0] = 8e3;  // double the energy
  CHECK_THROWS_AS(kkt_residual(bad, {task}), Error);
}

TEST_CASE("solver matches the projected-gradient reference on random instances") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed * 977);
    int t_count = 4 + static_cast<int>(rng.uniform_int(0, 8));
    TimeGrid grid{t_count, 1.0};
    auto tasks = random_instance(rng, 5, t_count);

    SmartSolveInfo info;
    auto profile = solve_smart(tasks, grid, 1e-9, &info);
    CHECK_FALSE(info.hit_sweep_cap);

    auto ref = oracle::projected_gradient_smart(tasks, grid, 1e-10);
    CHECK(testutil::near_rel(profile.sum_sq_aggregate_w2(), ref.objective_w2, 1e-6));

    // Both certified by the same first-order conditions.
    ChargingProfile ref_profile(grid, profile.task_ids());
    for (int k = 0; k < profile.num_tasks(); ++k) ref_profile.rates_w(k) = ref.rates_w[k];
    double scale = 0.0;
    for (double a : profile.aggregate_w()) scale = std::max(scale, a);
    CHECK(kkt_residual(profile, tasks) <= 1e-6 * std::max(scale, 1.0));
    CHECK(kkt_residual(ref_profile, tasks) <= 1e-5 * std::max(scale, 1.0));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("energy conservation and dominance invariants") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    Rng rng(seed);
    int t_count = 6 + static_cast<int>(rng.uniform_int(0, 20));
    TimeGrid grid{t_count, rng.uniform() < 0.5 ? 1.0 : 2.0};
    auto tasks = random_instance(rng, 6, t_count);
    auto profile = solve_smart(tasks, grid, 1e-8);

    for (size_t k = 0; k < tasks.size(); ++k)
      CHECK(testutil::near(profile.task_energy_wh(k), tasks[k].energy_wh,
                           1e-6 * std::max(tasks[k].energy_wh, 1.0)));

    std::vector<std::string> flagged;
    auto naive = naive_profile(tasks, grid, &flagged);
    if (flagged.empty()) {
      CHECK(profile.sum_sq_aggregate_w2() <=
            naive.sum_sq_aggregate_w2() * (1.0 + 1e-9) + 1e-6);
      CHECK(profile.peak_w() <= naive.peak_w() * (1.0 + 1e-9) + 1e-6);
    }
  }
}

TEST_CASE("relabeling tasks permutes profiles and keeps the aggregate") {
  Rng rng(7);
  TimeGrid grid{10, 1.0};
  auto tasks = random_instance(rng, 4, 10);
  auto profile = solve_smart(tasks, grid, 1e-9);

  std::vector<ChargingTask> reversed(tasks.rbegin(), tasks.rend());
  auto profile_rev = solve_smart(reversed, grid, 1e-9);

  auto agg = profile.aggregate_w();
  auto agg_rev = profile_rev.aggregate_w();
  for (int t = 0; t < grid.num_intervals; ++t)
    CHECK(agg[t] == doctest::Approx(agg_rev[t]).epsilon(1e-6));
}
