#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "heasched/errors.hpp"
#include "heasched/rng.hpp"
#include "heasched/schedule.hpp"

using namespace heasched;

namespace {

// Eq-style step encodings evaluated literally, as the independent route.
std::vector<int> step_of(int slot, int t_count) {
  std::vector<int> y(t_count, 0);
  for (int t = 0; t <= slot; ++t) y[t] = 1;
  return y;
}

// X+ = sum (1 - A^t) Y^t, X- = sum A^t (1 - Y^t).
std::pair<int, int> displacement_from_steps(int requested, int allocated, int t_count) {
  auto a = step_of(requested, t_count);
  auto y = step_of(allocated, t_count);
  int plus = 0, minus = 0;
  for (int t = 0; t < t_count; ++t) {
    plus += (1 - a[t]) * y[t];
    minus += a[t] * (1 - y[t]);
  }
  return {plus, minus};
}

// Telescoping window count from the step encodings, with Y^T = 0.
int window_count_from_steps(const AllocationMatrix& alloc, int t, int l_window) {
  int hi = std::min(t + l_window, alloc.num_intervals() - 1);
  int count = 0;
  for (int i = 0; i < alloc.size(); ++i)
    for (int tau = t; tau <= hi; ++tau)
      count += alloc.value(i, tau) - alloc.value(i, tau + 1);
  return count;
}

}  // namespace

TEST_CASE("step encoding examples") {
  TimeGrid grid{4, 1.0};
  auto a = AllocationMatrix::encode(grid, {2});
  CHECK(a.row(0) == std::vector<std::uint8_t>{1, 1, 1, 0});
  CHECK(AllocationMatrix::encode(grid, {0}).row(0) == std::vector<std::uint8_t>{1, 0, 0, 0});
  CHECK(AllocationMatrix::encode(grid, {3}).row(0) == std::vector<std::uint8_t>{1, 1, 1, 1});
  CHECK_THROWS_AS(AllocationMatrix::encode(grid, {4}), SlotOutOfRangeError);
  CHECK_THROWS_AS(AllocationMatrix::encode(grid, {-1}), SlotOutOfRangeError);
}

TEST_CASE("encoding and last-one decoding invert each other") {
  TimeGrid grid{9, 1.0};
  for (int s = 0; s < 9; ++s) {
    auto alloc = AllocationMatrix::encode(grid, {s});
    auto row = alloc.row(0);
    int last = -1;
    for (int t = 0; t < 9; ++t)
      if (row[t]) last = t;
    CHECK(last == s);
    CHECK(alloc.slot(0) == s);
    // Step shape: nonincreasing with a leading one.
    CHECK(row[0] == 1);
    for (int t = 0; t + 1 < 9; ++t) CHECK(row[t] >= row[t + 1]);
  }
}

TEST_CASE("displacement examples") {
  CHECK(displacement(10, 13).late == 3);
  CHECK(displacement(10, 13).early == 0);
  CHECK(displacement(10, 10).late == 0);
  CHECK(displacement(10, 10).early == 0);
  CHECK(displacement(10, 7).late == 0);
  CHECK(displacement(10, 7).early == 3);
}

TEST_CASE("displacement closed form equals the summation form, exhaustively") {
  const int t_count = 16;
  for (int r = 0; r < t_count; ++r) {
    for (int a = 0; a < t_count; ++a) {
      auto d = displacement(r, a);
      auto [plus, minus] = displacement_from_steps(r, a, t_count);
      CHECK(d.late == plus);
      CHECK(d.early == minus);
      CHECK(d.late + d.early == std::abs(r - a));
      CHECK((d.late == 0 || d.early == 0));
    }
  }
}

TEST_CASE("capacity violations") {
  TimeGrid grid{12, 1.0};
  SUBCASE("two movements in one slot exceed capacity one") {
    auto alloc = AllocationMatrix::encode(grid, {5, 5});
    auto v = check_capacity(alloc, 1, 1);
    REQUIRE(!v.empty());
    for (const auto& viol : v) {
      CHECK(viol.window_start <= 5);
      CHECK(viol.window_end >= 5);
      CHECK(viol.count == 2);
    }
  }
  SUBCASE("disjoint windows pass") {
    auto alloc = AllocationMatrix::encode(grid, {0, 2});
    CHECK(check_capacity(alloc, 1, 1).empty());
  }
  SUBCASE("three movements fit a window of matching capacity") {
    TimeGrid g10{10, 1.0};
    auto alloc = AllocationMatrix::encode(g10, {2, 3, 4});
    CHECK(check_capacity(alloc, 3, 3).empty());
    CHECK(!check_capacity(alloc, 2, 3).empty());
  }
}

TEST_CASE("window counts agree with the telescoping sum on random schedules") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    int t_count = 3 + static_cast<int>(rng.uniform_int(0, 12));
    TimeGrid grid{t_count, 1.0};
    int n = 1 + static_cast<int>(rng.uniform_int(0, 6));
    std::vector<int> slots(n);
    for (auto& s : slots) s = static_cast<int>(rng.uniform_int(0, t_count - 1));
    auto alloc = AllocationMatrix::encode(grid, slots);
    int l_window = 1 + static_cast<int>(rng.uniform_int(0, 4));
    int r_bar = static_cast<int>(rng.uniform_int(0, n));

    auto violations = check_capacity(alloc, r_bar, l_window);
    for (int t = 0; t < t_count; ++t) {
      int count = window_count_from_steps(alloc, t, l_window);
      bool listed = false;
      for (const auto& v : violations)
        if (v.window_start == t) {
          listed = true;
          CHECK(v.count == count);
        }
      CHECK(listed == (count > r_bar));
    }
  }
}

TEST_CASE("an all-distinct schedule with generous capacity never violates") {
  TimeGrid grid{16, 1.0};
  std::vector<int> slots;
  for (int s = 0; s < 16; ++s) slots.push_back(s);
  for (int l_window = 1; l_window <= 4; ++l_window) {
    auto alloc = AllocationMatrix::encode(grid, slots);
    CHECK(check_capacity(alloc, l_window + 1, l_window).empty());
  }
}

TEST_CASE("connect floor") {
  TimeGrid grid{32, 1.0};
  Schedule sched;
  sched.grid = grid;
  sched.movements = {{"a", MovementKind::Arrival, "AL1", 4},
                     {"d", MovementKind::Departure, "AL1", 19}};
  Connection conn;
  conn.id = "c";
  conn.arrival = 0;
  conn.departure = 1;
  conn.min_connect_intervals = 15;

  CHECK(check_connect(AllocationMatrix::encode(grid, {4, 19}), conn));
  CHECK_FALSE(check_connect(AllocationMatrix::encode(grid, {4, 18}), conn));
  conn.min_connect_intervals = 0;
  CHECK(check_connect(AllocationMatrix::encode(grid, {7, 7}), conn));
  CHECK(check_connect(AllocationMatrix::encode(grid, {7, 9}), conn));
}

TEST_CASE("schedule validation") {
  Schedule sched;
  sched.grid = {10, 1.0};
  sched.movements = {{"a", MovementKind::Arrival, "AL1", 3},
                     {"d", MovementKind::Departure, "AL1", 8}};
  Connection conn;
  conn.id = "c";
  conn.arrival = 0;
  conn.departure = 1;
  sched.connections = {conn};
  CHECK_NOTHROW(sched.validate());

  SUBCASE("slot outside grid") {
    sched.movements[0].requested_slot = 10;
    CHECK_THROWS_AS(sched.validate(), SlotOutOfRangeError);
  }
  SUBCASE("mismatched kinds") {
    sched.connections[0].arrival = 1;
    sched.connections[0].departure = 0;
    CHECK_THROWS_AS(sched.validate(), InconsistentPairError);
  }
  SUBCASE("bad hea demand") {
    sched.connections[0].hea = HeaDemand{0.0, 100.0};
    CHECK_THROWS_AS(sched.validate(), Error);
  }
}
