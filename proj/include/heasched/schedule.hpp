#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heasched {

struct TimeGrid {
  int num_intervals = 0;   // T
  double dt_minutes = 1.0;

  double dt_hours() const { return dt_minutes / 60.0; }
  bool contains(int slot) const { return slot >= 0 && slot < num_intervals; }
  // Clock minutes mapped by floor division.
  int slot_of_minute(double minute_of_day) const {
    return static_cast<int>(minute_of_day / dt_minutes);
  }
  double minute_of_slot(int slot) const { return slot * dt_minutes; }
};

enum class MovementKind { Arrival, Departure };

struct Movement {
  std::string id;
  MovementKind kind = MovementKind::Arrival;
  std::string airline;
  int requested_slot = 0;
};

struct HeaDemand {
  double energy_wh = 0.0;  // E for the next leg
  double rate_cap_w = 0.0;  // battery-side cap Q̄
};

// An (arrival, departure) pair flown by one aircraft. Movement fields are
// indices into Schedule::movements.
struct Connection {
  std::string id;
  int arrival = -1;
  int departure = -1;
  int min_connect_intervals = 0;
  std::optional<HeaDemand> hea;
};

struct Schedule {
  TimeGrid grid;
  std::vector<Movement> movements;
  std::vector<Connection> connections;

  int movement_index(const std::string& id) const;  // -1 when absent
  void validate() const;
};

// Step-shaped binary allocation: row i is (1,...,1,0,...,0) over t = 0..T-1
// and the position of the last one is the allocated interval. Rows are stored
// as that position; entries are derived.
class AllocationMatrix {
 public:
  AllocationMatrix() = default;
  AllocationMatrix(const TimeGrid& grid, std::vector<int> slots);

  static AllocationMatrix encode(const TimeGrid& grid, const std::vector<int>& slots);

  int size() const { return static_cast<int>(slots_.size()); }
  int num_intervals() const { return grid_.num_intervals; }
  const TimeGrid& grid() const { return grid_; }

  int slot(int movement) const { return slots_[movement]; }
  const std::vector<int>& slots() const { return slots_; }

  // Y_i^t, with Y_i^T defined as 0.
  int value(int movement, int t) const {
    return (t <= slots_[movement] && t < grid_.num_intervals) ? 1 : 0;
  }
  std::vector<std::uint8_t> row(int movement) const;

 private:
  TimeGrid grid_;
  std::vector<int> slots_;
};

// X+ (late) and X- (early) interval counts; at most one is nonzero.
struct Displacement {
  int late = 0;
  int early = 0;

  int total() const { return late + early; }
};

Displacement displacement(int requested_slot, int allocated_slot);

struct CapacityViolation {
  int window_start = 0;  // t
  int window_end = 0;    // min(t + L, T - 1)
  int count = 0;
};

// Windows [t, min(t+L, T-1)] whose movement count exceeds r_bar.
std::vector<CapacityViolation> check_capacity(const AllocationMatrix& alloc, int r_bar,
                                              int window_len);

// True iff allocated departure minus allocated arrival is at least the floor.
bool check_connect(const AllocationMatrix& alloc, const Connection& conn);

}  // namespace heasched
