#include "heasched/schedule.hpp"

#include <algorithm>

#include "heasched/errors.hpp"

namespace heasched {

int Schedule::movement_index(const std::string& id) const {
  for (size_t i = 0; i < movements.size(); ++i)
    if (movements[i].id == id) return static_cast<int>(i);
  return -1;
}

void Schedule::validate() const {
  if (grid.num_intervals < 1) throw Error("grid must have at least one interval");
  if (grid.dt_minutes <= 0.0) throw Error("interval length must be positive");
  for (const auto& m : movements) {
    if (!grid.contains(m.requested_slot))
      throw SlotOutOfRangeError("movement " + m.id + " requests slot " +
                                std::to_string(m.requested_slot) + " outside grid");
  }
  for (const auto& c : connections) {
    if (c.arrival < 0 || c.arrival >= static_cast<int>(movements.size()) || c.departure < 0 ||
        c.departure >= static_cast<int>(movements.size()))
      throw Error("connection " + c.id + " references missing movements");
    if (movements[c.arrival].kind != MovementKind::Arrival ||
        movements[c.departure].kind != MovementKind::Departure)
      throw InconsistentPairError(c.id, "connection " + c.id + " has mismatched movement kinds");
    if (c.min_connect_intervals < 0)
      throw Error("connection " + c.id + " has negative connect floor");
    if (c.hea && (c.hea->energy_wh <= 0.0 || c.hea->rate_cap_w <= 0.0))
      throw Error("connection " + c.id + " has non-positive HEA demand");
  }
}

AllocationMatrix::AllocationMatrix(const TimeGrid& grid, std::vector<int> slots)
    : grid_(grid), slots_(std::move(slots)) {
  for (size_t i = 0; i < slots_.size(); ++i)
    if (!grid_.contains(slots_[i]))
      throw SlotOutOfRangeError("allocation slot " + std::to_string(slots_[i]) +
                                " for movement index " + std::to_string(i) + " outside grid");
}

AllocationMatrix AllocationMatrix::encode(const TimeGrid& grid, const std::vector<int>& slots) {
  return AllocationMatrix(grid, slots);
}

std::vector<std::uint8_t> AllocationMatrix::row(int movement) const {
  std::vector<std::uint8_t> r(grid_.num_intervals, 0);
  for (int t = 0; t <= slots_[movement]; ++t) r[t] = 1;
  return r;
}

Displacement displacement(int requested_slot, int allocated_slot) {
  Displacement d;
  d.late = std::max(allocated_slot - requested_slot, 0);
  d.early = std::max(requested_slot - allocated_slot, 0);
  return d;
}

std::vector<CapacityViolation> check_capacity(const AllocationMatrix& alloc, int r_bar,
                                              int window_len) {
  if (r_bar < 0) throw Error("negative capacity");
  if (window_len < 1) throw Error("window length must be at least 1");
  const int t_max = alloc.num_intervals();
  std::vector<int> per_slot(t_max, 0);
  for (int i = 0; i < alloc.size(); ++i) per_slot[alloc.slot(i)] += 1;

  std::vector<CapacityViolation> violations;
  for (int t = 0; t < t_max; ++t) {
    int hi = std::min(t + window_len, t_max - 1);
    int count = 0;
    for (int tau = t; tau <= hi; ++tau) count += per_slot[tau];
    if (count > r_bar) violations.push_back({t, hi, count});
  }
  return violations;
}

bool check_connect(const AllocationMatrix& alloc, const Connection& conn) {
  return alloc.slot(conn.departure) - alloc.slot(conn.arrival) >= conn.min_connect_intervals;
}

}  // namespace heasched
