#pragma once

#include <string>
#include <vector>

#include "heasched/reschedule.hpp"

namespace heasched::mechanisms {

// Per HEA connection: true = remains hybrid-electric, false = switched back
// to a conventional aircraft. Order follows the scenario's HEA connections.
struct SwitchDecision {
  std::vector<std::string> connection_ids;
  std::vector<char> keep;

  int retained() const;
  int switched() const;
};

// Constant-rate power that would deliver the connection's energy over its
// dwell (departure slot minus arrival slot).
double uniform_rate_w(double energy_wh, int dwell_intervals, const TimeGrid& grid);
double uniform_rate_w(const Schedule& schedule, const Connection& conn);  // requested slots
double uniform_rate_w(const Connection& conn, const AllocationMatrix& alloc);

struct RoundTraceEntry {
  int round = 0;
  std::string airline;
  std::string connection_id;
  std::string action;  // "keep" or "switch"
  double max_disp_after = 0.0;
  double peak_power_after_w = 0.0;
};

struct NegotiationResult {
  SwitchDecision decision;
  reschedule::RescheduleSolution solution;
  int rounds = 0;
  int solver_calls = 0;  // joint solves run by the mechanism itself
  std::vector<RoundTraceEntry> trace;
};

// Airport-controlled exact variant: retention binaries inside the joint
// model, objective reward w_prime per retained connection, displacements
// hard-capped at x_bar.
NegotiationResult airport_switch_optimize(const reschedule::Scenario& scenario, double w_prime,
                                          int x_bar_intervals,
                                          const reschedule::SolveOptions& options = {});

// Airport-controlled heuristic: rank HEA connections by uniform charging rate
// (descending; ties by larger energy, then id) and switch one per round until
// the max displacement is acceptable. `initial` may carry the already-solved
// all-HEA schedule; otherwise it is solved here.
NegotiationResult airport_switch_heuristic(const reschedule::Scenario& scenario,
                                           int x_bar_intervals,
                                           const reschedule::SolveOptions& options = {},
                                           const reschedule::RescheduleSolution* initial = nullptr);

// Airline-side counterpart: every airline that still operates HEA drops its
// own top-ranked connection(s) each round.
NegotiationResult airline_iterative_drop(const reschedule::Scenario& scenario,
                                         int x_bar_intervals, int drop_per_round = 1,
                                         const reschedule::SolveOptions& options = {},
                                         const reschedule::RescheduleSolution* initial = nullptr);

}  // namespace heasched::mechanisms
