#pragma once

#include <string>
#include <vector>

#include "heasched/schedule.hpp"
#include "heasched/smart_charge.hpp"

namespace heasched::reschedule {

// One joint rescheduling-and-charging instance.
struct Scenario {
  Schedule schedule;
  int r_bar = 1;        // movements per capacity window
  int l_window = 1;     // window length L (window covers [t, t+L])
  double p_bar_w = 0.0;  // airport-wide charging cap
  double w_per_w2 = 0.0;  // flattening weight

  void validate() const;
  // Benchmark variant: drops all charging demands and the flattening term.
  Scenario without_charging() const;
};

// Structure summary of the mixed-integer model for one scenario. Building it
// also runs the feasibility prechecks.
struct ModelInfo {
  int num_movements = 0;
  int num_binary_vars = 0;        // movements x T step binaries
  int num_charge_vars = 0;        // HEA connections x T charging rates
  int num_linearization_rows = 0;  // rate <= cap * (Y_dep - Y_arr)
  int num_capacity_rows = 0;
  int num_connect_rows = 0;
  int num_energy_rows = 0;
  int num_power_rows = 0;
};

ModelInfo build_model(const Scenario& scenario);

enum class SolveStatus { Optimal, GapNotReached };

struct ObjectiveBreakdown {
  double max_disp = 0.0;
  double total_disp = 0.0;
  double flatten_w2 = 0.0;  // sum_t (aggregate power)^2
  double value = 0.0;       // max + total + w * flatten
};

struct RescheduleSolution {
  AllocationMatrix allocation;
  std::vector<Displacement> displacement;  // per movement
  ChargingProfile charging;                // one task per HEA connection
  ObjectiveBreakdown objective;
  double optimality_gap = 0.0;
  double best_bound = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  long nodes_explored = 0;
  double wall_seconds = 0.0;

  int max_displacement() const;
  int total_displacement() const;
  double peak_power_w() const { return charging.peak_w(); }
};

struct SolveOptions {
  double gap_tolerance = 1e-3;
  long max_nodes = 2000000;
  double time_limit_seconds = 3600.0;
  bool log = false;
};

RescheduleSolution solve(const Scenario& scenario, const SolveOptions& options = {});

// Joint solve with per-connection retention binaries: charging obligations are
// scaled by Z in {0,1}, rates are forced to zero when Z = 0, the objective
// gains -w_prime * sum(Z), and every displacement is capped by x_bar.
struct SwitchSolveResult {
  RescheduleSolution solution;
  std::vector<char> keep_hea;   // per HEA connection, scenario order
  double mechanism_objective = 0.0;  // includes the -w_prime term
};

SwitchSolveResult solve_with_switching(const Scenario& scenario, double w_prime,
                                       int x_bar_intervals, const SolveOptions& options = {});

// Independent constraint audit of a returned solution.
struct VerifyReport {
  struct Family {
    std::string name;
    bool pass = true;
    double worst_violation = 0.0;
    std::string detail;
  };
  std::vector<Family> families;

  bool all_pass() const;
  std::string summary() const;
};

VerifyReport verify(const RescheduleSolution& solution, const Scenario& scenario);

}  // namespace heasched::reschedule
