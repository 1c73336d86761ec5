#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "heasched/analysis.hpp"
#include "heasched/hea_params.hpp"
#include "heasched/reschedule.hpp"
#include "heasched/schedule.hpp"

namespace heasched::ingest {

// Aircraft-level facts carried next to each movement row.
struct MovementMeta {
  std::string tail;
  int seats = 0;
  AircraftClass klass = AircraftClass::RegionalJet;
  double next_leg_distance_miles = 0.0;  // departures only
};

// The same facts folded per connection.
struct ConnectionMeta {
  std::string tail;
  int seats = 0;
  AircraftClass klass = AircraftClass::RegionalJet;
  double next_leg_distance_miles = 0.0;
  bool hea_candidate = false;  // dwell of at least 15 minutes
};

struct ParsedSchedule {
  Schedule schedule;  // connections carry no charging demand until configured
  std::vector<MovementMeta> mov_meta;  // aligned with schedule.movements
  std::vector<ConnectionMeta> meta;    // aligned with schedule.connections
  int start_minute = 0;  // clock minute of slot 0
  std::vector<std::string> warnings;
};

// CSV columns: movement_id, kind{A|D}, airline, tail, requested_hhmm, seats,
// aircraft_class{RJ|SA}, next_leg_distance_miles (departures), connect_id.
// Times are floored onto the grid; hours may exceed 23 for dwell past
// midnight.
ParsedSchedule parse_schedule(const std::string& path, const TimeGrid& grid,
                              int start_minute = 0);
ParsedSchedule parse_schedule_text(const std::string& text, const TimeGrid& grid,
                                   int start_minute = 0);
std::string schedule_to_string(const ParsedSchedule& parsed);
void write_schedule(const std::string& path, const ParsedSchedule& parsed);

// Attaches energy demand and battery rate cap to every HEA-candidate
// connection whose next leg fits the config's range. Returns how many
// connections were switched.
int apply_hybrid_config(ParsedSchedule& parsed, const ParamTable& table,
                        const HybridConfig& cfg, double load_factor = 0.85,
                        double c_rate_per_hour = 10.0);

// Flat key = value scenario file; unknown keys are errors.
struct ScenarioConfig {
  HybridConfig cfg{700.0, 25.0};
  double load_factor = 0.85;
  int t_intervals = 180;
  double dt_minutes = 2.0;
  int grid_start_minutes = 0;
  int r_bar = 45;
  int l_intervals = 30;
  double min_connect_minutes = 30.0;
  double p_bar_w = 20e6;
  double w_per_w2 = -1.0;  // negative = default 1 / p_bar^2
  double c_rate_per_hour = 10.0;
  double x_bar_minutes = 20.0;
  int drop_per_round = 1;

  TimeGrid grid() const { return {t_intervals, dt_minutes}; }
  double w_value() const { return w_per_w2 >= 0.0 ? w_per_w2 : 1.0 / (p_bar_w * p_bar_w); }
  int min_connect_intervals() const {
    return static_cast<int>(std::ceil(min_connect_minutes / dt_minutes - 1e-9));
  }
  int x_bar_intervals() const {
    return static_cast<int>(std::ceil(x_bar_minutes / dt_minutes - 1e-9));
  }
  void validate() const;
};

ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& text);

// Applies the hybrid config and the scenario parameters (connect floor,
// capacity, power cap, weight) to a parsed schedule.
reschedule::Scenario make_scenario(const ParsedSchedule& parsed, const ScenarioConfig& config,
                                   const ParamTable& table);

// Deterministic banked-wave schedule generator.
struct SynthParams {
  std::uint64_t seed = 1;
  int movements = 215;
  double hea_fraction = 0.3;  // movements that belong to HEA-capable pairs
  int bank_count = 6;
  TimeGrid grid{180, 2.0};
  int start_minute = 600;     // 10:00
  int airlines = 8;
  double pair_fraction = 0.8;
  int heavy_pairs = 1;        // short-dwell, high-energy connections
  HybridConfig cfg{700.0, 25.0};  // feasibility target for HEA candidates
};

ParsedSchedule generate_synthetic(const SynthParams& params);

std::vector<analysis::FlightLeg> to_flight_legs(const ParsedSchedule& parsed,
                                                const std::string& date = "");

}  // namespace heasched::ingest
