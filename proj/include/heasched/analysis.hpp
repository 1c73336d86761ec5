#pragma once

#include <string>
#include <vector>

#include "heasched/hea_params.hpp"
#include "heasched/schedule.hpp"

namespace heasched::analysis {

// One connection seen as an analytics record: the aircraft sits at the gate
// from arr_minute to dep_minute and then flies distance_miles.
struct FlightLeg {
  std::string date;  // day key; empty for single-day inputs
  std::string tail;
  std::string connection_id;
  AircraftClass klass = AircraftClass::RegionalJet;
  int seats = 0;
  double distance_miles = 0.0;
  int arr_minute = 0;
  int dep_minute = 0;  // may exceed 1439 when the dwell crosses midnight
  bool dwell_ok = true;  // the >= 15 min ingestion filter

  int dwell_minutes() const { return dep_minute - arr_minute; }
};

// Legs that can switch to HEA under the config (range test plus dwell filter).
std::vector<FlightLeg> filter_hea(const std::vector<FlightLeg>& legs, const ParamTable& table,
                                  const HybridConfig& cfg);

inline constexpr int kMinutesPerDay = 1440;

// Aggregate naive (constant-rate) charging power on the 1440 x 1-min grid,
// split by aircraft class. Input legs must already be HEA-filtered.
struct DailyProfile {
  std::string date;
  std::vector<double> total_w;
  std::vector<double> regional_w;
  std::vector<double> single_aisle_w;
  std::vector<std::string> truncated;  // legs clipped at the day boundary

  double peak_w() const;
};

DailyProfile daily_naive_profile(const std::vector<FlightLeg>& day_legs, const ParamTable& table,
                                 const HybridConfig& cfg, double load_factor = 0.85);

std::vector<double> daily_peaks_w(const std::vector<DailyProfile>& profiles);

// Sum of leg energies over the HEA-switched subset, in GWh.
double annual_energy_gwh(const std::vector<FlightLeg>& legs, const ParamTable& table,
                         const HybridConfig& cfg, double load_factor = 0.85);

struct DistanceHistogram {
  double bin_miles = 100.0;
  std::vector<long> regional_counts;
  std::vector<long> single_aisle_counts;
  // Lower medians; negative when the class is absent.
  double regional_median_miles = -1.0;
  double single_aisle_median_miles = -1.0;
};

DistanceHistogram distance_histogram(const std::vector<FlightLeg>& legs, double bin_miles);

struct AnnualSummary {
  std::string airport;
  HybridConfig cfg;
  double total_energy_gwh = 0.0;
  long switched_count = 0;
  std::vector<std::string> dates;
  std::vector<double> daily_peaks_w;
};

// Groups legs by date, filters, and aggregates energy and daily peaks.
AnnualSummary summarize(const std::string& airport, const std::vector<FlightLeg>& legs,
                        const ParamTable& table, const HybridConfig& cfg,
                        double load_factor = 0.85);

}  // namespace heasched::analysis
