#include "heasched/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "heasched/errors.hpp"

namespace heasched::analysis {

namespace {

double lower_median(std::vector<double> values) {
  if (values.empty()) return -1.0;
  std::sort(values.begin(), values.end());
  return values[(values.size() - 1) / 2];
}

}  // namespace

std::vector<FlightLeg> filter_hea(const std::vector<FlightLeg>& legs, const ParamTable& table,
                                  const HybridConfig& cfg) {
  std::vector<FlightLeg> out;
  for (const auto& leg : legs)
    if (leg.dwell_ok && is_hea_feasible(table, leg.klass, cfg, leg.distance_miles))
      out.push_back(leg);
  return out;
}

double DailyProfile::peak_w() const {
  return total_w.empty() ? 0.0 : *std::max_element(total_w.begin(), total_w.end());
}

DailyProfile daily_naive_profile(const std::vector<FlightLeg>& day_legs, const ParamTable& table,
                                 const HybridConfig& cfg, double load_factor) {
  DailyProfile profile;
  if (!day_legs.empty()) profile.date = day_legs.front().date;
  profile.total_w.assign(kMinutesPerDay, 0.0);
  profile.regional_w.assign(kMinutesPerDay, 0.0);
  profile.single_aisle_w.assign(kMinutesPerDay, 0.0);

  for (const auto& leg : day_legs) {
    int dwell = leg.dwell_minutes();
    if (dwell <= 0) throw ZeroDwellError("leg " + leg.connection_id + " has no dwell");
    double b0 = table.b0_wh_per_pax_mile(leg.klass, cfg);
    double energy = leg_energy_wh(passengers_from_seats(leg.seats, load_factor),
                                  leg.distance_miles, b0);
    double rate_w = energy / (dwell / 60.0);

    int last = leg.dep_minute - 1;
    if (last >= kMinutesPerDay) {
      last = kMinutesPerDay - 1;
      profile.truncated.push_back(leg.connection_id);
    }
    auto& sub = leg.klass == AircraftClass::RegionalJet ? profile.regional_w
                                                        : profile.single_aisle_w;
    for (int m = leg.arr_minute; m <= last; ++m) {
      sub[m] += rate_w;
      profile.total_w[m] += rate_w;
    }
  }
  return profile;
}

std::vector<double> daily_peaks_w(const std::vector<DailyProfile>& profiles) {
  std::vector<double> peaks;
  peaks.reserve(profiles.size());
  for (const auto& p : profiles) peaks.push_back(p.peak_w());
  return peaks;
}

double annual_energy_gwh(const std::vector<FlightLeg>& legs, const ParamTable& table,
                         const HybridConfig& cfg, double load_factor) {
  double wh = 0.0;
  for (const auto& leg : filter_hea(legs, table, cfg)) {
    double b0 = table.b0_wh_per_pax_mile(leg.klass, cfg);
    wh += leg_energy_wh(passengers_from_seats(leg.seats, load_factor), leg.distance_miles, b0);
  }
  return wh / 1e9;
}

DistanceHistogram distance_histogram(const std::vector<FlightLeg>& legs, double bin_miles) {
  if (bin_miles <= 0.0) throw Error("bin width must be positive");
  DistanceHistogram hist;
  hist.bin_miles = bin_miles;
  std::vector<double> rj, sa;
  double max_d = 0.0;
  for (const auto& leg : legs) max_d = std::max(max_d, leg.distance_miles);
  size_t bins = static_cast<size_t>(max_d / bin_miles) + 1;
  hist.regional_counts.assign(bins, 0);
  hist.single_aisle_counts.assign(bins, 0);
  for (const auto& leg : legs) {
    size_t bin = static_cast<size_t>(leg.distance_miles / bin_miles);
    if (leg.klass == AircraftClass::RegionalJet) {
      hist.regional_counts[bin] += 1;
      rj.push_back(leg.distance_miles);
    } else {
      hist.single_aisle_counts[bin] += 1;
      sa.push_back(leg.distance_miles);
    }
  }
  hist.regional_median_miles = lower_median(std::move(rj));
  hist.single_aisle_median_miles = lower_median(std::move(sa));
  return hist;
}

AnnualSummary summarize(const std::string& airport, const std::vector<FlightLeg>& legs,
                        const ParamTable& table, const HybridConfig& cfg, double load_factor) {
  AnnualSummary summary;
  summary.airport = airport;
  summary.cfg = cfg;

  auto switched = filter_hea(legs, table, cfg);
  summary.switched_count = static_cast<long>(switched.size());
  summary.total_energy_gwh = annual_energy_gwh(legs, table, cfg, load_factor);

  std::map<std::string, std::vector<FlightLeg>> by_date;
  for (const auto& leg : switched) by_date[leg.date].push_back(leg);
  for (const auto& [date, day_legs] : by_date) {
    auto profile = daily_naive_profile(day_legs, table, cfg, load_factor);
    summary.dates.push_back(date);
    summary.daily_peaks_w.push_back(profile.peak_w());
  }
  return summary;
}

}  // namespace heasched::analysis
