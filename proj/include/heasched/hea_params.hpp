#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heasched {

enum class AircraftClass { RegionalJet, SingleAisle };

std::string to_string(AircraftClass klass);
AircraftClass aircraft_class_from_string(std::string_view token);

// A battery technology point: specific energy density (Wh/kg) and motor
// factor (percent of required peak power the electric motor can deliver).
struct HybridConfig {
  double bsed_wh_per_kg = 0.0;
  double mf_percent = 0.0;

  bool operator==(const HybridConfig&) const = default;
};

inline constexpr std::array<double, 5> kBsedGrid{500.0, 700.0, 1000.0, 1250.0, 1500.0};
inline constexpr std::array<double, 3> kMfGrid{12.5, 25.0, 50.0};

// Battery usage (b0, Wh per passenger-mile) and maximum range (statute miles)
// for retrofit hybrid-electric variants of a regional jet (ERJ-175) and a
// single-aisle aircraft (Boeing 737-700), indexed by (BSED, MF). The
// (BSED=500, MF=50) cell has no viable variant in either class.
class ParamTable {
 public:
  struct Entry {
    AircraftClass klass;
    HybridConfig cfg;
    std::optional<double> b0_wh_per_pax_mile;
    std::optional<double> range_miles;
  };

  // The built-in table.
  static const ParamTable& bundled();

  // CSV with columns: class,bsed_wh_per_kg,mf_percent,b0_wh_per_pax_mile,
  // range_miles. Missing variants are encoded as empty cells.
  static ParamTable from_csv(const std::string& path);
  void write_csv(const std::string& path) const;

  bool on_grid(const HybridConfig& cfg) const;
  bool has_entry(AircraftClass klass, const HybridConfig& cfg) const;

  // Throw UnknownConfigError off the grid, MissingEntryError on empty cells.
  double b0_wh_per_pax_mile(AircraftClass klass, const HybridConfig& cfg) const;
  double max_range_miles(AircraftClass klass, const HybridConfig& cfg) const;

  // All 30 (class, BSED, MF) cells, including the empty ones.
  std::vector<Entry> entries() const;

 private:
  // [class][mf][bsed]; nullopt = no hybrid variant at that point.
  std::array<std::array<std::array<std::optional<double>, 5>, 3>, 2> b0_{};
  std::array<std::array<std::array<std::optional<double>, 5>, 3>, 2> range_{};
};

// True iff the config has a variant for the class and the flight distance is
// within its range. Missing/off-grid configs are simply not feasible.
bool is_hea_feasible(const ParamTable& table, AircraftClass klass, const HybridConfig& cfg,
                     double distance_miles);

// E = p * d * b0 (Wh).
double leg_energy_wh(double passengers, double distance_miles, double b0_wh_per_pax_mile);

// Seats scaled by load factor; kept fractional.
double passengers_from_seats(double seats, double load_factor = 0.85);

// Battery charging power cap from a C-rate, using the next leg's energy as
// the capacity proxy: cap = c_rate * E per hour.
double battery_rate_cap_w(double energy_wh, double c_rate_per_hour = 10.0);

}  // namespace heasched
