#include "heasched/hea_params.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "heasched/csv.hpp"
#include "heasched/errors.hpp"

namespace heasched {

namespace {

// b0 in Wh per passenger-mile, [mf][bsed] with mf in {12.5, 25, 50} and
// bsed in {500, 700, 1000, 1250, 1500}. -1 marks the missing variant.
constexpr double kB0RegionalJet[3][5] = {
    {31.1, 30.7, 30.4, 30.2, 30.0},
    {64.8, 63.6, 62.6, 62.1, 61.6},
    {-1.0, 133.3, 130.6, 129.1, 127.9},
};
constexpr double kB0SingleAisle[3][5] = {
    {26.5, 26.3, 25.7, 25.4, 25.2},
    {57.3, 55.5, 54.0, 53.2, 52.6},
    {-1.0, 119.8, 115.1, 112.8, 111.2},
};

// Maximum range in statute miles, same indexing.
constexpr double kRangeRegionalJet[3][5] = {
    {683.1, 914.2, 1170.7, 1339.7, 1476.6},
    {305.9, 484.1, 714.1, 877.45, 1020.1},
    {-1.0, 170.2, 331.2, 458.8, 579.6},
};
constexpr double kRangeSingleAisle[3][5] = {
    {1110.9, 1466.2, 1876.8, 2141.3, 2357.5},
    {558.9, 836.1, 1193.7, 1452.4, 1680.1},
    {-1.0, 376.1, 637.1, 842.9, 1038.4},
};

int grid_index(double value, const auto& grid) {
  for (size_t i = 0; i < grid.size(); ++i)
    if (std::abs(value - grid[i]) < 1e-9) return static_cast<int>(i);
  return -1;
}

std::string cfg_string(const HybridConfig& cfg) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(bsed=%g, mf=%g)", cfg.bsed_wh_per_kg, cfg.mf_percent);
  return buf;
}

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string to_string(AircraftClass klass) {
  return klass == AircraftClass::RegionalJet ? "RJ" : "SA";
}

AircraftClass aircraft_class_from_string(std::string_view token) {
  if (token == "RJ" || token == "RegionalJet" || token == "regional_jet")
    return AircraftClass::RegionalJet;
  if (token == "SA" || token == "SingleAisle" || token == "single_aisle")
    return AircraftClass::SingleAisle;
  throw Error("unknown aircraft class: " + std::string(token));
}

const ParamTable& ParamTable::bundled() {
  static const ParamTable table = [] {
    ParamTable t;
    for (int m = 0; m < 3; ++m) {
      for (int b = 0; b < 5; ++b) {
        auto put = [&](int klass, const double (&b0)[3][5], const double (&range)[3][5]) {
          if (b0[m][b] > 0.0) t.b0_[klass][m][b] = b0[m][b];
          if (range[m][b] > 0.0) t.range_[klass][m][b] = range[m][b];
        };
        put(0, kB0RegionalJet, kRangeRegionalJet);
        put(1, kB0SingleAisle, kRangeSingleAisle);
      }
    }
    return t;
  }();
  return table;
}

bool ParamTable::on_grid(const HybridConfig& cfg) const {
  return grid_index(cfg.bsed_wh_per_kg, kBsedGrid) >= 0 &&
         grid_index(cfg.mf_percent, kMfGrid) >= 0;
}

bool ParamTable::has_entry(AircraftClass klass, const HybridConfig& cfg) const {
  if (!on_grid(cfg)) return false;
  int m = grid_index(cfg.mf_percent, kMfGrid);
  int b = grid_index(cfg.bsed_wh_per_kg, kBsedGrid);
  return b0_[static_cast<int>(klass)][m][b].has_value();
}

double ParamTable::b0_wh_per_pax_mile(AircraftClass klass, const HybridConfig& cfg) const {
  int m = grid_index(cfg.mf_percent, kMfGrid);
  int b = grid_index(cfg.bsed_wh_per_kg, kBsedGrid);
  if (m < 0 || b < 0) throw UnknownConfigError("no table grid point at " + cfg_string(cfg));
  const auto& cell = b0_[static_cast<int>(klass)][m][b];
  if (!cell) throw MissingEntryError("no hybrid-electric variant at " + cfg_string(cfg));
  return *cell;
}

double ParamTable::max_range_miles(AircraftClass klass, const HybridConfig& cfg) const {
  int m = grid_index(cfg.mf_percent, kMfGrid);
  int b = grid_index(cfg.bsed_wh_per_kg, kBsedGrid);
  if (m < 0 || b < 0) throw UnknownConfigError("no table grid point at " + cfg_string(cfg));
  const auto& cell = range_[static_cast<int>(klass)][m][b];
  if (!cell) throw MissingEntryError("no hybrid-electric variant at " + cfg_string(cfg));
  return *cell;
}

std::vector<ParamTable::Entry> ParamTable::entries() const {
  std::vector<Entry> out;
  for (int k = 0; k < 2; ++k)
    for (int m = 0; m < 3; ++m)
      for (int b = 0; b < 5; ++b)
        out.push_back({static_cast<AircraftClass>(k),
                       {kBsedGrid[b], kMfGrid[m]},
                       b0_[k][m][b],
                       range_[k][m][b]});
  return out;
}

ParamTable ParamTable::from_csv(const std::string& path) {
  auto table = csv::read_file(path);
  int c_class = table.require_column("class");
  int c_bsed = table.require_column("bsed_wh_per_kg");
  int c_mf = table.require_column("mf_percent");
  int c_b0 = table.require_column("b0_wh_per_pax_mile");
  int c_range = table.require_column("range_miles");

  ParamTable out;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    long line = table.line_numbers[r];
    AircraftClass klass;
    try {
      klass = aircraft_class_from_string(row[c_class]);
    } catch (const Error&) {
      throw ParseError(line, "class", "unknown aircraft class '" + row[c_class] + "'");
    }
    int m = grid_index(std::atof(row[c_mf].c_str()), kMfGrid);
    int b = grid_index(std::atof(row[c_bsed].c_str()), kBsedGrid);
    if (m < 0) throw ParseError(line, "mf_percent", "off-grid value '" + row[c_mf] + "'");
    if (b < 0) throw ParseError(line, "bsed_wh_per_kg", "off-grid value '" + row[c_bsed] + "'");
    int k = static_cast<int>(klass);
    if (!row[c_b0].empty()) out.b0_[k][m][b] = std::atof(row[c_b0].c_str());
    if (!row[c_range].empty()) out.range_[k][m][b] = std::atof(row[c_range].c_str());
  }
  return out;
}

void ParamTable::write_csv(const std::string& path) const {
  csv::Table out;
  out.header = {"class", "bsed_wh_per_kg", "mf_percent", "b0_wh_per_pax_mile", "range_miles"};
  for (const auto& e : entries()) {
    out.rows.push_back({to_string(e.klass), format_value(e.cfg.bsed_wh_per_kg),
                        format_value(e.cfg.mf_percent),
                        e.b0_wh_per_pax_mile ? format_value(*e.b0_wh_per_pax_mile) : "",
                        e.range_miles ? format_value(*e.range_miles) : ""});
  }
  csv::write_file(path, out);
}

bool is_hea_feasible(const ParamTable& table, AircraftClass klass, const HybridConfig& cfg,
                     double distance_miles) {
  if (distance_miles < 0.0) throw Error("negative flight distance");
  if (!table.has_entry(klass, cfg)) return false;
  return distance_miles <= table.max_range_miles(klass, cfg);
}

double leg_energy_wh(double passengers, double distance_miles, double b0_wh_per_pax_mile) {
  if (passengers < 0.0 || distance_miles < 0.0 || b0_wh_per_pax_mile <= 0.0)
    throw Error("leg energy requires p >= 0, d >= 0, b0 > 0");
  return passengers * distance_miles * b0_wh_per_pax_mile;
}

double passengers_from_seats(double seats, double load_factor) {
  if (seats < 0.0) throw Error("negative seat count");
  if (load_factor < 0.0 || load_factor > 1.0) throw Error("load factor outside [0, 1]");
  return seats * load_factor;
}

double battery_rate_cap_w(double energy_wh, double c_rate_per_hour) {
  if (energy_wh < 0.0) throw Error("negative energy");
  if (c_rate_per_hour <= 0.0) throw Error("C-rate must be positive");
  return c_rate_per_hour * energy_wh;
}

}  // namespace heasched
