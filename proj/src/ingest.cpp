#include "heasched/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "heasched/csv.hpp"
#include "heasched/errors.hpp"
#include "heasched/rng.hpp"

namespace heasched::ingest {

namespace {

int parse_hhmm(const std::string& text, long line) {
  int h = 0, m = 0;
  char extra;
  if (std::sscanf(text.c_str(), "%d:%d%c", &h, &m, &extra) != 2 || h < 0 || m < 0 || m > 59)
    throw ParseError(line, "requested_hhmm", "bad time '" + text + "'");
  return h * 60 + m;
}

std::string format_hhmm(int minute) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d", minute / 60, minute % 60);
  return buf;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

long parse_long(const std::string& text, long line, const std::string& column) {
  try {
    size_t pos = 0;
    long v = std::stol(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, column, "bad integer '" + text + "'");
  }
}

double parse_double(const std::string& text, long line, const std::string& column) {
  try {
    size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError(line, column, "bad number '" + text + "'");
  }
}

}  // namespace

ParsedSchedule parse_schedule_text(const std::string& text, const TimeGrid& grid,
                                   int start_minute) {
  auto table = csv::read_string(text);
  ParsedSchedule out;
  out.schedule.grid = grid;
  out.start_minute = start_minute;
  if (table.header.empty()) return out;  // empty file: empty schedule

  int c_id = table.require_column("movement_id");
  int c_kind = table.require_column("kind");
  int c_airline = table.require_column("airline");
  int c_tail = table.require_column("tail");
  int c_time = table.require_column("requested_hhmm");
  int c_seats = table.require_column("seats");
  int c_class = table.require_column("aircraft_class");
  int c_dist = table.require_column("next_leg_distance_miles");
  int c_conn = table.require_column("connect_id");

  struct PendingPair {
    int first_row = -1;
    int second_row = -1;
  };
  std::map<std::string, PendingPair> pairs;
  std::vector<std::string> pair_order;
  std::vector<int> minute_of_mov;

  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    long line = table.line_numbers[r];

    Movement mv;
    mv.id = row[c_id];
    if (mv.id.empty()) throw ParseError(line, "movement_id", "empty id");
    if (out.schedule.movement_index(mv.id) >= 0)
      throw ParseError(line, "movement_id", "duplicate id '" + mv.id + "'");
    if (row[c_kind] == "A")
      mv.kind = MovementKind::Arrival;
    else if (row[c_kind] == "D")
      mv.kind = MovementKind::Departure;
    else
      throw ParseError(line, "kind", "expected A or D, got '" + row[c_kind] + "'");
    mv.airline = row[c_airline];

    int minute = parse_hhmm(row[c_time], line);
    double offset = minute - start_minute;
    if (offset < 0.0)
      throw ParseError(line, "requested_hhmm", "time before the scheduling horizon");
    mv.requested_slot = grid.slot_of_minute(offset);
    if (!grid.contains(mv.requested_slot))
      throw ParseError(line, "requested_hhmm", "time after the scheduling horizon");

    MovementMeta meta;
    meta.tail = row[c_tail];
    long seats = parse_long(row[c_seats], line, "seats");
    if (seats <= 0) throw ParseError(line, "seats", "seat count must be positive");
    meta.seats = static_cast<int>(seats);
    try {
      meta.klass = aircraft_class_from_string(row[c_class]);
    } catch (const Error&) {
      throw ParseError(line, "aircraft_class", "unknown class '" + row[c_class] + "'");
    }
    if (!row[c_dist].empty()) {
      meta.next_leg_distance_miles = parse_double(row[c_dist], line, "next_leg_distance_miles");
      if (meta.next_leg_distance_miles <= 0.0)
        throw ParseError(line, "next_leg_distance_miles", "distance must be positive");
    } else if (mv.kind == MovementKind::Departure) {
      throw ParseError(line, "next_leg_distance_miles", "departures need a next-leg distance");
    }

    int mov_index = static_cast<int>(out.schedule.movements.size());
    out.schedule.movements.push_back(mv);
    out.mov_meta.push_back(meta);
    minute_of_mov.push_back(minute);

    const std::string& cid = row[c_conn];
    if (!cid.empty()) {
      auto [it, inserted] = pairs.try_emplace(cid);
      if (inserted) pair_order.push_back(cid);
      if (it->second.first_row < 0)
        it->second.first_row = mov_index;
      else if (it->second.second_row < 0)
        it->second.second_row = mov_index;
      else
        throw InconsistentPairError(cid, "connect_id '" + cid + "' appears more than twice");
    }
  }

  for (const auto& cid : pair_order) {
    const auto& p = pairs[cid];
    if (p.second_row < 0)
      throw InconsistentPairError(cid, "connect_id '" + cid + "' is unpaired");
    int a = p.first_row, b = p.second_row;
    if (out.schedule.movements[a].kind == MovementKind::Departure) std::swap(a, b);
    if (out.schedule.movements[a].kind != MovementKind::Arrival ||
        out.schedule.movements[b].kind != MovementKind::Departure)
      throw InconsistentPairError(cid, "connect_id '" + cid + "' must pair one arrival with one departure");
    if (minute_of_mov[b] < minute_of_mov[a])
      throw InconsistentPairError(cid, "connect_id '" + cid + "' departs before it arrives");
    if (out.mov_meta[a].tail != out.mov_meta[b].tail ||
        out.schedule.movements[a].airline != out.schedule.movements[b].airline ||
        out.mov_meta[a].seats != out.mov_meta[b].seats ||
        out.mov_meta[a].klass != out.mov_meta[b].klass)
      throw InconsistentPairError(cid, "connect_id '" + cid + "' mixes two aircraft");

    Connection conn;
    conn.id = cid;
    conn.arrival = a;
    conn.departure = b;
    out.schedule.connections.push_back(conn);

    ConnectionMeta cm;
    cm.tail = out.mov_meta[a].tail;
    cm.seats = out.mov_meta[a].seats;
    cm.klass = out.mov_meta[a].klass;
    cm.next_leg_distance_miles = out.mov_meta[b].next_leg_distance_miles;
    cm.hea_candidate = (minute_of_mov[b] - minute_of_mov[a]) >= 15;
    if (!cm.hea_candidate)
      out.warnings.push_back("connection " + cid + " has dwell under 15 minutes");
    out.meta.push_back(cm);
  }

  out.schedule.validate();
  return out;
}

ParsedSchedule parse_schedule(const std::string& path, const TimeGrid& grid, int start_minute) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, path, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_schedule_text(buffer.str(), grid, start_minute);
}

std::string schedule_to_string(const ParsedSchedule& parsed) {
  csv::Table table;
  table.header = {"movement_id", "kind",           "airline",
                  "tail",        "requested_hhmm", "seats",
                  "aircraft_class", "next_leg_distance_miles", "connect_id"};

  std::vector<std::string> conn_of_mov(parsed.schedule.movements.size());
  for (const auto& conn : parsed.schedule.connections) {
    conn_of_mov[conn.arrival] = conn.id;
    conn_of_mov[conn.departure] = conn.id;
  }
  const auto& grid = parsed.schedule.grid;
  for (size_t i = 0; i < parsed.schedule.movements.size(); ++i) {
    const auto& mv = parsed.schedule.movements[i];
    const auto& meta = parsed.mov_meta[i];
    int minute = parsed.start_minute +
                 static_cast<int>(std::llround(mv.requested_slot * grid.dt_minutes));
    table.rows.push_back(
        {mv.id, mv.kind == MovementKind::Arrival ? "A" : "D", mv.airline, meta.tail,
         format_hhmm(minute), std::to_string(meta.seats), to_string(meta.klass),
         meta.next_leg_distance_miles > 0.0 ? format_number(meta.next_leg_distance_miles) : "",
         conn_of_mov[i]});
  }
  return csv::to_string(table);
}

void write_schedule(const std::string& path, const ParsedSchedule& parsed) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << schedule_to_string(parsed);
  if (!out) throw Error("write failed: " + path);
}

int apply_hybrid_config(ParsedSchedule& parsed, const ParamTable& table, const HybridConfig& cfg,
                        double load_factor, double c_rate_per_hour) {
  int switched = 0;
  for (size_t c = 0; c < parsed.schedule.connections.size(); ++c) {
    auto& conn = parsed.schedule.connections[c];
    const auto& meta = parsed.meta[c];
    conn.hea.reset();
    if (!meta.hea_candidate) continue;
    if (!is_hea_feasible(table, meta.klass, cfg, meta.next_leg_distance_miles)) continue;
    double b0 = table.b0_wh_per_pax_mile(meta.klass, cfg);
    double energy = leg_energy_wh(passengers_from_seats(meta.seats, load_factor),
                                  meta.next_leg_distance_miles, b0);
    conn.hea = HeaDemand{energy, battery_rate_cap_w(energy, c_rate_per_hour)};
    ++switched;
  }
  return switched;
}

void ScenarioConfig::validate() const {
  if (load_factor < 0.0 || load_factor > 1.0) throw ConfigError("load_factor outside [0, 1]");
  if (t_intervals < 1) throw ConfigError("t_intervals must be at least 1");
  if (dt_minutes <= 0.0) throw ConfigError("dt_minutes must be positive");
  if (grid_start_minutes < 0) throw ConfigError("grid_start_minutes must be nonnegative");
  if (r_bar < 1) throw ConfigError("r_bar must be at least 1");
  if (l_intervals < 1) throw ConfigError("l_intervals must be at least 1");
  if (min_connect_minutes < 0.0) throw ConfigError("min_connect_minutes must be nonnegative");
  if (p_bar_w <= 0.0) throw ConfigError("p_bar_w must be positive");
  if (c_rate_per_hour <= 0.0) throw ConfigError("c_rate_per_hour must be positive");
  if (x_bar_minutes < 0.0) throw ConfigError("x_bar_minutes must be nonnegative");
  if (drop_per_round < 1) throw ConfigError("drop_per_round must be at least 1");
}

ScenarioConfig parse_config_text(const std::string& text) {
  ScenarioConfig cfg;
  std::stringstream ss(text);
  std::string line;
  long line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto strip = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    auto num = [&] {
      try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return v;
      } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + value + "'");
      }
    };
    if (key == "bsed_wh_per_kg")
      cfg.cfg.bsed_wh_per_kg = num();
    else if (key == "mf_percent")
      cfg.cfg.mf_percent = num();
    else if (key == "load_factor")
      cfg.load_factor = num();
    else if (key == "t_intervals")
      cfg.t_intervals = static_cast<int>(num());
    else if (key == "dt_minutes")
      cfg.dt_minutes = num();
    else if (key == "grid_start_minutes")
      cfg.grid_start_minutes = static_cast<int>(num());
    else if (key == "r_bar")
      cfg.r_bar = static_cast<int>(num());
    else if (key == "l_intervals")
      cfg.l_intervals = static_cast<int>(num());
    else if (key == "min_connect_minutes")
      cfg.min_connect_minutes = num();
    else if (key == "p_bar_w")
      cfg.p_bar_w = num();
    else if (key == "w_per_w2")
      cfg.w_per_w2 = value == "auto" ? -1.0 : num();
    else if (key == "c_rate_per_hour")
      cfg.c_rate_per_hour = num();
    else if (key == "x_bar_minutes")
      cfg.x_bar_minutes = num();
    else if (key == "drop_per_round")
      cfg.drop_per_round = static_cast<int>(num());
    else
      throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

reschedule::Scenario make_scenario(const ParsedSchedule& parsed, const ScenarioConfig& config,
                                   const ParamTable& table) {
  config.validate();
  if (parsed.schedule.grid.num_intervals != config.t_intervals ||
      parsed.schedule.grid.dt_minutes != config.dt_minutes)
    throw ConfigError("schedule grid does not match the scenario config");

  ParsedSchedule working = parsed;
  apply_hybrid_config(working, table, config.cfg, config.load_factor, config.c_rate_per_hour);
  for (auto& conn : working.schedule.connections)
    conn.min_connect_intervals = config.min_connect_intervals();

  reschedule::Scenario scenario;
  scenario.schedule = std::move(working.schedule);
  scenario.r_bar = config.r_bar;
  scenario.l_window = config.l_intervals;
  scenario.p_bar_w = config.p_bar_w;
  scenario.w_per_w2 = config.w_value();
  return scenario;
}

ParsedSchedule generate_synthetic(const SynthParams& params) {
  if (params.movements < 0) throw Error("negative movement count");
  Rng rng(params.seed);
  const auto& table = ParamTable::bundled();
  const int t_count = params.grid.num_intervals;
  const double dt = params.grid.dt_minutes;

  int pairs = static_cast<int>(params.movements * params.pair_fraction / 2.0);
  int hea_pairs =
      std::min(pairs, static_cast<int>(std::llround(params.movements * params.hea_fraction / 2.0)));
  int singles = params.movements - 2 * pairs;
  int heavy = std::min(params.heavy_pairs, hea_pairs);

  csv::Table table_out;
  table_out.header = {"movement_id", "kind",           "airline",
                      "tail",        "requested_hhmm", "seats",
                      "aircraft_class", "next_leg_distance_miles", "connect_id"};

  auto bank_slot = [&](int margin_hi) {
    int bank = static_cast<int>(rng.uniform_int(0, params.bank_count - 1));
    double center = t_count * (2.0 * bank + 1.0) / (2.0 * params.bank_count);
    double sd = t_count / (params.bank_count * 4.0);
    int slot = static_cast<int>(std::llround(rng.normal(center, sd)));
    return std::clamp(slot, 1, t_count - 1 - margin_hi);
  };
  auto hhmm_of_slot = [&](int slot) {
    return format_hhmm(params.start_minute + static_cast<int>(std::llround(slot * dt)));
  };

  int mov_seq = 0;
  auto mov_id = [&] {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "M%04d", mov_seq++);
    return std::string(buf);
  };

  constexpr int kRjSeats[3] = {66, 70, 76};
  constexpr int kSaSeats[3] = {126, 137, 143};

  for (int p = 0; p < pairs; ++p) {
    bool is_hea = p < hea_pairs;
    bool is_heavy = p < heavy;
    std::string airline = "AL" + std::to_string(1 + p % params.airlines);
    std::string tail = "N" + std::to_string(100 + p) + "HS";
    char cbuf[16];
    std::snprintf(cbuf, sizeof(cbuf), "C%03d", p);
    std::string cid = cbuf;

    AircraftClass klass;
    int seats;
    double dist;
    int dwell;
    if (is_heavy) {
      klass = AircraftClass::SingleAisle;
      seats = kSaSeats[2];
      dist = table.max_range_miles(klass, params.cfg) * 0.985;
      dwell = static_cast<int>(rng.uniform_int(16, 18));
    } else if (is_hea) {
      klass = rng.uniform() < 0.45 ? AircraftClass::RegionalJet : AircraftClass::SingleAisle;
      double range = table.max_range_miles(klass, params.cfg);
      if (klass == AircraftClass::RegionalJet) {
        seats = kRjSeats[rng.uniform_int(0, 2)];
        dist = rng.uniform(std::min(180.0, range * 0.5), range - 10.0);
      } else {
        seats = kSaSeats[rng.uniform_int(0, 2)];
        dist = rng.uniform(std::min(250.0, range * 0.5), range - 10.0);
      }
      dwell = static_cast<int>(rng.uniform_int(18, 45));
    } else {
      klass = rng.uniform() < 0.5 ? AircraftClass::RegionalJet : AircraftClass::SingleAisle;
      double range = table.max_range_miles(klass, params.cfg);
      dist = rng.uniform(range + 50.0, 2300.0);
      seats = klass == AircraftClass::RegionalJet ? kRjSeats[rng.uniform_int(0, 2)]
                                                  : kSaSeats[rng.uniform_int(0, 2)];
      dwell = static_cast<int>(rng.uniform_int(15, 60));
    }
    dwell = std::min(dwell, t_count - 3);
    int arr = bank_slot(dwell + 1);
    int dep = arr + dwell;

    table_out.rows.push_back({mov_id(), "A", airline, tail, hhmm_of_slot(arr),
                              std::to_string(seats), to_string(klass), "", cid});
    table_out.rows.push_back({mov_id(), "D", airline, tail, hhmm_of_slot(dep),
                              std::to_string(seats), to_string(klass), format_number(dist),
                              cid});
  }

  for (int s = 0; s < singles; ++s) {
    bool arrival = s % 2 == 0;
    std::string airline = "AL" + std::to_string(1 + static_cast<int>(rng.uniform_int(
                                                        0, params.airlines - 1)));
    std::string tail = "N" + std::to_string(500 + s) + "HS";
    AircraftClass klass =
        rng.uniform() < 0.5 ? AircraftClass::RegionalJet : AircraftClass::SingleAisle;
    int seats = klass == AircraftClass::RegionalJet ? kRjSeats[rng.uniform_int(0, 2)]
                                                    : kSaSeats[rng.uniform_int(0, 2)];
    double dist = rng.uniform(300.0, 2300.0);
    int slot = bank_slot(1);
    table_out.rows.push_back({mov_id(), arrival ? "A" : "D", airline, tail, hhmm_of_slot(slot),
                              std::to_string(seats), to_string(klass),
                              arrival ? "" : format_number(dist), ""});
  }

  return parse_schedule_text(csv::to_string(table_out), params.grid, params.start_minute);
}

std::vector<analysis::FlightLeg> to_flight_legs(const ParsedSchedule& parsed,
                                                const std::string& date) {
  std::vector<analysis::FlightLeg> legs;
  const auto& grid = parsed.schedule.grid;
  for (size_t c = 0; c < parsed.schedule.connections.size(); ++c) {
    const auto& conn = parsed.schedule.connections[c];
    const auto& meta = parsed.meta[c];
    analysis::FlightLeg leg;
    leg.date = date;
    leg.tail = meta.tail;
    leg.connection_id = conn.id;
    leg.klass = meta.klass;
    leg.seats = meta.seats;
    leg.distance_miles = meta.next_leg_distance_miles;
    leg.arr_minute =
        parsed.start_minute + static_cast<int>(std::llround(
                                  parsed.schedule.movements[conn.arrival].requested_slot *
                                  grid.dt_minutes));
    leg.dep_minute =
        parsed.start_minute + static_cast<int>(std::llround(
                                  parsed.schedule.movements[conn.departure].requested_slot *
                                  grid.dt_minutes));
    leg.dwell_ok = meta.hea_candidate;
    legs.push_back(std::move(leg));
  }
  return legs;
}

}  // namespace heasched::ingest
