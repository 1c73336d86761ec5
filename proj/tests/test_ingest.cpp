#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "heasched/errors.hpp"
#include "heasched/ingest.hpp"

using namespace heasched;
using namespace heasched::ingest;

namespace {

const char* kHeader =
    "movement_id,kind,airline,tail,requested_hhmm,seats,aircraft_class,"
    "next_leg_distance_miles,connect_id\n";

std::string n178sy_rows() {
  return std::string(kHeader) +
         "m1,A,OO,N178SY,17:02,66,RJ,,c1\n"
         "m2,D,OO,N178SY,17:53,66,RJ,599,c1\n";
}

}  // namespace

TEST_CASE("a single-aircraft day parses to the expected slots") {
  TimeGrid grid{1440, 1.0};
  auto parsed = parse_schedule_text(n178sy_rows(), grid);
  REQUIRE(parsed.schedule.movements.size() == 2);
  REQUIRE(parsed.schedule.connections.size() == 1);
  CHECK(parsed.schedule.movements[0].requested_slot == 1022);
  CHECK(parsed.schedule.movements[1].requested_slot == 1073);
  CHECK(parsed.schedule.movements[1].requested_slot -
            parsed.schedule.movements[0].requested_slot ==
        51);
  CHECK(parsed.meta[0].hea_candidate);
  CHECK(parsed.meta[0].next_leg_distance_miles == 599);
  CHECK(parsed.meta[0].seats == 66);
}

TEST_CASE("interval flooring is idempotent") {
  TimeGrid grid{720, 2.0};
  for (double minute : {0.0, 1.0, 2.0, 3.0, 17.0, 1438.0}) {
    int slot = grid.slot_of_minute(minute);
    CHECK(grid.slot_of_minute(grid.minute_of_slot(slot)) == slot);
  }
}

TEST_CASE("departure before arrival is inconsistent") {
  TimeGrid grid{1440, 1.0};
  std::string text = std::string(kHeader) +
                     "m1,A,OO,N1,12:30,66,RJ,,c1\n"
                     "m2,D,OO,N1,12:10,66,RJ,300,c1\n";
  CHECK_THROWS_AS(parse_schedule_text(text, grid), InconsistentPairError);
}

TEST_CASE("pair mixing two aircraft is inconsistent") {
  TimeGrid grid{1440, 1.0};
  std::string text = std::string(kHeader) +
                     "m1,A,OO,N1,12:00,66,RJ,,c1\n"
                     "m2,D,OO,N2,12:40,66,RJ,300,c1\n";
  CHECK_THROWS_AS(parse_schedule_text(text, grid), InconsistentPairError);
}

TEST_CASE("unpaired connect id is inconsistent") {
  TimeGrid grid{1440, 1.0};
  std::string text = std::string(kHeader) + "m1,A,OO,N1,12:00,66,RJ,,c1\n";
  CHECK_THROWS_AS(parse_schedule_text(text, grid), InconsistentPairError);
}

TEST_CASE("empty file yields an empty schedule") {
  TimeGrid grid{1440, 1.0};
  auto parsed = parse_schedule_text("", grid);
  CHECK(parsed.schedule.movements.empty());
  CHECK(parsed.schedule.connections.empty());
}

TEST_CASE("parse errors carry position and column") {
  TimeGrid grid{1440, 1.0};
  std::string text = std::string(kHeader) + "m1,A,OO,N1,25:99,66,RJ,,\n";
  try {
    parse_schedule_text(text, grid);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == "requested_hhmm");
  }
  std::string bad_seats = std::string(kHeader) + "m1,A,OO,N1,12:00,zero,RJ,,\n";
  CHECK_THROWS_AS(parse_schedule_text(bad_seats, grid), ParseError);
  std::string bad_kind = std::string(kHeader) + "m1,X,OO,N1,12:00,66,RJ,,\n";
  CHECK_THROWS_AS(parse_schedule_text(bad_kind, grid), ParseError);
}

TEST_CASE("short dwell is flagged out of HEA candidacy") {
  TimeGrid grid{1440, 1.0};
  std::string text = std::string(kHeader) +
                     "m1,A,OO,N1,12:00,66,RJ,,c1\n"
                     "m2,D,OO,N1,12:10,66,RJ,300,c1\n";
  auto parsed = parse_schedule_text(text, grid);
  CHECK_FALSE(parsed.meta[0].hea_candidate);
  CHECK(parsed.warnings.size() == 1);

  auto n = apply_hybrid_config(parsed, ParamTable::bundled(), {700, 25});
  CHECK(n == 0);
  CHECK_FALSE(parsed.schedule.connections[0].hea.has_value());
}

TEST_CASE("hybrid config attaches demand to feasible candidates only") {
  TimeGrid grid{1440, 1.0};

  SUBCASE("within range: energy and cap per the energy model") {
    std::string rows = std::string(kHeader) +
                       "m1,A,OO,N178SY,17:02,66,RJ,,c1\n"
                       "m2,D,OO,N178SY,17:53,66,RJ,400,c1\n";
    auto parsed = parse_schedule_text(rows, grid);
    auto n = apply_hybrid_config(parsed, ParamTable::bundled(), {700, 25}, 0.85, 10.0);
    CHECK(n == 1);
    REQUIRE(parsed.schedule.connections[0].hea.has_value());
    double expect = 56.1 * 400 * 63.6;
    CHECK(parsed.schedule.connections[0].hea->energy_wh == doctest::Approx(expect));
    CHECK(parsed.schedule.connections[0].hea->rate_cap_w == doctest::Approx(10 * expect));
  }
  SUBCASE("out of range: stays conventional") {
    auto parsed = parse_schedule_text(n178sy_rows(), grid);
    auto n = apply_hybrid_config(parsed, ParamTable::bundled(), {500, 25});
    CHECK(n == 0);
  }
}

TEST_CASE("write then parse round-trips exactly") {
  SynthParams params;
  params.seed = 11;
  params.movements = 40;
  params.grid = {180, 2.0};
  auto parsed = generate_synthetic(params);

  auto text = schedule_to_string(parsed);
  auto reparsed = parse_schedule_text(text, params.grid, params.start_minute);
  CHECK(schedule_to_string(reparsed) == text);
  REQUIRE(reparsed.schedule.movements.size() == parsed.schedule.movements.size());
  for (size_t i = 0; i < parsed.schedule.movements.size(); ++i) {
    CHECK(reparsed.schedule.movements[i].requested_slot ==
          parsed.schedule.movements[i].requested_slot);
    CHECK(reparsed.schedule.movements[i].id == parsed.schedule.movements[i].id);
  }
}

TEST_CASE("generator is deterministic and hits the requested shape") {
  SynthParams params;
  params.seed = 7;
  params.movements = 215;
  params.hea_fraction = 0.3;
  params.grid = {180, 2.0};

  auto a = generate_synthetic(params);
  auto b = generate_synthetic(params);
  CHECK(schedule_to_string(a) == schedule_to_string(b));

  CHECK(a.schedule.movements.size() == 215);
  auto switched = apply_hybrid_config(a, ParamTable::bundled(), {700, 25});
  CHECK(switched == 32);

  // Eight airlines, every one of them operating at least one HEA pair.
  std::set<std::string> airlines, hea_airlines;
  for (const auto& mv : a.schedule.movements) airlines.insert(mv.airline);
  for (const auto& conn : a.schedule.connections)
    if (conn.hea) hea_airlines.insert(a.schedule.movements[conn.arrival].airline);
  CHECK(airlines.size() == 8);
  CHECK(hea_airlines.size() == 8);
}

TEST_CASE("zero movements produce an empty schedule") {
  SynthParams params;
  params.seed = 1;
  params.movements = 0;
  auto parsed = generate_synthetic(params);
  CHECK(parsed.schedule.movements.empty());
}

TEST_CASE("scenario config parsing") {
  auto cfg = parse_config_text(
      "bsed_wh_per_kg = 700\n"
      "mf_percent = 25\n"
      "# comment\n"
      "t_intervals = 180\n"
      "dt_minutes = 2\n"
      "r_bar = 45\n"
      "l_intervals = 30\n"
      "min_connect_minutes = 30\n"
      "p_bar_w = 20e6\n"
      "w_per_w2 = auto\n"
      "x_bar_minutes = 20\n");
  CHECK(cfg.cfg.bsed_wh_per_kg == 700);
  CHECK(cfg.min_connect_intervals() == 15);
  CHECK(cfg.x_bar_intervals() == 10);
  CHECK(cfg.w_value() == doctest::Approx(1.0 / (20e6 * 20e6)));
  CHECK(cfg.load_factor == 0.85);     // default
  CHECK(cfg.c_rate_per_hour == 10.0);  // default

  CHECK_THROWS_AS(parse_config_text("unknown_key = 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("p_bar_w = -5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("r_bar\n"), ConfigError);
}

TEST_CASE("scenario assembly wires config values through") {
  SynthParams params;
  params.seed = 3;
  params.movements = 30;
  params.grid = {180, 2.0};
  auto parsed = generate_synthetic(params);

  ScenarioConfig config;
  config.t_intervals = 180;
  config.dt_minutes = 2.0;
  config.r_bar = 12;
  config.l_intervals = 10;
  config.p_bar_w = 5e6;

  auto scenario = make_scenario(parsed, config, ParamTable::bundled());
  CHECK(scenario.r_bar == 12);
  CHECK(scenario.l_window == 10);
  CHECK(scenario.p_bar_w == 5e6);
  CHECK(scenario.w_per_w2 == doctest::Approx(1.0 / (5e6 * 5e6)));
  for (const auto& conn : scenario.schedule.connections)
    CHECK(conn.min_connect_intervals == 15);

  config.dt_minutes = 1.0;
  CHECK_THROWS_AS(make_scenario(parsed, config, ParamTable::bundled()), ConfigError);
}
