#include "heasched/mechanisms.hpp"

#include <algorithm>
#include <map>

#include "heasched/errors.hpp"

namespace heasched::mechanisms {

namespace {

struct HeaRef {
  int index = 0;  // position among the scenario's HEA connections
  std::string id;
  std::string airline;
  double rate_w = 0.0;
  double energy_wh = 0.0;
};

std::vector<HeaRef> hea_refs(const reschedule::Scenario& scenario) {
  std::vector<HeaRef> refs;
  int k = 0;
  for (const auto& conn : scenario.schedule.connections) {
    if (!conn.hea) continue;
    HeaRef r;
    r.index = k++;
    r.id = conn.id;
    r.airline = scenario.schedule.movements[conn.arrival].airline;
    r.rate_w = uniform_rate_w(scenario.schedule, conn);
    r.energy_wh = conn.hea->energy_wh;
    refs.push_back(std::move(r));
  }
  return refs;
}

// Descending uniform rate; ties by larger energy, then lexicographic id.
bool rank_before(const HeaRef& a, const HeaRef& b) {
  if (a.rate_w != b.rate_w) return a.rate_w > b.rate_w;
  if (a.energy_wh != b.energy_wh) return a.energy_wh > b.energy_wh;
  return a.id < b.id;
}

reschedule::Scenario with_kept(const reschedule::Scenario& scenario,
                               const std::vector<char>& keep) {
  reschedule::Scenario out = scenario;
  int k = 0;
  for (auto& conn : out.schedule.connections) {
    if (!conn.hea) continue;
    if (!keep[k]) conn.hea.reset();
    ++k;
  }
  return out;
}

SwitchDecision make_decision(const std::vector<HeaRef>& refs, const std::vector<char>& keep) {
  SwitchDecision d;
  d.keep = keep;
  d.connection_ids.resize(refs.size());
  for (const auto& r : refs) d.connection_ids[r.index] = r.id;
  return d;
}

void append_round_trace(std::vector<RoundTraceEntry>& trace, int round,
                        const std::vector<HeaRef>& refs,
                        const std::vector<char>& switched_now,
                        const reschedule::RescheduleSolution& sol) {
  for (const auto& r : refs) {
    if (!switched_now[r.index]) continue;
    trace.push_back({round, r.airline, r.id, "switch", double(sol.max_displacement()),
                     sol.peak_power_w()});
  }
}

void append_keep_trace(std::vector<RoundTraceEntry>& trace, int round,
                       const std::vector<HeaRef>& refs, const std::vector<char>& keep,
                       const reschedule::RescheduleSolution& sol) {
  for (const auto& r : refs) {
    if (!keep[r.index]) continue;
    trace.push_back({round, r.airline, r.id, "keep", double(sol.max_displacement()),
                     sol.peak_power_w()});
  }
}

}  // namespace

int SwitchDecision::retained() const {
  int n = 0;
  for (char k : keep) n += k ? 1 : 0;
  return n;
}

int SwitchDecision::switched() const { return static_cast<int>(keep.size()) - retained(); }

double uniform_rate_w(double energy_wh, int dwell_intervals, const TimeGrid& grid) {
  if (dwell_intervals <= 0) throw ZeroDwellError("dwell must be positive for a uniform rate");
  return energy_wh / (dwell_intervals * grid.dt_hours());
}

double uniform_rate_w(const Schedule& schedule, const Connection& conn) {
  if (!conn.hea) throw Error("connection " + conn.id + " carries no charging demand");
  int dwell = schedule.movements[conn.departure].requested_slot -
              schedule.movements[conn.arrival].requested_slot;
  return uniform_rate_w(conn.hea->energy_wh, dwell, schedule.grid);
}

double uniform_rate_w(const Connection& conn, const AllocationMatrix& alloc) {
  if (!conn.hea) throw Error("connection " + conn.id + " carries no charging demand");
  int dwell = alloc.slot(conn.departure) - alloc.slot(conn.arrival);
  return uniform_rate_w(conn.hea->energy_wh, dwell, alloc.grid());
}

NegotiationResult airport_switch_optimize(const reschedule::Scenario& scenario, double w_prime,
                                          int x_bar_intervals,
                                          const reschedule::SolveOptions& options) {
  if (w_prime <= 0.0) throw Error("retention weight must be positive");
  auto refs = hea_refs(scenario);
  auto res = reschedule::solve_with_switching(scenario, w_prime, x_bar_intervals, options);

  NegotiationResult out;
  out.decision = make_decision(refs, res.keep_hea);
  out.solution = std::move(res.solution);
  out.rounds = 1;
  out.solver_calls = 1;
  for (const auto& r : refs) {
    out.trace.push_back({1, r.airline, r.id, res.keep_hea[r.index] ? "keep" : "switch",
                         double(out.solution.max_displacement()),
                         out.solution.peak_power_w()});
  }
  return out;
}

NegotiationResult airport_switch_heuristic(const reschedule::Scenario& scenario,
                                           int x_bar_intervals,
                                           const reschedule::SolveOptions& options,
                                           const reschedule::RescheduleSolution* initial) {
  auto refs = hea_refs(scenario);
  std::vector<char> keep(refs.size(), 1);

  NegotiationResult out;
  out.solution = initial ? *initial : reschedule::solve(scenario, options);
  if (!initial) out.solver_calls += 1;

  std::vector<HeaRef> ranked = refs;
  std::sort(ranked.begin(), ranked.end(), rank_before);

  size_t next = 0;
  while (out.solution.max_displacement() > x_bar_intervals) {
    if (next >= ranked.size())
      throw InfeasibleError("schedule unacceptable even with every HEA connection switched",
                            "");
    const auto& pick = ranked[next++];
    keep[pick.index] = 0;
    out.rounds += 1;
    out.solution = reschedule::solve(with_kept(scenario, keep), options);
    out.solver_calls += 1;
    out.trace.push_back({out.rounds, pick.airline, pick.id, "switch",
                         double(out.solution.max_displacement()),
                         out.solution.peak_power_w()});
  }
  append_keep_trace(out.trace, out.rounds, refs, keep, out.solution);
  out.decision = make_decision(refs, keep);
  return out;
}

NegotiationResult airline_iterative_drop(const reschedule::Scenario& scenario,
                                         int x_bar_intervals, int drop_per_round,
                                         const reschedule::SolveOptions& options,
                                         const reschedule::RescheduleSolution* initial) {
  if (drop_per_round < 1) throw Error("airlines must drop at least one connection per round");
  auto refs = hea_refs(scenario);
  std::vector<char> keep(refs.size(), 1);

  NegotiationResult out;
  out.solution = initial ? *initial : reschedule::solve(scenario, options);
  if (!initial) out.solver_calls += 1;

  // Per-airline rankings, airlines visited in name order.
  std::map<std::string, std::vector<HeaRef>> by_airline;
  for (const auto& r : refs) by_airline[r.airline].push_back(r);
  for (auto& [airline, list] : by_airline) std::sort(list.begin(), list.end(), rank_before);

  while (out.solution.max_displacement() > x_bar_intervals) {
    bool any_left = false;
    for (const auto& [airline, list] : by_airline)
      for (const auto& r : list) any_left = any_left || keep[r.index];
    if (!any_left)
      throw InfeasibleError("schedule unacceptable even with every HEA connection switched",
                            "");

    out.rounds += 1;
    std::vector<char> switched_now(refs.size(), 0);
    for (const auto& [airline, list] : by_airline) {
      int dropped = 0;
      for (const auto& r : list) {
        if (dropped >= drop_per_round) break;
        if (!keep[r.index]) continue;
        keep[r.index] = 0;
        switched_now[r.index] = 1;
        ++dropped;
      }
    }
    out.solution = reschedule::solve(with_kept(scenario, keep), options);
    out.solver_calls += 1;
    append_round_trace(out.trace, out.rounds, refs, switched_now, out.solution);
  }
  append_keep_trace(out.trace, out.rounds, refs, keep, out.solution);
  out.decision = make_decision(refs, keep);
  return out;
}

}  // namespace heasched::mechanisms
