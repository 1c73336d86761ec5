#include "heasched/reschedule.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <set>

#include "heasched/errors.hpp"
#include "heasched/qp.hpp"

namespace heasched::reschedule {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Preprocessed instance view
// ---------------------------------------------------------------------------

struct HeaView {
  int conn = -1;  // index into schedule.connections
  int arr = -1;
  int dep = -1;
  double energy_wh = 0.0;
  double cap_w = 0.0;
  int min_len = 1;  // implied window length: max(connect floor, deliverability)
  std::string id;
};

struct Instance {
  const Scenario* sc = nullptr;
  int t_count = 0;
  double dt_h = 0.0;
  int n_mov = 0;
  std::vector<int> requested;
  std::vector<HeaView> hea;
  // per movement: connection index it participates in, or -1
  std::vector<int> conn_of_mov;
  // per connection: HEA index or -1
  std::vector<int> hea_of_conn;
  // per connection: minimum allocated separation implied by the model
  std::vector<int> conn_len;
};

Instance make_instance(const Scenario& sc) {
  Instance in;
  in.sc = &sc;
  in.t_count = sc.schedule.grid.num_intervals;
  in.dt_h = sc.schedule.grid.dt_hours();
  in.n_mov = static_cast<int>(sc.schedule.movements.size());
  in.requested.resize(in.n_mov);
  for (int i = 0; i < in.n_mov; ++i) in.requested[i] = sc.schedule.movements[i].requested_slot;

  in.conn_of_mov.assign(in.n_mov, -1);
  in.hea_of_conn.assign(sc.schedule.connections.size(), -1);
  in.conn_len.resize(sc.schedule.connections.size());
  for (size_t c = 0; c < sc.schedule.connections.size(); ++c) {
    const auto& conn = sc.schedule.connections[c];
    in.conn_of_mov[conn.arrival] = static_cast<int>(c);
    in.conn_of_mov[conn.departure] = static_cast<int>(c);
    int len = conn.min_connect_intervals;
    if (conn.hea) {
      HeaView h;
      h.conn = static_cast<int>(c);
      h.arr = conn.arrival;
      h.dep = conn.departure;
      h.energy_wh = conn.hea->energy_wh;
      h.cap_w = conn.hea->rate_cap_w;
      h.id = conn.id;
      int len_e = static_cast<int>(std::ceil(h.energy_wh / (h.cap_w * in.dt_h) - 1e-9));
      h.min_len = std::max({conn.min_connect_intervals, len_e, 1});
      len = h.min_len;
      in.hea_of_conn[c] = static_cast<int>(in.hea.size());
      in.hea.push_back(std::move(h));
    }
    in.conn_len[c] = len;
  }
  return in;
}

struct Domains {
  std::vector<int> lo, hi;          // per movement slot range
  std::vector<signed char> z_lo, z_hi;  // per HEA connection (switch solves)
};

// Bounds-consistency over the connection separation constraints. Returns
// false when some domain empties. The charging-deliverability separation only
// applies when the connection is certainly retained as HEA.
bool propagate(const Instance& in, Domains& d) {
  for (size_t c = 0; c < in.sc->schedule.connections.size(); ++c) {
    const auto& conn = in.sc->schedule.connections[c];
    int len = conn.min_connect_intervals;
    int h = in.hea_of_conn[c];
    if (h >= 0) {
      bool forced_on = d.z_lo.empty() || d.z_lo[h] == 1;
      if (forced_on) len = in.hea[h].min_len;
    }
    int a = conn.arrival, b = conn.departure;
    d.lo[b] = std::max(d.lo[b], d.lo[a] + len);
    d.hi[a] = std::min(d.hi[a], d.hi[b] - len);
    if (d.lo[a] > d.hi[a] || d.lo[b] > d.hi[b]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Fixed-allocation charging subproblem (flatten under the airport cap)
// ---------------------------------------------------------------------------

struct CappedCharge {
  bool feasible = false;
  // rates_w[h][t] over the whole grid, scenario HEA order
  std::vector<std::vector<double>> rates_w;
  double flatten_w2 = 0.0;
  double worst_shortfall_wh = 0.0;
  int worst_hea = -1;
};

// Charging window of a connection allocated (arr, dep): slots arr+1 .. dep.
CappedCharge solve_capped(const Instance& in, const std::vector<int>& slots,
                          const std::vector<char>* keep) {
  CappedCharge out;
  const int t_count = in.t_count;
  out.rates_w.assign(in.hea.size(), std::vector<double>(t_count, 0.0));
  if (in.hea.empty()) {
    out.feasible = true;
    return out;
  }

  double cap_sum = 0.0;
  for (const auto& h : in.hea) cap_sum += h.cap_w;
  const double unit = std::max(std::min(in.sc->p_bar_w, cap_sum), 1e-9);

  std::vector<int> active;  // HEA indices with retained demand
  for (size_t h = 0; h < in.hea.size(); ++h)
    if (!keep || (*keep)[h]) active.push_back(static_cast<int>(h));

  // Variables: per active connection the in-window rates, then aggregates,
  // then one energy shortfall per connection.
  std::vector<int> gvar_base(active.size(), -1), wlo(active.size()), whi(active.size());
  int n = 0;
  std::vector<int> cover(t_count, 0);
  for (size_t k = 0; k < active.size(); ++k) {
    const auto& h = in.hea[active[k]];
    wlo[k] = slots[h.arr] + 1;
    whi[k] = slots[h.dep];
    if (wlo[k] > whi[k]) {
      out.worst_shortfall_wh = h.energy_wh;
      out.worst_hea = active[k];
      return out;
    }
    gvar_base[k] = n;
    n += whi[k] - wlo[k] + 1;
    for (int t = wlo[k]; t <= whi[k]; ++t) cover[t] += 1;
  }
  std::vector<int> agg_of_t(t_count, -1);
  int n_agg = 0;
  for (int t = 0; t < t_count; ++t)
    if (cover[t] > 0) agg_of_t[t] = n + n_agg++;
  int slack_base = n + n_agg;
  int n_total = slack_base + static_cast<int>(active.size());

  qp::Problem prob;
  prob.n = n_total;
  prob.p_diag = Eigen::VectorXd::Zero(n_total);
  prob.q = Eigen::VectorXd::Zero(n_total);
  prob.x_lo = Eigen::VectorXd::Zero(n_total);
  prob.x_hi = Eigen::VectorXd::Zero(n_total);

  const double p_hat = in.sc->p_bar_w / unit;
  double penalty = 100.0 * (1.0 + n_agg * p_hat * p_hat);

  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> row_lo, row_hi;
  for (size_t k = 0; k < active.size(); ++k) {
    const auto& h = in.hea[active[k]];
    double q_hat = h.cap_w / unit;
    double e_hat = h.energy_wh / (unit * in.dt_h);
    int row = static_cast<int>(row_lo.size());
    for (int t = wlo[k]; t <= whi[k]; ++t) {
      int v = gvar_base[k] + t - wlo[k];
      prob.x_hi[v] = q_hat;
      trips.emplace_back(row, v, 1.0);
    }
    trips.emplace_back(row, slack_base + static_cast<int>(k), 1.0);
    prob.x_hi[slack_base + k] = e_hat;
    prob.q[slack_base + k] = penalty;
    row_lo.push_back(e_hat);
    row_hi.push_back(e_hat);
  }
  for (int t = 0; t < t_count; ++t) {
    if (agg_of_t[t] < 0) continue;
    int row = static_cast<int>(row_lo.size());
    for (size_t k = 0; k < active.size(); ++k)
      if (t >= wlo[k] && t <= whi[k]) trips.emplace_back(row, gvar_base[k] + t - wlo[k], 1.0);
    trips.emplace_back(row, agg_of_t[t], -1.0);
    row_lo.push_back(0.0);
    row_hi.push_back(0.0);
    prob.x_hi[agg_of_t[t]] = p_hat;
    prob.p_diag[agg_of_t[t]] = 2.0;
  }
  prob.a.resize(static_cast<int>(row_lo.size()), n_total);
  prob.a.setFromTriplets(trips.begin(), trips.end());
  prob.row_lo = Eigen::Map<Eigen::VectorXd>(row_lo.data(), row_lo.size());
  prob.row_hi = Eigen::Map<Eigen::VectorXd>(row_hi.data(), row_hi.size());

  qp::Settings st;
  st.eps_abs = 1e-10;
  st.eps_rel = 1e-10;
  st.max_iter = 60000;
  qp::Solver solver(std::move(prob), st);
  auto res = solver.solve();

  out.feasible = true;
  for (size_t k = 0; k < active.size(); ++k) {
    const auto& h = in.hea[active[k]];
    double shortfall = res.x[slack_base + k] * unit * in.dt_h;
    if (shortfall > out.worst_shortfall_wh) {
      out.worst_shortfall_wh = shortfall;
      out.worst_hea = active[k];
    }
    if (shortfall > 1e-6 * std::max(h.energy_wh, 1.0)) out.feasible = false;

    auto& rates = out.rates_w[active[k]];
    double q_cap = h.cap_w;
    double sum_w = 0.0;
    for (int t = wlo[k]; t <= whi[k]; ++t) {
      double v = std::clamp(res.x[gvar_base[k] + t - wlo[k]] * unit, 0.0, q_cap);
      rates[t] = v;
      sum_w += v;
    }
    // Absorb the residual of the energy equality into interior slots.
    double target_w = h.energy_wh / in.dt_h;
    double drift = sum_w - target_w;
    for (int t = wlo[k]; t <= whi[k] && std::abs(drift) > 0.0; ++t) {
      double adj = std::clamp(rates[t] - drift, 0.0, q_cap);
      drift -= rates[t] - adj;
      rates[t] = adj;
    }
  }
  if (out.feasible) {
    std::vector<double> agg(t_count, 0.0);
    for (const auto& rates : out.rates_w)
      for (int t = 0; t < t_count; ++t) agg[t] += rates[t];
    double peak = *std::max_element(agg.begin(), agg.end());
    if (peak > in.sc->p_bar_w * (1.0 + 1e-7) + 1e-3) out.feasible = false;
    out.flatten_w2 = 0.0;
    for (double a : agg) out.flatten_w2 += a * a;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Greedy construction / repair
// ---------------------------------------------------------------------------

class OccupancyTracker {
 public:
  OccupancyTracker(int t_count, int r_bar, int l_window)
      : t_count_(t_count), r_bar_(r_bar), l_window_(l_window), count_(t_count, 0) {}

  bool can_place(int slot) const {
    int lo = std::max(0, slot - l_window_);
    for (int t = lo; t <= slot && t < t_count_; ++t) {
      int hi = std::min(t + l_window_, t_count_ - 1);
      int sum = 0;
      for (int tau = t; tau <= hi; ++tau) sum += count_[tau];
      if (sum + 1 > r_bar_) return false;
    }
    return true;
  }
  void place(int slot) { count_[slot] += 1; }
  void remove(int slot) { count_[slot] -= 1; }

 private:
  int t_count_, r_bar_, l_window_;
  std::vector<int> count_;
};

// Places every movement at the nearest capacity-feasible slot to its
// preference, treating connection pairs jointly. Returns empty on failure.
std::vector<int> place_all(const Instance& in, const std::vector<int>& preferred,
                           const std::vector<char>* keep, int max_abs_disp) {
  const int t_count = in.t_count;
  OccupancyTracker occ(t_count, in.sc->r_bar, in.sc->l_window);
  std::vector<int> slots(in.n_mov, -1);

  std::vector<int> sep_of_conn(in.sc->schedule.connections.size());
  for (size_t c = 0; c < sep_of_conn.size(); ++c) sep_of_conn[c] = in.conn_len[c];
  if (keep) {
    for (size_t h = 0; h < in.hea.size(); ++h)
      if (!(*keep)[h])
        sep_of_conn[in.hea[h].conn] =
            in.sc->schedule.connections[in.hea[h].conn].min_connect_intervals;
  }

  std::vector<int> order(in.n_mov);
  for (int i = 0; i < in.n_mov; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (in.requested[a] != in.requested[b]) return in.requested[a] < in.requested[b];
    bool arr_a = in.sc->schedule.movements[a].kind == MovementKind::Arrival;
    bool arr_b = in.sc->schedule.movements[b].kind == MovementKind::Arrival;
    if (arr_a != arr_b) return arr_a;
    return in.sc->schedule.movements[a].id < in.sc->schedule.movements[b].id;
  });

  for (int i : order) {
    int lo = 0, hi = t_count - 1;
    int c = in.conn_of_mov[i];
    if (c >= 0) {
      const auto& conn = in.sc->schedule.connections[c];
      if (conn.departure == i && slots[conn.arrival] >= 0)
        lo = std::max(lo, slots[conn.arrival] + sep_of_conn[c]);
      if (conn.arrival == i && slots[conn.departure] >= 0)
        hi = std::min(hi, slots[conn.departure] - sep_of_conn[c]);
      if (conn.arrival == i && slots[conn.departure] < 0)
        hi = std::min(hi, t_count - 1 - sep_of_conn[c]);
    }
    int base = std::clamp(preferred[i], lo, hi);
    int chosen = -1;
    for (int delta = 0; delta < t_count; ++delta) {
      for (int sign = 0; sign < 2; ++sign) {
        int s = sign == 0 ? base + delta : base - delta;
        if (delta == 0 && sign == 1) continue;
        if (s < lo || s > hi) continue;
        if (max_abs_disp >= 0 && std::abs(s - in.requested[i]) > max_abs_disp) continue;
        if (occ.can_place(s)) {
          chosen = s;
          break;
        }
      }
      if (chosen >= 0) break;
    }
    if (chosen < 0) return {};
    slots[i] = chosen;
    occ.place(chosen);
  }
  return slots;
}

struct Candidate {
  std::vector<int> slots;
  CappedCharge charge;
  ObjectiveBreakdown obj;
  bool ok = false;
};

ObjectiveBreakdown evaluate_objective(const Instance& in, const std::vector<int>& slots,
                                      double flatten_w2) {
  ObjectiveBreakdown b;
  for (int i = 0; i < in.n_mov; ++i) {
    int d = std::abs(slots[i] - in.requested[i]);
    b.max_disp = std::max(b.max_disp, static_cast<double>(d));
    b.total_disp += d;
  }
  b.flatten_w2 = flatten_w2;
  b.value = b.max_disp + b.total_disp + in.sc->w_per_w2 * flatten_w2;
  return b;
}

// Builds a full feasible candidate from preferred slots: place, then widen
// charging windows until the airport cap admits the energy.
Candidate build_candidate(const Instance& in, const std::vector<int>& preferred,
                          const std::vector<char>* keep, int max_abs_disp) {
  Candidate cand;
  std::vector<int> pref = preferred;
  for (int attempt = 0; attempt < 60; ++attempt) {
    auto slots = place_all(in, pref, keep, max_abs_disp);
    if (slots.empty()) return cand;
    auto charge = solve_capped(in, slots, keep);
    if (charge.feasible) {
      cand.slots = std::move(slots);
      cand.charge = std::move(charge);
      cand.obj = evaluate_objective(in, cand.slots, cand.charge.flatten_w2);
      cand.ok = true;
      return cand;
    }
    if (charge.worst_hea < 0) return cand;
    // Widen the most starved connection: departure later if possible,
    // otherwise arrival earlier.
    const auto& h = in.hea[charge.worst_hea];
    int cur_dep = slots[h.dep], cur_arr = slots[h.arr];
    if (cur_dep < in.t_count - 1 &&
        (max_abs_disp < 0 || cur_dep + 1 - in.requested[h.dep] <= max_abs_disp)) {
      pref[h.dep] = cur_dep + 1;
      pref[h.arr] = cur_arr;
    } else if (cur_arr > 0 &&
               (max_abs_disp < 0 || in.requested[h.arr] - (cur_arr - 1) <= max_abs_disp)) {
      pref[h.arr] = cur_arr - 1;
      pref[h.dep] = cur_dep;
    } else {
      return cand;
    }
  }
  return cand;
}

// ---------------------------------------------------------------------------
// Joint model
// ---------------------------------------------------------------------------

struct SwitchSpec {
  bool enabled = false;
  double w_prime = 0.0;
};

struct JointModel {
  Domains root;
  double unit_w = 1.0;  // power unit for scaling
  double w_hat = 0.0;   // w * unit^2
  double penalty = 0.0;

  // variable indices
  std::vector<int> y_base, vlo, vhi;    // per movement
  std::vector<int> gam_base, glo, ghi;  // per HEA connection
  std::vector<int> agg_of_t;
  int m_index = -1;
  std::vector<int> cap_slack;  // per t
  std::vector<int> e_slack;    // per HEA connection
  std::vector<int> z_index;    // per HEA connection (switch only)
  int n_vars = 0;

  Eigen::VectorXd root_lo, root_hi;
  qp::Problem prob;
};

// Resolved Y_i^t under the build-time domains: a variable or a constant.
struct VirtY {
  int var = -1;
  double constant = 0.0;
};

JointModel build_joint(const Instance& in, Domains root, const SwitchSpec& sw) {
  JointModel md;
  md.root = std::move(root);
  const int t_count = in.t_count;
  const int n_mov = in.n_mov;

  double cap_sum = 0.0;
  for (const auto& h : in.hea) cap_sum += h.cap_w;
  md.unit_w = in.hea.empty() ? 1.0 : std::max(std::min(in.sc->p_bar_w, cap_sum), 1e-9);
  md.w_hat = in.sc->w_per_w2 * md.unit_w * md.unit_w;
  const double p_hat = in.hea.empty() ? 0.0 : in.sc->p_bar_w / md.unit_w;

  // --- variable layout
  md.y_base.assign(n_mov, -1);
  md.vlo.assign(n_mov, 0);
  md.vhi.assign(n_mov, -1);
  int n = 0;
  for (int i = 0; i < n_mov; ++i) {
    md.vlo[i] = md.root.lo[i] + 1;
    md.vhi[i] = md.root.hi[i];
    if (md.vlo[i] <= md.vhi[i]) {
      md.y_base[i] = n;
      n += md.vhi[i] - md.vlo[i] + 1;
    }
  }
  auto y_at = [&](int i, int t) -> VirtY {
    VirtY v;
    if (t >= t_count || t > md.root.hi[i]) {
      v.constant = 0.0;
    } else if (t <= md.root.lo[i]) {
      v.constant = 1.0;
    } else {
      v.var = md.y_base[i] + (t - md.vlo[i]);
    }
    return v;
  };

  md.gam_base.assign(in.hea.size(), -1);
  md.glo.assign(in.hea.size(), 0);
  md.ghi.assign(in.hea.size(), -1);
  std::vector<int> cover(t_count, 0);
  for (size_t h = 0; h < in.hea.size(); ++h) {
    md.glo[h] = md.root.lo[in.hea[h].arr] + 1;
    md.ghi[h] = md.root.hi[in.hea[h].dep];
    if (md.glo[h] > md.ghi[h])
      throw InfeasibleError("HEA connection " + in.hea[h].id + " has no charging window",
                            "battery rate");
    md.gam_base[h] = n;
    n += md.ghi[h] - md.glo[h] + 1;
    for (int t = md.glo[h]; t <= md.ghi[h]; ++t) cover[t] += 1;
  }
  md.agg_of_t.assign(t_count, -1);
  for (int t = 0; t < t_count; ++t)
    if (cover[t] > 0) md.agg_of_t[t] = n++;
  md.m_index = n++;
  md.cap_slack.resize(t_count);
  for (int t = 0; t < t_count; ++t) md.cap_slack[t] = n++;
  md.e_slack.resize(in.hea.size());
  for (size_t h = 0; h < in.hea.size(); ++h) md.e_slack[h] = n++;
  if (sw.enabled) {
    md.z_index.resize(in.hea.size());
    for (size_t h = 0; h < in.hea.size(); ++h) md.z_index[h] = n++;
  }
  md.n_vars = n;

  // --- costs, boxes
  auto& prob = md.prob;
  prob.n = n;
  prob.p_diag = Eigen::VectorXd::Zero(n);
  prob.q = Eigen::VectorXd::Zero(n);
  prob.x_lo = Eigen::VectorXd::Zero(n);
  prob.x_hi = Eigen::VectorXd::Zero(n);
  prob.obj_const = 0.0;

  int max_disp_box = 0;
  for (int i = 0; i < n_mov; ++i) {
    int r = in.requested[i];
    max_disp_box = std::max({max_disp_box, md.root.hi[i] - r, r - md.root.lo[i]});
  }
  double obj_cap = 1.0 + max_disp_box;
  for (int i = 0; i < n_mov; ++i) {
    int r = in.requested[i];
    obj_cap += std::max(md.root.hi[i] - r, r - md.root.lo[i]);
  }
  obj_cap += md.w_hat * t_count * p_hat * p_hat + 10.0;
  md.penalty = 10.0 * obj_cap;

  for (int i = 0; i < n_mov; ++i) {
    if (md.y_base[i] < 0) continue;
    int r = in.requested[i];
    for (int t = md.vlo[i]; t <= md.vhi[i]; ++t) {
      int v = md.y_base[i] + (t - md.vlo[i]);
      prob.x_hi[v] = 1.0;
      prob.q[v] += (t > r) ? 1.0 : -1.0;
    }
    // constants of X+ and X- under the build domains
    int k_plus = std::max(0, md.root.lo[i] - r);
    int k1 = std::min(md.root.lo[i], r);  // slots in [1, r] pinned to one
    prob.obj_const += k_plus + (r - k1);
  }
  for (size_t h = 0; h < in.hea.size(); ++h) {
    double q_hat = in.hea[h].cap_w / md.unit_w;
    for (int t = md.glo[h]; t <= md.ghi[h]; ++t)
      prob.x_hi[md.gam_base[h] + (t - md.glo[h])] = q_hat;
    double e_hat = in.hea[h].energy_wh / (md.unit_w * in.dt_h);
    prob.x_hi[md.e_slack[h]] = e_hat;
    prob.q[md.e_slack[h]] = 10.0 * md.penalty;
  }
  for (int t = 0; t < t_count; ++t) {
    if (md.agg_of_t[t] >= 0) {
      prob.x_hi[md.agg_of_t[t]] = p_hat;
      prob.p_diag[md.agg_of_t[t]] = 2.0 * md.w_hat;
    }
    prob.x_hi[md.cap_slack[t]] = n_mov;
    prob.q[md.cap_slack[t]] = md.penalty;
  }
  prob.x_hi[md.m_index] = max_disp_box;
  prob.q[md.m_index] = 1.0;
  for (size_t h = 0; h < in.hea.size(); ++h) {
    if (!sw.enabled) continue;
    prob.x_hi[md.z_index[h]] = 1.0;
    prob.q[md.z_index[h]] = -sw.w_prime;
  }

  // --- rows
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> row_lo, row_hi;
  auto add_row = [&](double lo, double hi) {
    row_lo.push_back(lo);
    row_hi.push_back(hi);
    return static_cast<int>(row_lo.size()) - 1;
  };

  // step shape
  for (int i = 0; i < n_mov; ++i) {
    if (md.y_base[i] < 0) continue;
    for (int t = md.vlo[i]; t < md.vhi[i]; ++t) {
      int row = add_row(0.0, kInf);
      trips.emplace_back(row, md.y_base[i] + (t - md.vlo[i]), 1.0);
      trips.emplace_back(row, md.y_base[i] + (t + 1 - md.vlo[i]), -1.0);
    }
  }
  // capacity windows: movements allocated in [t, min(t+L, T-1)]
  for (int t = 0; t < t_count; ++t) {
    double constant = 0.0;
    int row = add_row(-kInf, 0.0);
    for (int i = 0; i < n_mov; ++i) {
      VirtY a = y_at(i, t), b = y_at(i, t + in.sc->l_window + 1);
      if (a.var >= 0)
        trips.emplace_back(row, a.var, 1.0);
      else
        constant += a.constant;
      if (b.var >= 0)
        trips.emplace_back(row, b.var, -1.0);
      else
        constant -= b.constant;
    }
    trips.emplace_back(row, md.cap_slack[t], -1.0);
    row_hi[row] = in.sc->r_bar - constant;
  }
  // connect floors
  for (size_t c = 0; c < in.sc->schedule.connections.size(); ++c) {
    const auto& conn = in.sc->schedule.connections[c];
    int j = conn.arrival, jp = conn.departure;
    int row = add_row(0.0, kInf);
    double lhs_const = (md.root.lo[jp] + 1) - (md.root.lo[j] + 1);
    if (md.y_base[jp] >= 0)
      for (int t = md.vlo[jp]; t <= md.vhi[jp]; ++t)
        trips.emplace_back(row, md.y_base[jp] + (t - md.vlo[jp]), 1.0);
    if (md.y_base[j] >= 0)
      for (int t = md.vlo[j]; t <= md.vhi[j]; ++t)
        trips.emplace_back(row, md.y_base[j] + (t - md.vlo[j]), -1.0);
    row_lo[row] = conn.min_connect_intervals - lhs_const;
  }
  // rate linearization: gamma <= cap * (Y_dep - Y_arr)
  for (size_t h = 0; h < in.hea.size(); ++h) {
    double q_hat = in.hea[h].cap_w / md.unit_w;
    for (int t = md.glo[h]; t <= md.ghi[h]; ++t) {
      VirtY yd = y_at(in.hea[h].dep, t), ya = y_at(in.hea[h].arr, t);
      int gv = md.gam_base[h] + (t - md.glo[h]);
      if (yd.var < 0 && ya.var < 0) {
        double diff = yd.constant - ya.constant;
        if (diff <= 0.0) prob.x_hi[gv] = 0.0;
        continue;  // diff == 1: the variable box already caps the rate
      }
      int row = add_row(-kInf, 0.0);
      trips.emplace_back(row, gv, 1.0);
      double rhs = 0.0;
      if (yd.var >= 0)
        trips.emplace_back(row, yd.var, -q_hat);
      else
        rhs += q_hat * yd.constant;
      if (ya.var >= 0)
        trips.emplace_back(row, ya.var, q_hat);
      else
        rhs -= q_hat * ya.constant;
      row_hi[row] = rhs;
    }
  }
  // retention caps: gamma <= cap * Z
  if (sw.enabled) {
    for (size_t h = 0; h < in.hea.size(); ++h) {
      double q_hat = in.hea[h].cap_w / md.unit_w;
      for (int t = md.glo[h]; t <= md.ghi[h]; ++t) {
        int row = add_row(-kInf, 0.0);
        trips.emplace_back(row, md.gam_base[h] + (t - md.glo[h]), 1.0);
        trips.emplace_back(row, md.z_index[h], -q_hat);
      }
    }
  }
  // energy obligations
  for (size_t h = 0; h < in.hea.size(); ++h) {
    double e_hat = in.hea[h].energy_wh / (md.unit_w * in.dt_h);
    int row = add_row(sw.enabled ? 0.0 : e_hat, sw.enabled ? 0.0 : e_hat);
    for (int t = md.glo[h]; t <= md.ghi[h]; ++t)
      trips.emplace_back(row, md.gam_base[h] + (t - md.glo[h]), 1.0);
    trips.emplace_back(row, md.e_slack[h], 1.0);
    if (sw.enabled) trips.emplace_back(row, md.z_index[h], -e_hat);
  }
  // aggregate definitions
  for (int t = 0; t < t_count; ++t) {
    if (md.agg_of_t[t] < 0) continue;
    int row = add_row(0.0, 0.0);
    for (size_t h = 0; h < in.hea.size(); ++h)
      if (t >= md.glo[h] && t <= md.ghi[h])
        trips.emplace_back(row, md.gam_base[h] + (t - md.glo[h]), 1.0);
    trips.emplace_back(row, md.agg_of_t[t], -1.0);
  }
  // epigraph of the maximum displacement
  for (int i = 0; i < n_mov; ++i) {
    int r = in.requested[i];
    {  // m >= X+
      int row = add_row(std::max(0, md.root.lo[i] - r), kInf);
      trips.emplace_back(row, md.m_index, 1.0);
      if (md.y_base[i] >= 0)
        for (int t = std::max(md.vlo[i], r + 1); t <= md.vhi[i]; ++t)
          trips.emplace_back(row, md.y_base[i] + (t - md.vlo[i]), -1.0);
    }
    {  // m >= X-
      int k1 = std::min(md.root.lo[i], r);
      int row = add_row(r - k1, kInf);
      trips.emplace_back(row, md.m_index, 1.0);
      if (md.y_base[i] >= 0)
        for (int t = md.vlo[i]; t <= std::min(md.vhi[i], r); ++t)
          trips.emplace_back(row, md.y_base[i] + (t - md.vlo[i]), 1.0);
    }
  }

  prob.a.resize(static_cast<int>(row_lo.size()), n);
  prob.a.setFromTriplets(trips.begin(), trips.end());
  prob.row_lo = Eigen::Map<Eigen::VectorXd>(row_lo.data(), row_lo.size());
  prob.row_hi = Eigen::Map<Eigen::VectorXd>(row_hi.data(), row_hi.size());

  // constant-only rows must hold outright
  for (int rix = 0; rix < prob.m(); ++rix) {
    if (prob.row_lo[rix] > prob.row_hi[rix] + 1e-9)
      throw InfeasibleError("contradictory constraint after domain reduction", "connect");
  }

  md.root_lo = prob.x_lo;
  md.root_hi = prob.x_hi;
  return md;
}

void apply_node_bounds(qp::Solver& solver, const JointModel& md, const Instance& in,
                       const Domains& nd) {
  Eigen::VectorXd lo = md.root_lo, hi = md.root_hi;
  for (int i = 0; i < in.n_mov; ++i) {
    if (md.y_base[i] < 0) continue;
    for (int t = md.vlo[i]; t <= md.vhi[i]; ++t) {
      int v = md.y_base[i] + (t - md.vlo[i]);
      if (t <= nd.lo[i]) lo[v] = 1.0;
      if (t > nd.hi[i]) hi[v] = 0.0;
    }
  }
  if (!md.z_index.empty()) {
    for (size_t h = 0; h < in.hea.size(); ++h) {
      lo[md.z_index[h]] = nd.z_lo[h];
      hi[md.z_index[h]] = nd.z_hi[h];
    }
  }
  solver.set_var_bounds(lo, hi);
}

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Node {
  long id = 0;
  double bound = -kInf;
  Domains domains;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap
    return a.id > b.id;
  }
};

struct BranchPick {
  bool integral = true;
  int movement = -1, t = -1;  // Y branch
  int z_conn = -1;            // Z branch
  double frac = 0.0;
};

BranchPick pick_branch(const JointModel& md, const Instance& in, const Domains& nd,
                       const Eigen::VectorXd& x, double int_tol) {
  BranchPick pick;
  for (int i = 0; i < in.n_mov; ++i) {
    if (md.y_base[i] < 0 || nd.lo[i] >= nd.hi[i]) continue;
    for (int t = std::max(md.vlo[i], nd.lo[i] + 1); t <= std::min(md.vhi[i], nd.hi[i]); ++t) {
      double v = std::clamp(x[md.y_base[i] + (t - md.vlo[i])], 0.0, 1.0);
      double f = std::min(v, 1.0 - v);
      if (f > pick.frac + 1e-12) {
        pick.frac = f;
        pick.movement = i;
        pick.t = t;
        pick.z_conn = -1;
      }
    }
  }
  for (size_t h = 0; h < md.z_index.size(); ++h) {
    if (nd.z_lo[h] == nd.z_hi[h]) continue;
    double v = std::clamp(x[md.z_index[h]], 0.0, 1.0);
    double f = std::min(v, 1.0 - v);
    if (f >= pick.frac + 1e-12) {
      pick.frac = f;
      pick.z_conn = static_cast<int>(h);
      pick.movement = -1;
    }
  }
  pick.integral = pick.frac < int_tol;
  return pick;
}

std::vector<int> extract_slots(const JointModel& md, const Instance& in, const Domains& nd,
                               const Eigen::VectorXd& x) {
  std::vector<int> slots(in.n_mov);
  for (int i = 0; i < in.n_mov; ++i) {
    int s = nd.lo[i];
    if (md.y_base[i] >= 0) {
      for (int t = std::max(md.vlo[i], nd.lo[i] + 1); t <= std::min(md.vhi[i], nd.hi[i]); ++t)
        if (x[md.y_base[i] + (t - md.vlo[i])] >= 0.5) s = std::max(s, t);
    }
    slots[i] = std::clamp(s, nd.lo[i], nd.hi[i]);
  }
  return slots;
}

bool slots_feasible(const Instance& in, const std::vector<int>& slots) {
  AllocationMatrix alloc(in.sc->schedule.grid, slots);
  if (!check_capacity(alloc, in.sc->r_bar, in.sc->l_window).empty()) return false;
  for (const auto& conn : in.sc->schedule.connections)
    if (!check_connect(alloc, conn)) return false;
  return true;
}

struct BnbOutcome {
  bool have_incumbent = false;
  Candidate incumbent;
  std::vector<char> keep;  // retained HEA set of the incumbent (switch solves)
  double best_bound = -kInf;
  long nodes = 0;
  bool gap_reached = false;
  double gap = kInf;
};

double relative_gap(double inc, double bound) {
  return (inc - bound) / std::max(std::abs(inc), 1.0);
}

BnbOutcome run_bnb(const Instance& in, const JointModel& md, const SwitchSpec& sw, int x_bar,
                   const SolveOptions& opt, Candidate initial,
                   const std::vector<char>& initial_keep) {
  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  // A purely combinatorial objective admits integer bound lifting.
  const bool integral_obj = in.hea.empty() && in.sc->w_per_w2 == 0.0 && !sw.enabled;
  auto lift_bound = [&](double b) {
    if (!integral_obj || !std::isfinite(b)) return b;
    return std::ceil(b - 1e-7);
  };

  qp::Settings st;
  double eps = std::clamp(0.01 * opt.gap_tolerance, 1e-10, 1e-6);
  st.eps_abs = eps;
  st.eps_rel = eps;
  st.max_iter = 25000;
  qp::Solver solver(md.prob, st);

  BnbOutcome out;
  if (initial.ok) {
    out.have_incumbent = true;
    out.incumbent = std::move(initial);
    out.keep = initial_keep;
  }

  auto mechanism_value = [&](const Candidate& c, const std::vector<char>& keep) {
    double v = c.obj.value;
    if (sw.enabled)
      for (size_t h = 0; h < keep.size(); ++h)
        if (keep[h]) v -= sw.w_prime;
    return v;
  };
  auto incumbent_value = [&] {
    return out.have_incumbent ? mechanism_value(out.incumbent, out.keep) : kInf;
  };
  auto cutoff = [&] {
    double inc = incumbent_value();
    if (!std::isfinite(inc)) return kInf;
    double margin = opt.gap_tolerance * std::max(std::abs(inc), 1.0);
    if (integral_obj) margin = std::max(margin, 1.0 - 1e-6);
    return inc - margin;
  };

  // Lower bound over everything already closed (pruned or fully resolved).
  double closed_lb = kInf;
  auto close_with = [&](double b) { closed_lb = std::min(closed_lb, b); };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  Node root;
  root.id = next_id++;
  root.domains = md.root;
  root.bound = -kInf;
  if (propagate(in, root.domains)) open.push(root);

  Eigen::VectorXd warm_x, warm_y;
  bool have_warm = false;

  auto try_candidate = [&](const std::vector<int>& preferred, const std::vector<char>& keep) {
    Candidate cand = build_candidate(in, preferred, &keep, x_bar);
    if (!cand.ok || !slots_feasible(in, cand.slots)) return;
    double value = mechanism_value(cand, keep);
    if (value < incumbent_value() - 1e-12 * std::max(1.0, std::abs(value))) {
      out.have_incumbent = true;
      out.incumbent = std::move(cand);
      out.keep = keep;
    }
  };

  while (!open.empty()) {
    if (out.nodes >= opt.max_nodes || elapsed() > opt.time_limit_seconds) break;
    Node node = open.top();
    open.pop();
    double cut = cutoff();
    if (node.bound >= cut) {
      close_with(node.bound);
      continue;
    }
    if (!propagate(in, node.domains)) continue;  // empty subtree
    ++out.nodes;

    apply_node_bounds(solver, md, in, node.domains);
    if (have_warm) solver.warm_start(warm_x, warm_y);
    auto res = solver.solve(cut);
    warm_x = res.x;
    warm_y = res.y;
    have_warm = true;

    double bound = lift_bound(std::max(node.bound, res.dual_bound));
    if (res.status == qp::SolveStatus::Pruned || bound >= cut) {
      close_with(bound);
      continue;
    }

    BranchPick pick = pick_branch(md, in, node.domains, res.x, 1e-5);
    if (pick.integral) {
      auto slots = extract_slots(md, in, node.domains, res.x);
      std::vector<char> keep(in.hea.size(), 1);
      if (sw.enabled)
        for (size_t h = 0; h < in.hea.size(); ++h)
          keep[h] = res.x[md.z_index[h]] >= 0.5 ? 1 : 0;
      if (slots_feasible(in, slots)) {
        auto charge = solve_capped(in, slots, &keep);
        if (charge.feasible) {
          Candidate cand;
          cand.slots = slots;
          cand.charge = std::move(charge);
          cand.obj = evaluate_objective(in, cand.slots, cand.charge.flatten_w2);
          cand.ok = true;
          double value = mechanism_value(cand, keep);
          if (value < incumbent_value() - 1e-12 * std::max(1.0, std::abs(value))) {
            out.have_incumbent = true;
            out.incumbent = std::move(cand);
            out.keep = keep;
          }
          // Integral relaxation: the node is exhausted at its own value.
          close_with(std::max(bound, value));
          continue;
        }
      }
      if (pick.frac < 1e-9) {
        close_with(bound);
        continue;
      }
    }

    // Periodic rounding heuristic.
    if (out.nodes == 1 || out.nodes % 4 == 0) {
      std::vector<int> pref(in.n_mov);
      for (int i = 0; i < in.n_mov; ++i) {
        double s = node.domains.lo[i];
        if (md.y_base[i] >= 0)
          for (int t = std::max(md.vlo[i], node.domains.lo[i] + 1);
               t <= std::min(md.vhi[i], node.domains.hi[i]); ++t)
            s += std::clamp(res.x[md.y_base[i] + (t - md.vlo[i])], 0.0, 1.0);
        pref[i] = std::clamp(static_cast<int>(std::lround(s)), md.root.lo[i], md.root.hi[i]);
      }
      std::vector<char> keep(in.hea.size(), 1);
      if (sw.enabled)
        for (size_t h = 0; h < in.hea.size(); ++h)
          keep[h] = res.x[md.z_index[h]] >= 0.5 ? 1 : 0;
      try_candidate(pref, keep);
    }

    // Branch.
    Node child_low, child_high;
    child_low.domains = node.domains;
    child_high.domains = node.domains;
    child_low.bound = bound;
    child_high.bound = bound;
    if (pick.z_conn >= 0) {
      child_low.domains.z_hi[pick.z_conn] = 0;
      child_high.domains.z_lo[pick.z_conn] = 1;
    } else if (pick.movement >= 0) {
      child_low.domains.hi[pick.movement] = pick.t - 1;  // Y = 0
      child_high.domains.lo[pick.movement] = pick.t;     // Y = 1
    } else {
      close_with(bound);
      continue;
    }
    child_low.id = next_id++;
    child_high.id = next_id++;
    if (propagate(in, child_low.domains)) open.push(child_low);
    if (propagate(in, child_high.domains)) open.push(child_high);
  }

  double inc = incumbent_value();
  double lb = std::min(closed_lb, inc);
  if (!open.empty()) lb = std::min(lb, open.top().bound);
  out.best_bound = std::min(lift_bound(lb), inc);
  if (out.have_incumbent) {
    out.gap = std::max(relative_gap(inc, out.best_bound), 0.0);
    out.gap_reached = out.gap <= opt.gap_tolerance + 1e-12;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solution assembly
// ---------------------------------------------------------------------------

RescheduleSolution assemble_solution(const Instance& in, const Candidate& cand,
                                     const BnbOutcome& bnb) {
  RescheduleSolution sol;
  sol.allocation = AllocationMatrix(in.sc->schedule.grid, cand.slots);
  sol.displacement.resize(in.n_mov);
  for (int i = 0; i < in.n_mov; ++i)
    sol.displacement[i] = displacement(in.requested[i], cand.slots[i]);

  std::vector<std::string> ids;
  for (const auto& h : in.hea) ids.push_back(h.id);
  sol.charging = ChargingProfile(in.sc->schedule.grid, std::move(ids));
  for (size_t h = 0; h < in.hea.size(); ++h)
    sol.charging.rates_w(h) = cand.charge.rates_w[h];

  sol.objective = cand.obj;
  sol.best_bound = bnb.best_bound;
  sol.optimality_gap = std::max(bnb.gap, 0.0);
  sol.status = bnb.gap_reached ? SolveStatus::Optimal : SolveStatus::GapNotReached;
  sol.nodes_explored = bnb.nodes;
  return sol;
}

void diagnose_infeasible(const Instance& in) {
  // Cheapest-to-verify first: connect, capacity, battery rate, airport power.
  for (size_t c = 0; c < in.sc->schedule.connections.size(); ++c) {
    if (in.sc->schedule.connections[c].min_connect_intervals > in.t_count - 1)
      throw InfeasibleError("connection " + in.sc->schedule.connections[c].id +
                                " cannot meet its connect floor within the horizon",
                            "connect");
  }
  long blocks = (in.t_count + in.sc->l_window) / (in.sc->l_window + 1);
  if (in.n_mov > in.sc->r_bar * blocks)
    throw InfeasibleError("declared capacity cannot host all movements", "capacity");
  for (const auto& h : in.hea) {
    if (h.min_len > in.t_count - 1)
      throw InfeasibleError("HEA connection " + h.id + " cannot be charged within the horizon",
                            "battery rate");
  }
  double total_e = 0.0;
  for (const auto& h : in.hea) total_e += h.energy_wh;
  if (total_e > in.sc->p_bar_w * in.t_count * in.dt_h * (1.0 + 1e-9))
    throw InfeasibleError("aggregate HEA energy exceeds what the airport cap can deliver",
                          "airport power");
  throw InfeasibleError("no feasible joint schedule and charging plan exists", "");
}

Domains full_domains(const Instance& in) {
  Domains d;
  d.lo.assign(in.n_mov, 0);
  d.hi.assign(in.n_mov, in.t_count - 1);
  return d;
}

Domains restricted_domains(const Instance& in, double incumbent_value, int x_bar) {
  Domains d = full_domains(in);
  long radius = in.t_count;
  if (std::isfinite(incumbent_value))
    radius = static_cast<long>(std::floor(incumbent_value / 2.0)) + 1;
  if (x_bar >= 0) radius = std::min(radius, static_cast<long>(x_bar));
  for (int i = 0; i < in.n_mov; ++i) {
    d.lo[i] = static_cast<int>(std::max<long>(0, in.requested[i] - radius));
    d.hi[i] = static_cast<int>(std::min<long>(in.t_count - 1, in.requested[i] + radius));
  }
  return d;
}

RescheduleSolution solve_impl(const Scenario& scenario, const SolveOptions& opt,
                              const SwitchSpec& sw, int x_bar,
                              std::vector<char>* keep_out, double* mech_obj_out) {
  const auto t_start = std::chrono::steady_clock::now();
  scenario.validate();
  build_model(scenario);  // structural prechecks
  Instance in = make_instance(scenario);

  if (in.n_mov == 0) {
    Candidate empty;
    empty.ok = true;
    empty.charge.feasible = true;
    BnbOutcome bnb;
    bnb.have_incumbent = true;
    bnb.gap = 0.0;
    bnb.gap_reached = true;
    bnb.best_bound = 0.0;
    auto sol = assemble_solution(in, empty, bnb);
    if (mech_obj_out) *mech_obj_out = 0.0;
    return sol;
  }

  // Initial incumbent from the requested slots.
  std::vector<char> all_keep(in.hea.size(), 1);
  Candidate greedy = build_candidate(in, in.requested, &all_keep, x_bar);
  std::vector<char> greedy_keep = all_keep;
  if (sw.enabled && !greedy.ok) {
    // All-conventional fallback.
    std::vector<char> none(in.hea.size(), 0);
    greedy = build_candidate(in, in.requested, &none, x_bar);
    greedy_keep = none;
  }

  // Switch solves bound displacements by x_bar outright; plain solves can
  // restrict slot domains around the requests using the incumbent value,
  // since any movement displaced d costs at least 2d in the objective.
  double radius_seed = (!sw.enabled && greedy.ok) ? greedy.obj.value : kInf;
  Domains root = restricted_domains(in, radius_seed, x_bar);
  if (sw.enabled) {
    root.z_lo.assign(in.hea.size(), 0);
    root.z_hi.assign(in.hea.size(), 1);
  }
  if (!propagate(in, root)) {
    root = restricted_domains(in, kInf, x_bar);
    if (sw.enabled) {
      root.z_lo.assign(in.hea.size(), 0);
      root.z_hi.assign(in.hea.size(), 1);
    }
    if (!propagate(in, root)) diagnose_infeasible(in);
  }

  JointModel md = build_joint(in, root, sw);
  BnbOutcome bnb = run_bnb(in, md, sw, x_bar, opt, std::move(greedy), greedy_keep);

  if (!bnb.have_incumbent) {
    if (bnb.nodes >= opt.max_nodes)
      throw Error("search budget exhausted before any feasible schedule was found");
    diagnose_infeasible(in);
  }

  auto sol = assemble_solution(in, bnb.incumbent, bnb);
  sol.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  if (keep_out) *keep_out = bnb.keep;
  if (mech_obj_out) {
    *mech_obj_out = sol.objective.value;
    if (sw.enabled)
      for (char k : bnb.keep)
        if (k) *mech_obj_out -= sw.w_prime;
  }
  return sol;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

void Scenario::validate() const {
  schedule.validate();
  if (r_bar < 1) throw Error("declared capacity must be at least 1");
  if (l_window < 1) throw Error("capacity window must be at least 1");
  if (p_bar_w <= 0.0) throw Error("airport power cap must be positive");
  if (w_per_w2 < 0.0) throw Error("flatten weight must be nonnegative");
  std::vector<int> seen(schedule.movements.size(), 0);
  for (const auto& c : schedule.connections) {
    if (++seen[c.arrival] > 1 || ++seen[c.departure] > 1)
      throw Error("movement participates in more than one connection");
  }
}

Scenario Scenario::without_charging() const {
  Scenario out = *this;
  for (auto& c : out.schedule.connections) c.hea.reset();
  out.w_per_w2 = 0.0;
  return out;
}

ModelInfo build_model(const Scenario& scenario) {
  scenario.validate();
  const int t_count = scenario.schedule.grid.num_intervals;
  const double dt_h = scenario.schedule.grid.dt_hours();

  ModelInfo info;
  info.num_movements = static_cast<int>(scenario.schedule.movements.size());
  info.num_binary_vars = info.num_movements * t_count;
  info.num_capacity_rows = t_count;
  info.num_connect_rows = static_cast<int>(scenario.schedule.connections.size());

  for (const auto& conn : scenario.schedule.connections) {
    if (conn.min_connect_intervals > t_count - 1)
      throw ModelInfeasibleError("connection " + conn.id +
                                 " has no feasible slot pair for its connect floor");
    if (!conn.hea) continue;
    info.num_charge_vars += t_count;
    info.num_linearization_rows += t_count;
    info.num_energy_rows += 1;
    double deliverable = conn.hea->rate_cap_w * (t_count - 1) * dt_h;
    if (conn.hea->energy_wh > deliverable * (1.0 + 1e-12))
      throw ModelInfeasibleError("HEA connection " + conn.id +
                                 " cannot receive its energy within the horizon");
  }
  info.num_power_rows = t_count;
  return info;
}

int RescheduleSolution::max_displacement() const {
  int m = 0;
  for (const auto& d : displacement) m = std::max({m, d.late, d.early});
  return m;
}

int RescheduleSolution::total_displacement() const {
  int s = 0;
  for (const auto& d : displacement) s += d.total();
  return s;
}

RescheduleSolution solve(const Scenario& scenario, const SolveOptions& options) {
  auto sol = solve_impl(scenario, options, SwitchSpec{}, -1, nullptr, nullptr);
  auto report = verify(sol, scenario);
  if (!report.all_pass()) throw Error("internal audit failed: " + report.summary());
  return sol;
}

SwitchSolveResult solve_with_switching(const Scenario& scenario, double w_prime,
                                       int x_bar_intervals, const SolveOptions& options) {
  if (w_prime <= 0.0) throw Error("retention weight must be positive");
  if (x_bar_intervals < 0) throw Error("negative displacement threshold");
  SwitchSpec sw;
  sw.enabled = true;
  sw.w_prime = w_prime;
  SwitchSolveResult out;
  std::vector<char> keep;
  out.solution = solve_impl(scenario, options, sw, x_bar_intervals, &keep, &out.mechanism_objective);
  out.keep_hea = keep;
  return out;
}

bool VerifyReport::all_pass() const {
  for (const auto& f : families)
    if (!f.pass) return false;
  return true;
}

std::string VerifyReport::summary() const {
  std::string s;
  for (const auto& f : families) {
    if (!s.empty()) s += "; ";
    s += f.name + (f.pass ? ": pass" : ": FAIL (" + f.detail + ")");
  }
  return s;
}

VerifyReport verify(const RescheduleSolution& solution, const Scenario& scenario) {
  VerifyReport report;
  Instance in = make_instance(scenario);
  const auto& alloc = solution.allocation;

  auto add = [&](const std::string& name, bool pass, double worst, const std::string& detail) {
    report.families.push_back({name, pass, worst, detail});
  };

  {  // connect
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (const auto& conn : scenario.schedule.connections) {
      int sep = alloc.slot(conn.departure) - alloc.slot(conn.arrival);
      if (sep < conn.min_connect_intervals) {
        pass = false;
        worst = std::max(worst, static_cast<double>(conn.min_connect_intervals - sep));
        detail = "connection " + conn.id;
      }
    }
    add("connect", pass, worst, detail);
  }
  {  // capacity
    auto violations = check_capacity(alloc, scenario.r_bar, scenario.l_window);
    double worst = 0.0;
    std::string detail;
    for (const auto& v : violations) {
      worst = std::max(worst, static_cast<double>(v.count - scenario.r_bar));
      detail = "window [" + std::to_string(v.window_start) + ", " +
               std::to_string(v.window_end) + "]";
    }
    add("capacity", violations.empty(), worst, detail);
  }
  {  // battery rate and window confinement
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (size_t h = 0; h < in.hea.size(); ++h) {
      const auto& hv = in.hea[h];
      const auto& rates = solution.charging.rates_w(static_cast<int>(h));
      int lo = alloc.slot(hv.arr) + 1, hi = alloc.slot(hv.dep);
      double tol = 1e-6 * std::max(hv.cap_w, 1.0);
      for (int t = 0; t < in.t_count; ++t) {
        double over = 0.0;
        if (t < lo || t > hi)
          over = std::abs(rates[t]);
        else
          over = std::max({-rates[t], rates[t] - hv.cap_w});
        if (over > tol) {
          pass = false;
          worst = std::max(worst, over);
          detail = "connection " + hv.id;
        }
      }
    }
    add("battery rate", pass, worst, detail);
  }
  {  // airport power
    double peak = solution.charging.num_tasks() > 0 ? solution.charging.peak_w() : 0.0;
    double over = peak - scenario.p_bar_w;
    double tol = std::max(1e-6 * scenario.p_bar_w, 1e-3);
    add("airport power", over <= tol, std::max(over, 0.0),
        over > tol ? "peak exceeds the cap" : "");
  }
  {  // energy
    bool pass = true;
    double worst = 0.0;
    std::string detail;
    for (size_t h = 0; h < in.hea.size(); ++h) {
      double got = solution.charging.task_energy_wh(static_cast<int>(h));
      double gap = std::abs(got - in.hea[h].energy_wh);
      double tol = 1e-6 * std::max(in.hea[h].energy_wh, 1.0);
      if (gap > tol) {
        pass = false;
        worst = std::max(worst, gap);
        detail = "connection " + in.hea[h].id;
      }
    }
    add("energy", pass, worst, detail);
  }
  {  // displacement bookkeeping and objective
    bool pass = true;
    double worst = 0.0;
    ObjectiveBreakdown expect;
    for (int i = 0; i < in.n_mov; ++i) {
      auto d = displacement(in.requested[i], alloc.slot(i));
      if (d.late != solution.displacement[i].late || d.early != solution.displacement[i].early)
        pass = false;
      expect.max_disp = std::max(expect.max_disp, static_cast<double>(d.total()));
      expect.total_disp += d.total();
    }
    expect.flatten_w2 = solution.charging.sum_sq_aggregate_w2();
    expect.value = expect.max_disp + expect.total_disp + scenario.w_per_w2 * expect.flatten_w2;
    double tol = 1e-9 * std::max(1.0, std::abs(expect.value));
    double gap = std::abs(expect.value - solution.objective.value);
    if (gap > tol + 1e-9) pass = false;
    worst = gap;
    add("objective", pass, worst, pass ? "" : "stored objective disagrees with recomputation");
  }
  return report;
}

}  // namespace heasched::reschedule
