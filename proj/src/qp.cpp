#include "heasched/qp.hpp"

#include <algorithm>
#include <cmath>

#include "heasched/errors.hpp"

namespace heasched::qp {

namespace {

double clamp01_inf(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

struct Solver::Impl {
  // Stacked constraints: rows 0..n-1 are the variable box (identity), rows
  // n.. are the general rows.
  Eigen::SparseMatrix<double> a_full;        // scaled, (n+m) x n
  Eigen::SparseMatrix<double> a_full_t;      // transpose, cached
  Eigen::VectorXd d_scale;                   // variable scaling (n)
  Eigen::VectorXd e_scale;                   // row scaling (n+m)
  double cost_scale = 1.0;
  Eigen::VectorXd p_scaled;                  // diag, scaled
  Eigen::VectorXd q_scaled;

  Eigen::VectorXd lo_full, hi_full;          // unscaled stacked bounds
  Eigen::VectorXd lo_scaled, hi_scaled;

  Eigen::VectorXd rho_vec, rho_inv;
  double rho_base = 0.1;

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  int refactor_count = 0;

  // Iterates (scaled).
  Eigen::VectorXd x, z, y;
  bool have_warm = false;

  int n = 0, m_full = 0;

  void rebuild_scaled_bounds() {
    lo_scaled = e_scale.cwiseProduct(lo_full).cwiseMin(kInf);
    hi_scaled = e_scale.cwiseProduct(hi_full);
    for (int i = 0; i < m_full; ++i) {
      if (!std::isfinite(lo_full[i])) lo_scaled[i] = -kInf;
      if (!std::isfinite(hi_full[i])) hi_scaled[i] = kInf;
    }
  }

  void factorize(double sigma) {
    const int dim = n + m_full;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(n + a_full.nonZeros() + m_full);
    for (int j = 0; j < n; ++j) trips.emplace_back(j, j, p_scaled[j] + sigma);
    for (int col = 0; col < a_full.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_full, col); it; ++it)
        trips.emplace_back(n + static_cast<int>(it.row()), col, it.value());
    for (int i = 0; i < m_full; ++i) trips.emplace_back(n + i, n + i, -rho_inv[i]);
    Eigen::SparseMatrix<double> kkt(dim, dim);
    kkt.setFromTriplets(trips.begin(), trips.end());
    ldlt.compute(kkt);
    if (ldlt.info() != Eigen::Success) throw Error("KKT factorization failed");
    ++refactor_count;
  }

  void set_rho(double rho, double rho_eq_scale) {
    rho_base = rho;
    for (int i = 0; i < m_full; ++i) {
      bool is_eq = std::isfinite(lo_full[i]) && std::isfinite(hi_full[i]) &&
                   lo_full[i] >= hi_full[i] - 1e-14 * std::max(1.0, std::abs(hi_full[i]));
      rho_vec[i] = is_eq ? rho * rho_eq_scale : rho;
      rho_inv[i] = 1.0 / rho_vec[i];
    }
  }
};

Solver::Solver(Problem prob, Settings settings)
    : prob_(std::move(prob)), settings_(settings), impl_(new Impl) {
  auto& im = *impl_;
  im.n = prob_.n;
  const int m = prob_.m();
  im.m_full = im.n + m;

  if (prob_.p_diag.size() != im.n || prob_.q.size() != im.n)
    throw Error("qp: cost size mismatch");
  if (prob_.x_lo.size() != im.n || prob_.x_hi.size() != im.n)
    throw Error("qp: box size mismatch");
  for (int j = 0; j < im.n; ++j) {
    if (!std::isfinite(prob_.x_lo[j]) || !std::isfinite(prob_.x_hi[j]))
      throw Error("qp: variable boxes must be finite");
    if (prob_.p_diag[j] < 0.0) throw Error("qp: negative curvature");
  }

  // Stack [I; A] and the bounds.
  Eigen::SparseMatrix<double> a_stack(im.m_full, im.n);
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(im.n + prob_.a.nonZeros());
    for (int j = 0; j < im.n; ++j) trips.emplace_back(j, j, 1.0);
    for (int col = 0; col < prob_.a.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(prob_.a, col); it; ++it)
        trips.emplace_back(im.n + static_cast<int>(it.row()), col, it.value());
    a_stack.setFromTriplets(trips.begin(), trips.end());
  }
  im.lo_full.resize(im.m_full);
  im.hi_full.resize(im.m_full);
  im.lo_full.head(im.n) = prob_.x_lo;
  im.hi_full.head(im.n) = prob_.x_hi;
  im.lo_full.tail(m) = prob_.row_lo;
  im.hi_full.tail(m) = prob_.row_hi;

  // Ruiz equilibration on the stacked matrix, then cost scaling.
  im.d_scale = Eigen::VectorXd::Ones(im.n);
  im.e_scale = Eigen::VectorXd::Ones(im.m_full);
  Eigen::VectorXd col_norm(im.n), row_norm(im.m_full);
  for (int pass = 0; pass < settings_.ruiz_iters; ++pass) {
    col_norm.setZero();
    row_norm.setZero();
    for (int col = 0; col < a_stack.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(a_stack, col); it; ++it) {
        double v = std::abs(it.value() * im.e_scale[it.row()] * im.d_scale[col]);
        col_norm[col] = std::max(col_norm[col], v);
        row_norm[it.row()] = std::max(row_norm[it.row()], v);
      }
    for (int j = 0; j < im.n; ++j)
      if (col_norm[j] > 1e-12) im.d_scale[j] /= std::sqrt(col_norm[j]);
    for (int i = 0; i < im.m_full; ++i)
      if (row_norm[i] > 1e-12) im.e_scale[i] /= std::sqrt(row_norm[i]);
  }
  double p_norm = 0.0, q_norm = 0.0;
  for (int j = 0; j < im.n; ++j) {
    p_norm = std::max(p_norm, prob_.p_diag[j] * im.d_scale[j] * im.d_scale[j]);
    q_norm = std::max(q_norm, std::abs(prob_.q[j] * im.d_scale[j]));
  }
  double denom = std::max(p_norm, q_norm);
  im.cost_scale = denom > 1e-12 ? 1.0 / denom : 1.0;
  im.cost_scale = clamp01_inf(im.cost_scale, 1e-8, 1e8);

  im.p_scaled.resize(im.n);
  im.q_scaled.resize(im.n);
  for (int j = 0; j < im.n; ++j) {
    im.p_scaled[j] = im.cost_scale * prob_.p_diag[j] * im.d_scale[j] * im.d_scale[j];
    im.q_scaled[j] = im.cost_scale * prob_.q[j] * im.d_scale[j];
  }

  im.a_full = a_stack;
  for (int col = 0; col < im.a_full.outerSize(); ++col)
    for (Eigen::SparseMatrix<double>::InnerIterator it(im.a_full, col); it; ++it)
      it.valueRef() *= im.e_scale[it.row()] * im.d_scale[col];
  im.a_full_t = im.a_full.transpose();

  im.rebuild_scaled_bounds();
  im.rho_vec.resize(im.m_full);
  im.rho_inv.resize(im.m_full);
  im.set_rho(settings_.rho, settings_.rho_eq_scale);
  im.factorize(settings_.sigma);
  im.refactor_count = 0;

  im.x = Eigen::VectorXd::Zero(im.n);
  im.z = Eigen::VectorXd::Zero(im.m_full);
  im.y = Eigen::VectorXd::Zero(im.m_full);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

void Solver::set_var_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  auto& im = *impl_;
  im.lo_full.head(im.n) = lo;
  im.hi_full.head(im.n) = hi;
  prob_.x_lo = lo;
  prob_.x_hi = hi;
  im.rebuild_scaled_bounds();
}

void Solver::set_var_bound(int var, double lo, double hi) {
  auto& im = *impl_;
  im.lo_full[var] = lo;
  im.hi_full[var] = hi;
  prob_.x_lo[var] = lo;
  prob_.x_hi[var] = hi;
  im.lo_scaled[var] = im.e_scale[var] * lo;
  im.hi_scaled[var] = im.e_scale[var] * hi;
}

void Solver::set_row_bounds(int row, double lo, double hi) {
  auto& im = *impl_;
  int i = im.n + row;
  im.lo_full[i] = lo;
  im.hi_full[i] = hi;
  prob_.row_lo[row] = lo;
  prob_.row_hi[row] = hi;
  im.lo_scaled[i] = std::isfinite(lo) ? im.e_scale[i] * lo : -kInf;
  im.hi_scaled[i] = std::isfinite(hi) ? im.e_scale[i] * hi : kInf;
}

void Solver::warm_start(const Eigen::VectorXd& x, const Eigen::VectorXd& y_rows) {
  auto& im = *impl_;
  for (int j = 0; j < im.n; ++j) im.x[j] = x[j] / im.d_scale[j];
  im.z.head(im.n) = im.e_scale.head(im.n).cwiseProduct(x);
  Eigen::VectorXd ax = prob_.a * x;
  for (int i = 0; i < prob_.m(); ++i) im.z[im.n + i] = im.e_scale[im.n + i] * ax[i];
  im.y.setZero();
  for (int i = 0; i < prob_.m(); ++i)
    im.y[im.n + i] = im.cost_scale * y_rows[i] / im.e_scale[im.n + i];
  im.have_warm = true;
}

void Solver::clear_warm_start() {
  auto& im = *impl_;
  im.x.setZero();
  im.z.setZero();
  im.y.setZero();
  im.have_warm = false;
}

double Solver::primal_objective(const Eigen::VectorXd& x) const {
  double obj = prob_.obj_const;
  for (int j = 0; j < prob_.n; ++j)
    obj += 0.5 * prob_.p_diag[j] * x[j] * x[j] + prob_.q[j] * x[j];
  return obj;
}

double Solver::rigorous_dual_bound(const Eigen::VectorXd& y_rows) const {
  const auto& im = *impl_;
  const int m = prob_.m();
  double bound = prob_.obj_const;

  Eigen::VectorXd y = y_rows;
  for (int i = 0; i < m; ++i) {
    if (!std::isfinite(prob_.row_hi[i]) && y[i] > 0.0) y[i] = 0.0;
    if (!std::isfinite(prob_.row_lo[i]) && y[i] < 0.0) y[i] = 0.0;
    bound -= y[i] > 0.0 ? y[i] * prob_.row_hi[i] : y[i] * prob_.row_lo[i];
  }

  Eigen::VectorXd c_lin = prob_.q + prob_.a.transpose() * y;
  for (int j = 0; j < prob_.n; ++j) {
    double p = prob_.p_diag[j], c = c_lin[j];
    double lo = im.lo_full[j], hi = im.hi_full[j];
    double xj;
    if (p > 0.0)
      xj = clamp01_inf(-c / p, lo, hi);
    else
      xj = c >= 0.0 ? lo : hi;
    bound += 0.5 * p * xj * xj + c * xj;
  }
  return bound;
}

Result Solver::solve(double prune_above, double eps_abs_in, double eps_rel_in, int max_iter_in) {
  auto& im = *impl_;
  const int n = im.n;
  const int m = prob_.m();
  const double eps_abs = eps_abs_in > 0.0 ? eps_abs_in : settings_.eps_abs;
  const double eps_rel = eps_rel_in > 0.0 ? eps_rel_in : settings_.eps_rel;
  const int max_iter = max_iter_in > 0 ? max_iter_in : settings_.max_iter;
  const double alpha = settings_.alpha;

  // Keep iterates consistent with the current bounds.
  im.z = im.z.cwiseMax(im.lo_scaled).cwiseMin(im.hi_scaled);

  Eigen::VectorXd rhs(n + im.m_full), sol(n + im.m_full);
  Eigen::VectorXd x_tilde(n), nu(im.m_full), z_tilde(im.m_full), z_interp(im.m_full);

  Result result;
  result.status = SolveStatus::MaxIter;
  double best_bound = -kInf;

  int it = 0;
  while (it < max_iter) {
    ++it;
    rhs.head(n) = settings_.sigma * im.x - im.q_scaled;
    rhs.tail(im.m_full) = im.z - im.rho_inv.cwiseProduct(im.y);
    sol = im.ldlt.solve(rhs);
    x_tilde = sol.head(n);
    nu = sol.tail(im.m_full);
    z_tilde = im.z + im.rho_inv.cwiseProduct(nu - im.y);

    im.x = alpha * x_tilde + (1.0 - alpha) * im.x;
    z_interp = alpha * z_tilde + (1.0 - alpha) * im.z;  // relaxed primal
    Eigen::VectorXd z_new = (z_interp + im.rho_inv.cwiseProduct(im.y))
                                .cwiseMax(im.lo_scaled)
                                .cwiseMin(im.hi_scaled);
    im.y = im.y + im.rho_vec.cwiseProduct(z_interp - z_new);
    im.z = z_new;

    if (it % settings_.check_every != 0 && it != max_iter) continue;

    // Unscaled residuals.
    Eigen::VectorXd ax = im.a_full * im.x;
    Eigen::VectorXd prim_gap = (ax - im.z).cwiseQuotient(im.e_scale);
    double prim_res = prim_gap.cwiseAbs().maxCoeff();
    Eigen::VectorXd dual_vec =
        (im.p_scaled.cwiseProduct(im.x) + im.q_scaled + im.a_full_t * im.y)
            .cwiseQuotient(im.d_scale) /
        im.cost_scale;
    double dual_res = dual_vec.cwiseAbs().maxCoeff();

    double prim_scale =
        std::max((ax.cwiseQuotient(im.e_scale)).cwiseAbs().maxCoeff(),
                 (im.z.cwiseQuotient(im.e_scale)).cwiseAbs().maxCoeff());
    Eigen::VectorXd aty = (im.a_full_t * im.y).cwiseQuotient(im.d_scale) / im.cost_scale;
    Eigen::VectorXd px =
        (im.p_scaled.cwiseProduct(im.x)).cwiseQuotient(im.d_scale) / im.cost_scale;
    double dual_scale = std::max({aty.cwiseAbs().maxCoeff(), px.cwiseAbs().maxCoeff(),
                                  prob_.q.cwiseAbs().maxCoeff()});

    result.prim_res = prim_res;
    result.dual_res = dual_res;
    result.iters = it;

    bool converged = prim_res <= eps_abs + eps_rel * prim_scale &&
                     dual_res <= eps_abs + eps_rel * dual_scale;

    if (std::isfinite(prune_above) || converged || it == max_iter) {
      Eigen::VectorXd y_rows(m);
      for (int i = 0; i < m; ++i)
        y_rows[i] = im.y[n + i] * im.e_scale[n + i] / im.cost_scale;
      double bound = rigorous_dual_bound(y_rows);
      best_bound = std::max(best_bound, bound);
      if (best_bound >= prune_above) {
        result.status = SolveStatus::Pruned;
        result.dual_bound = best_bound;
        result.x = im.d_scale.cwiseProduct(im.x);
        result.y = y_rows;
        result.obj = primal_objective(result.x);
        return result;
      }
    }

    if (converged) {
      result.status = SolveStatus::Solved;
      break;
    }

    // Rebalance rho when the residuals drift apart.
    if (settings_.adaptive_rho && im.refactor_count < settings_.max_refactor &&
        it % (settings_.check_every * 8) == 0) {
      double ratio = (prim_res / std::max(prim_scale, 1e-12)) /
                     std::max(dual_res / std::max(dual_scale, 1e-12), 1e-16);
      if (ratio > 25.0 || ratio < 0.04) {
        double new_rho = clamp01_inf(im.rho_base * std::sqrt(ratio), 1e-6, 1e6);
        im.set_rho(new_rho, settings_.rho_eq_scale);
        im.factorize(settings_.sigma);
      }
    }
  }

  result.x = im.d_scale.cwiseProduct(im.x);
  result.y.resize(m);
  for (int i = 0; i < m; ++i) result.y[i] = im.y[n + i] * im.e_scale[n + i] / im.cost_scale;
  double bound = rigorous_dual_bound(result.y);
  result.dual_bound = std::max(best_bound, bound);
  result.obj = primal_objective(result.x);
  return result;
}

}  // namespace heasched::qp
