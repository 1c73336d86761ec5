#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <limits>
#include <memory>
#include <vector>

namespace heasched::qp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// min 0.5 x' diag(p) x + q' x + obj_const
// s.t. x_lo <= x <= x_hi, row_lo <= A x <= row_hi
//
// Boxes must be finite; row bounds may be +-inf on one side.
struct Problem {
  int n = 0;
  Eigen::VectorXd p_diag;
  Eigen::VectorXd q;
  Eigen::VectorXd x_lo, x_hi;
  Eigen::SparseMatrix<double> a;  // m x n
  Eigen::VectorXd row_lo, row_hi;
  double obj_const = 0.0;

  int m() const { return static_cast<int>(a.rows()); }
};

struct Settings {
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
  int max_iter = 100000;
  int check_every = 25;
  double sigma = 1e-6;
  double rho = 0.1;
  double rho_eq_scale = 1e3;
  double alpha = 1.6;
  int ruiz_iters = 10;
  bool adaptive_rho = true;
  int max_refactor = 6;
};

enum class SolveStatus { Solved, MaxIter, Pruned };

struct Result {
  Eigen::VectorXd x;  // primal, original units
  Eigen::VectorXd y;  // duals of the general rows, original units
  double obj = 0.0;
  double dual_bound = -kInf;  // rigorous lower bound on the optimum
  double prim_res = kInf;
  double dual_res = kInf;
  int iters = 0;
  SolveStatus status = SolveStatus::MaxIter;
};

// Operator-splitting solver with a single KKT factorization that is reused
// across solves; only bounds (variable boxes and row intervals) may change
// between solves, which is exactly what branching needs.
class Solver {
 public:
  explicit Solver(Problem prob, Settings settings = {});
  ~Solver();
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  const Problem& problem() const { return prob_; }

  void set_var_bounds(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);
  void set_var_bound(int var, double lo, double hi);
  void set_row_bounds(int row, double lo, double hi);

  void warm_start(const Eigen::VectorXd& x, const Eigen::VectorXd& y_rows);
  void clear_warm_start();

  // Stops early (status Pruned) once the rigorous dual bound reaches
  // prune_above. eps overrides apply to this solve only when positive.
  Result solve(double prune_above = kInf, double eps_abs = 0.0, double eps_rel = 0.0,
               int max_iter = 0);

  // Lower bound on the optimum from any multiplier guess for the general
  // rows (signs are clipped to the valid cone internally).
  double rigorous_dual_bound(const Eigen::VectorXd& y_rows) const;

  double primal_objective(const Eigen::VectorXd& x) const;

 private:
  struct Impl;
  Problem prob_;
  Settings settings_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace heasched::qp
