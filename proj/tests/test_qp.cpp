#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_util.hpp"

#include "heasched/qp.hpp"
#include "heasched/rng.hpp"

using namespace heasched;

namespace {

qp::Problem make_problem(int n, int m) {
  qp::Problem p;
  p.n = n;
  p.p_diag = Eigen::VectorXd::Zero(n);
  p.q = Eigen::VectorXd::Zero(n);
  p.x_lo = Eigen::VectorXd::Zero(n);
  p.x_hi = Eigen::VectorXd::Ones(n);
  p.a.resize(m, n);
  p.row_lo = Eigen::VectorXd::Zero(m);
  p.row_hi = Eigen::VectorXd::Zero(m);
  return p;
}

}  // namespace

TEST_CASE("separable box QP solves in closed form") {
  // min (x0-2)^2 + (x1+1)^2 over [0,1]^2  ->  x = (1, 0), obj = 1 + 1 = 2.
  auto p = make_problem(2, 0);
  p.p_diag << 2.0, 2.0;
  p.q << -4.0, 2.0;
  p.obj_const = 4.0 + 1.0;
  qp::Solver solver(p);
  auto res = solver.solve();
  CHECK(res.status == qp::SolveStatus::Solved);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(res.x[1] == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(res.obj == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.dual_bound <= res.obj + 1e-6);
  CHECK(res.dual_bound == doctest::Approx(res.obj).epsilon(1e-5));
}

TEST_CASE("equality-coupled QP") {
  // min x0^2 + x1^2 s.t. x0 + x1 = 1, x in [0,1]^2 -> x = (0.5, 0.5), obj 0.5
  auto p = make_problem(2, 1);
  p.p_diag << 2.0, 2.0;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}};
  p.a.setFromTriplets(t.begin(), t.end());
  p.row_lo << 1.0;
  p.row_hi << 1.0;
  qp::Solver solver(p);
  auto res = solver.solve();
  CHECK(res.x[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(res.obj == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("pure LP with inequality rows") {
  // min -x0 - 2 x1 s.t. x0 + x1 <= 1.2, x in [0,1]^2 -> x = (0.2, 1), obj -2.2
  auto p = make_problem(2, 1);
  p.q << -1.0, -2.0;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}};
  p.a.setFromTriplets(t.begin(), t.end());
  p.row_lo << -qp::kInf;
  p.row_hi << 1.2;
  qp::Solver solver(p);
  auto res = solver.solve();
  CHECK(res.obj == doctest::Approx(-2.2).epsilon(1e-5));
  CHECK(res.dual_bound <= res.obj + 1e-5);
}

TEST_CASE("bound updates rebind without refactorizing") {
  auto p = make_problem(2, 1);
  p.p_diag << 2.0, 2.0;
  p.q << -2.0, -2.0;  // pulls toward (1, 1)
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}};
  p.a.setFromTriplets(t.begin(), t.end());
  p.row_lo << -qp::kInf;
  p.row_hi << 2.0;
  qp::Solver solver(p);
  auto res = solver.solve();
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));

  // Fix x0 = 0 as branching would.
  solver.set_var_bound(0, 0.0, 0.0);
  res = solver.solve();
  CHECK(res.x[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(res.x[1] == doctest::Approx(1.0).epsilon(1e-5));

  solver.set_var_bound(0, 0.0, 1.0);
  res = solver.solve();
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("dual bound is a true lower bound on random box QPs") {
  Rng rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + static_cast<int>(rng.uniform_int(0, 6));
    int m = 1 + static_cast<int>(rng.uniform_int(0, 4));
    auto p = make_problem(n, m);
    for (int j = 0; j < n; ++j) {
      p.p_diag[j] = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.1, 4.0);
      p.q[j] = rng.uniform(-2.0, 2.0);
      p.x_lo[j] = rng.uniform(-1.0, 0.0);
      p.x_hi[j] = p.x_lo[j] + rng.uniform(0.2, 2.0);
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (rng.uniform() < 0.6) trips.emplace_back(i, j, rng.uniform(-1.0, 1.0));
    p.a.setFromTriplets(trips.begin(), trips.end());
    for (int i = 0; i < m; ++i) {
      // Anchor bounds around a feasible interior point to keep it solvable.
      double mid = 0.0;
      p.row_lo[i] = mid - rng.uniform(0.5, 2.0);
      p.row_hi[i] = mid + rng.uniform(0.5, 2.0);
    }
    // x = 0 must be inside the boxes for the anchor to work.
    for (int j = 0; j < n; ++j) {
      p.x_lo[j] = std::min(p.x_lo[j], -0.01);
      p.x_hi[j] = std::max(p.x_hi[j], 0.01);
    }
    qp::Solver solver(p);
    auto res = solver.solve();
    CHECK(res.status == qp::SolveStatus::Solved);
    CHECK(res.dual_bound <= res.obj + 1e-6 * std::max(1.0, std::abs(res.obj)));
    CHECK(testutil::near_rel(res.dual_bound, res.obj, 1e-4));

    // Any clipped multiplier guess must stay below the optimum.
    Eigen::VectorXd y = res.y;
    for (int i = 0; i < m; ++i) y[i] += rng.uniform(-0.5, 0.5);
    CHECK(solver.rigorous_dual_bound(y) <= res.obj + 1e-6 * std::max(1.0, std::abs(res.obj)));
  }
}

TEST_CASE("early pruning fires once the bound crosses the threshold") {
  auto p = make_problem(3, 1);
  p.p_diag << 2.0, 2.0, 2.0;
  p.q << -2.0, -2.0, -2.0;
  std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}};
  p.a.setFromTriplets(t.begin(), t.end());
  p.row_lo << 1.5;
  p.row_hi << 1.5;
  p.obj_const = 3.0;  // objective = sum (x_i - 1)^2, optimum at x_i = 0.5
  qp::Solver solver(p);
  auto res = solver.solve(/*prune_above=*/0.1);
  CHECK(res.status == qp::SolveStatus::Pruned);
  CHECK(res.dual_bound >= 0.1);
}
