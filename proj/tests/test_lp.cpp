#include <doctest.h>

#include <sstream>

#include "risbeam/lp.hpp"
#include "test_helpers.hpp"

using namespace risbeam;

namespace {

// Box |x_i| <= 1 plus random cuts that keep the corner x = 1 feasible, some
// of them tight there to force degenerate pivots. Rows 0..n-1 (x_i <= 1)
// form a feasible starting vertex.
LinearProgram random_lp(Rng& rng, int n, int cuts) {
  LinearProgram lp;
  lp.objective.resize(n);
  for (int j = 0; j < n; ++j) lp.objective[j] = rng.uniform(-1, 1);
  lp.constraints = RMatrix::Zero(2 * n + cuts, n);
  lp.bounds = RVector::Ones(2 * n + cuts);
  for (int j = 0; j < n; ++j) {
    lp.constraints(j, j) = 1.0;
    lp.constraints(n + j, j) = -1.0;
  }
  for (int i = 0; i < cuts; ++i) {
    double at_corner = 0.0;
    for (int j = 0; j < n; ++j) at_corner += (lp.constraints(2 * n + i, j) = rng.uniform(-1, 1));
    lp.bounds[2 * n + i] = at_corner + (i % 3 == 0 ? 0.0 : rng.uniform(0.0, 0.5));
  }
  for (int j = 0; j < n; ++j) lp.start_basis.push_back(j);
  return lp;
}

}  // namespace

TEST_CASE("small LP with a known optimum") {
  // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3, -x <= 0, -y <= 0
  LinearProgram lp;
  lp.objective = RVector{{3.0, 2.0}};
  lp.constraints = RMatrix{{1, 1}, {1, 3}, {1, 0}, {-1, 0}, {0, -1}};
  lp.bounds = RVector{{4, 6, 3, 0, 0}};
  const auto t = solve_tableau(lp);
  REQUIRE(t.status == LpStatus::Optimal);
  CHECK(t.objective_value == doctest::Approx(11.0));
  CHECK(t.x[0] == doctest::Approx(3.0));
  CHECK(t.x[1] == doctest::Approx(1.0));

  lp.start_basis = {3, 4};  // origin
  const auto v = solve_from_vertex(lp);
  REQUIRE(v.status == LpStatus::Optimal);
  CHECK(v.objective_value == doctest::Approx(11.0));
}

TEST_CASE("vertex simplex agrees with the tableau reference on random LPs") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(2, 12);
    const LinearProgram lp = random_lp(rng, n, rng.uniform_int(0, 3 * n));
    LinearProgram cold = lp;
    cold.start_basis.clear();
    const auto ref = solve_tableau(cold);
    REQUIRE(ref.status == LpStatus::Optimal);
    for (auto rule : {PivotRule::Bland, PivotRule::DantzigWithBland, PivotRule::SteepestEdgeWithBland}) {
      LpOptions opt;
      opt.rule = rule;
      opt.refactor_every = 5;
      const auto v = solve_from_vertex(lp, opt);
      CAPTURE(trial);
      REQUIRE(v.status == LpStatus::Optimal);
      CHECK(v.objective_value == doctest::Approx(ref.objective_value).epsilon(1e-9));
      CHECK(lp.feasibility_residual(v.x) < 1e-9);
      CHECK(v.basis.size() == static_cast<std::size_t>(n));
    }
  }
}

TEST_CASE("optimum dominates every feasible vertex found by sampling") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const LinearProgram lp = random_lp(rng, 3, 4);
    const auto sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    for (int k = 0; k < 2000; ++k) {
      const RVector x = RVector::NullaryExpr(3, [&] { return rng.uniform(-1, 1); });
      if (lp.feasibility_residual(x) > 0) continue;
      CHECK(lp.objective.dot(x) <= sol.objective_value + 1e-9);
    }
  }
}

TEST_CASE("infeasible and unbounded programs are reported") {
  LinearProgram bad;
  bad.objective = RVector{{1.0}};
  bad.constraints = RMatrix{{1.0}, {-1.0}};
  bad.bounds = RVector{{-1.0, -1.0}};  // x <= -1 and x >= 1
  CHECK(solve_tableau(bad).status == LpStatus::Infeasible);

  LinearProgram open;
  open.objective = RVector{{1.0, 0.0}};
  open.constraints = RMatrix{{-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
  open.bounds = RVector{{0.0, 1.0, 1.0}};
  CHECK(solve_tableau(open).status == LpStatus::Unbounded);
  open.start_basis = {0, 1};
  CHECK(solve_from_vertex(open).status == LpStatus::Unbounded);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp;
  lp.objective = RVector::Ones(2);
  lp.constraints = RMatrix::Ones(3, 3);
  lp.bounds = RVector::Ones(3);
  CHECK_THROWS_AS(lp.validate(), std::invalid_argument);
}

TEST_CASE("text dump round-trips") {
  Rng rng(9);
  const LinearProgram lp = random_lp(rng, 4, 5);
  std::stringstream ss;
  write_lp(ss, lp);
  const std::string text = ss.str();
  CHECK(text.rfind("max 4\nc'", 0) == 0);
  const LinearProgram back = read_lp(ss);
  CHECK((back.objective - lp.objective).norm() == 0.0);
  CHECK((back.constraints - lp.constraints).norm() == 0.0);
  CHECK((back.bounds - lp.bounds).norm() == 0.0);
  std::istringstream junk("max 2 c' 1");
  CHECK_THROWS(read_lp(junk));
}
