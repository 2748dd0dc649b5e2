#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fairflip/lp_core.hpp"
#include "fairflip/rng.hpp"
#include "support/oracles.hpp"

using namespace fairflip;

namespace {

LinearProgram random_bounded_lp(Rng& rng) {
  const std::size_t m = 2 + rng.index(5);       // up to 6 vars
  const std::size_t r = 1 + rng.index(8);       // up to 8 rows
  LinearProgram lp = LinearProgram::with_vars(m);
  for (std::size_t j = 0; j < m; ++j) {
    lp.objective[j] = rng.uniform(-2.0, 2.0);
    lp.lower[j] = rng.uniform(-3.0, 0.0);
    lp.upper[j] = lp.lower[j] + rng.uniform(0.5, 5.0);
  }
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) row[j] = rng.uniform(-2.0, 2.0);
    const Relation rel = rng.index(4) == 0 ? Relation::GreaterEq : Relation::LessEq;
    lp.add_row(std::move(row), rel, rng.uniform(-2.0, 4.0));
  }
  return lp;
}

double residual(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  for (const auto& row : lp.rows) {
    double act = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) act += row.coeffs[j] * x[j];
    switch (row.rel) {
      case Relation::LessEq: worst = std::max(worst, act - row.rhs); break;
      case Relation::GreaterEq: worst = std::max(worst, row.rhs - act); break;
      case Relation::Equal: worst = std::max(worst, std::abs(act - row.rhs)); break;
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("min x subject to x >= 3 in a box") {
  LinearProgram lp = LinearProgram::with_vars(1);
  lp.objective = {1.0};
  lp.lower = {0.0};
  lp.upper = {10.0};
  lp.add_row({1.0}, Relation::GreaterEq, 3.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("infeasible bounds versus row") {
  LinearProgram lp = LinearProgram::with_vars(1);
  lp.objective = {0.0};
  lp.lower = {0.0};
  lp.upper = {kLpInfinity};
  lp.add_row({1.0}, Relation::LessEq, -1.0);
  CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("tie broken toward the lowest entering index") {
  LinearProgram lp = LinearProgram::with_vars(2);
  lp.objective = {-1.0, -1.0};
  lp.lower = {0.0, 0.0};
  lp.upper = {kLpInfinity, kLpInfinity};
  lp.add_row({1.0, 1.0}, Relation::LessEq, 1.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(sol.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.x[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("unbounded direction is reported") {
  LinearProgram lp = LinearProgram::with_vars(1);
  lp.objective = {-1.0};
  lp.lower = {0.0};
  lp.upper = {kLpInfinity};
  CHECK(solve_lp(lp).status == LpStatus::Unbounded);
}

TEST_CASE("equality rows, free variables and negative bounds") {
  // min x + y  s.t.  x + y = 2, x - y >= -4, x in [-5, 5], y free
  LinearProgram lp = LinearProgram::with_vars(2);
  lp.objective = {1.0, 1.0};
  lp.lower = {-5.0, -kLpInfinity};
  lp.upper = {5.0, kLpInfinity};
  lp.add_row({1.0, 1.0}, Relation::Equal, 2.0);
  lp.add_row({1.0, -1.0}, Relation::GreaterEq, -4.0);
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(residual(lp, sol.x) < 1e-7);
}

TEST_CASE("coefficients at or beyond 1e30 are rejected") {
  LinearProgram lp = LinearProgram::with_vars(1);
  lp.objective = {1e30};
  lp.lower = {0.0};
  lp.upper = {1.0};
  CHECK_THROWS_AS(solve_lp(lp), Error);
}

TEST_CASE("seeded LPs match vertex enumeration") {
  Rng rng(20240901);
  std::size_t optimal_seen = 0;
  for (int trial = 0; trial < 220; ++trial) {
    const LinearProgram lp = random_bounded_lp(rng);
    const LpSolution sol = solve_lp(lp);
    const auto oracle = oracles::lp_vertex_enumeration(lp);
    if (sol.status == LpStatus::Optimal) {
      ++optimal_seen;
      REQUIRE_MESSAGE(oracle.has_value(), "trial ", trial, ": solver optimal, oracle infeasible");
      CHECK_MESSAGE(std::abs(sol.objective_value - *oracle) <= 1e-7 * std::max(1.0, std::abs(*oracle)),
                    "trial ", trial, ": solver ", sol.objective_value, " oracle ", *oracle);
      CHECK_MESSAGE(residual(lp, sol.x) < 1e-7, "trial ", trial, " residual ", residual(lp, sol.x));
      CHECK(std::abs(sol.objective_value -
                     [&] {
                       double s = 0.0;
                       for (std::size_t j = 0; j < lp.num_vars(); ++j)
                         s += lp.objective[j] * sol.x[j];
                       return s;
                     }()) <= 1e-9 * std::max(1.0, std::abs(sol.objective_value)));
    } else if (sol.status == LpStatus::Infeasible) {
      CHECK_MESSAGE(!oracle.has_value(), "trial ", trial, ": solver infeasible, oracle found ",
                    oracle.value_or(0.0));
    }
    // Unbounded cannot occur: every variable is boxed.
    CHECK(sol.status != LpStatus::Unbounded);
  }
  CHECK(optimal_seen >= 200);  // the generator must exercise the optimal path
}

TEST_CASE("warm-started resolve after adding a row matches a cold solve") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    LinearProgram lp = random_bounded_lp(rng);
    const LpSolution first = solve_lp(lp);
    if (first.status != LpStatus::Optimal) continue;
    std::vector<double> row(lp.num_vars());
    for (auto& v : row) v = rng.uniform(-1.0, 1.0);
    double act = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) act += row[j] * first.x[j];
    // rhs near the current activity, so some rows cut the old optimum off.
    lp.add_row(std::move(row), Relation::LessEq, act + rng.uniform(-0.5, 0.5));
    const LpSolution cold = solve_lp(lp);
    const LpSolution warm = solve_lp(lp, &first.basis);
    REQUIRE(cold.status == warm.status);
    if (cold.status == LpStatus::Optimal)
      CHECK(std::abs(cold.objective_value - warm.objective_value) <=
            1e-7 * std::max(1.0, std::abs(cold.objective_value)));
  }
}

TEST_CASE("scaling the objective scales the optimum and keeps the argmin") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    LinearProgram lp = random_bounded_lp(rng);
    const LpSolution base = solve_lp(lp);
    if (base.status != LpStatus::Optimal) continue;
    LinearProgram scaled = lp;
    const double lambda = 3.5;
    for (auto& c : scaled.objective) c *= lambda;
    const LpSolution after = solve_lp(scaled);
    REQUIRE(after.status == LpStatus::Optimal);
    CHECK(std::abs(after.objective_value - lambda * base.objective_value) <=
          1e-7 * std::max(1.0, std::abs(lambda * base.objective_value)));
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
      CHECK(std::abs(after.x[j] - base.x[j]) < 1e-7);
  }
}
