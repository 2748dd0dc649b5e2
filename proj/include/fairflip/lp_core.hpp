#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fairflip/error.hpp"

namespace fairflip {

inline constexpr double kLpInfinity = std::numeric_limits<double>::infinity();
// User-facing magnitude cap; anything at or beyond this is treated as infinite
// in bounds and rejected in coefficients.
inline constexpr double kLpBigValue = 1e30;

enum class Relation { LessEq, Equal, GreaterEq };

struct LpRow {
  std::vector<double> coeffs;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

struct LinearProgram {
  std::vector<double> objective;  // minimized
  std::vector<LpRow> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t num_vars() const { return objective.size(); }

  static LinearProgram with_vars(std::size_t m) {
    LinearProgram lp;
    lp.objective.assign(m, 0.0);
    lp.lower.assign(m, 0.0);
    lp.upper.assign(m, kLpInfinity);
    return lp;
  }

  void add_row(std::vector<double> coeffs, Relation rel, double rhs) {
    rows.push_back(LpRow{std::move(coeffs), rel, rhs});
  }

  /// Rejects non-finite or oversized coefficients and inconsistent bounds.
  void validate() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  std::vector<std::size_t> basis;  // structural+slack column indices
  std::size_t iterations = 0;
};

/// Two-phase primal simplex on a dense tableau with general variable bounds.
/// Dantzig pricing, Bland's rule after a run of degenerate pivots,
/// deterministic tie breaking by lowest index throughout.
LpSolution solve_lp(const LinearProgram& lp,
                    const std::vector<std::size_t>* warm_basis = nullptr);

}  // namespace fairflip
