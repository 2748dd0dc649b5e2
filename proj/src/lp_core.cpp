#include "fairflip/lp_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>

namespace fairflip {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;
constexpr double kDegenerateStep = 1e-10;
constexpr double kPhase1Tol = 1e-7;

enum class VarState : unsigned char { Basic, AtLower, AtUpper, FreeAtZero };

// Dense tableau in the current basis: t = B^{-1}[A | I | artificials].
// beta holds the *values* of the basic variables and is maintained directly;
// row operations never touch it.
struct Tableau {
  std::size_t n_struct = 0;
  std::size_t n_total = 0;
  std::size_t n_rows = 0;
  std::vector<double> t;
  std::vector<double> beta;
  std::vector<std::size_t> basis;
  std::vector<VarState> state;
  std::vector<double> lo, hi;
  std::vector<int> in_row;

  double& at(std::size_t i, std::size_t j) { return t[i * n_total + j]; }
  double at(std::size_t i, std::size_t j) const { return t[i * n_total + j]; }

  double nonbasic_value(std::size_t j) const {
    switch (state[j]) {
      case VarState::AtLower: return lo[j];
      case VarState::AtUpper: return hi[j];
      default: return 0.0;
    }
  }

  void pivot_rows(std::size_t row, std::size_t col) {
    const double inv = 1.0 / at(row, col);
    double* prow = &t[row * n_total];
    for (std::size_t j = 0; j < n_total; ++j) prow[j] *= inv;
    for (std::size_t i = 0; i < n_rows; ++i) {
      if (i == row) continue;
      const double f = at(i, col);
      if (f == 0.0) continue;
      double* irow = &t[i * n_total];
      for (std::size_t j = 0; j < n_total; ++j) irow[j] -= f * prow[j];
    }
  }
};

bool lp_trace_enabled() {
  static const bool on = std::getenv("FAIRFLIP_LP_TRACE") != nullptr;
  return on;
}

void dump_tableau(const Tableau& tb, const char* tag) {
  std::ostringstream os;
  os << "# FAIRFLIP_LP_TRACE " << tag << " rows=" << tb.n_rows << " cols=" << tb.n_total << '\n';
  for (std::size_t i = 0; i < tb.n_rows; ++i) {
    os << tb.basis[i] << '\t' << tb.beta[i];
    for (std::size_t j = 0; j < tb.n_total; ++j) os << '\t' << tb.at(i, j);
    os << '\n';
  }
  std::cerr << os.str();
}

struct Candidate {
  std::size_t col;
  double score;
  int direction;
};

struct RatioResult {
  double step = kLpInfinity;
  long row = -1;
  bool to_upper = false;
};

RatioResult ratio_test(const Tableau& tb, std::size_t col, int dir) {
  RatioResult r;
  if (std::isfinite(tb.lo[col]) && std::isfinite(tb.hi[col])) r.step = tb.hi[col] - tb.lo[col];
  for (std::size_t i = 0; i < tb.n_rows; ++i) {
    const double a = tb.at(i, col) * dir;
    if (std::abs(a) < kPivotTol) continue;
    const std::size_t bj = tb.basis[i];
    double limit;
    bool to_upper;
    if (a > 0.0) {
      if (!std::isfinite(tb.lo[bj])) continue;
      limit = (tb.beta[i] - tb.lo[bj]) / a;
      to_upper = false;
    } else {
      if (!std::isfinite(tb.hi[bj])) continue;
      limit = (tb.beta[i] - tb.hi[bj]) / a;
      to_upper = true;
    }
    if (limit < 0.0) limit = 0.0;
    const bool better = limit < r.step - 1e-12;
    const bool tie = !better && limit < r.step + 1e-12 && r.row >= 0 &&
                     bj < tb.basis[static_cast<std::size_t>(r.row)];
    if (better || tie) {
      r.step = limit;
      r.row = static_cast<long>(i);
      r.to_upper = to_upper;
    }
  }
  return r;
}

enum class IterStatus { Optimal, Unbounded };

IterStatus iterate(Tableau& tb, const std::vector<double>& c, std::size_t& iters) {
  std::size_t degenerate_run = 0;
  const std::size_t bland_after = 5 * (tb.n_struct + tb.n_rows);
  bool bland = false;
  const std::size_t iter_cap = 50000 + 200 * (tb.n_total + tb.n_rows);
  std::vector<double> cb(tb.n_rows), d(tb.n_total);
  std::vector<Candidate> cands;
  for (std::size_t it = 0; it < iter_cap; ++it) {
    for (std::size_t i = 0; i < tb.n_rows; ++i) cb[i] = c[tb.basis[i]];
    cands.clear();
    for (std::size_t j = 0; j < tb.n_total; ++j) {
      if (tb.state[j] == VarState::Basic) continue;
      if (tb.lo[j] == tb.hi[j]) continue;
      double acc = c[j];
      for (std::size_t i = 0; i < tb.n_rows; ++i) {
        const double a = tb.at(i, j);
        if (a != 0.0) acc -= cb[i] * a;
      }
      d[j] = acc;
      int dir = 0;
      double score = 0.0;
      switch (tb.state[j]) {
        case VarState::AtLower:
          if (acc < -kReducedCostTol) { dir = +1; score = -acc; }
          break;
        case VarState::AtUpper:
          if (acc > kReducedCostTol) { dir = -1; score = acc; }
          break;
        case VarState::FreeAtZero:
          if (std::abs(acc) > kReducedCostTol) { dir = acc < 0 ? +1 : -1; score = std::abs(acc); }
          break;
        default:
          break;
      }
      if (dir != 0) cands.push_back(Candidate{j, score, dir});
    }
    if (cands.empty()) return IterStatus::Optimal;
    if (bland) {
      std::sort(cands.begin(), cands.end(),
                [](const Candidate& a, const Candidate& b) { return a.col < b.col; });
    } else {
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.col < b.col;
      });
    }

    bool advanced = false;
    for (const Candidate& cand : cands) {
      RatioResult rr = ratio_test(tb, cand.col, cand.direction);
      if (!std::isfinite(rr.step)) return IterStatus::Unbounded;
      if (rr.row >= 0 &&
          std::abs(tb.at(static_cast<std::size_t>(rr.row), cand.col)) < kPivotTol)
        continue;  // unusable pivot, try next candidate
      ++iters;
      if (rr.step < kDegenerateStep) {
        if (++degenerate_run > bland_after) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      const double old_val = tb.nonbasic_value(cand.col);
      const double new_val = old_val + cand.direction * rr.step;
      for (std::size_t i = 0; i < tb.n_rows; ++i) {
        const double a = tb.at(i, cand.col);
        if (a != 0.0) tb.beta[i] -= a * (new_val - old_val);
      }
      if (rr.row < 0) {
        tb.state[cand.col] = cand.direction > 0 ? VarState::AtUpper : VarState::AtLower;
      } else {
        const std::size_t row = static_cast<std::size_t>(rr.row);
        const std::size_t leaving = tb.basis[row];
        tb.pivot_rows(row, cand.col);
        tb.basis[row] = cand.col;
        tb.in_row[cand.col] = static_cast<int>(row);
        tb.in_row[leaving] = -1;
        tb.state[cand.col] = VarState::Basic;
        tb.state[leaving] = rr.to_upper ? VarState::AtUpper : VarState::AtLower;
        tb.beta[row] = new_val;
      }
      advanced = true;
      break;
    }
    if (!advanced) {
      if (!bland) {
        bland = true;
        continue;
      }
      raise(ErrorKind::Solve, "simplex degeneracy: no pivot above tolerance after Bland fallback");
    }
  }
  raise(ErrorKind::Solve, "simplex iteration cap exceeded");
}

}  // namespace

void LinearProgram::validate() const {
  const std::size_t m = num_vars();
  if (lower.size() != m || upper.size() != m)
    raise(ErrorKind::InvalidArgument, "bound vectors must match variable count");
  for (double c : objective)
    if (!std::isfinite(c) || std::abs(c) >= kLpBigValue)
      raise(ErrorKind::InvalidArgument, "objective coefficient out of range");
  for (std::size_t j = 0; j < m; ++j) {
    const double lb = lower[j], ub = upper[j];
    if (std::isnan(lb) || std::isnan(ub)) raise(ErrorKind::InvalidArgument, "NaN bound");
    if (lb > ub) raise(ErrorKind::InvalidArgument, "lower bound exceeds upper bound");
  }
  for (const auto& row : rows) {
    if (row.coeffs.size() != m)
      raise(ErrorKind::InvalidArgument, "row coefficient length does not match variable count");
    for (double a : row.coeffs)
      if (!std::isfinite(a) || std::abs(a) >= kLpBigValue)
        raise(ErrorKind::InvalidArgument, "row coefficient out of range");
    if (!std::isfinite(row.rhs) || std::abs(row.rhs) >= kLpBigValue)
      raise(ErrorKind::InvalidArgument, "rhs out of range");
  }
}

LpSolution solve_lp(const LinearProgram& lp, const std::vector<std::size_t>* warm_basis) {
  lp.validate();
  const std::size_t m = lp.num_vars();
  const std::size_t r = lp.rows.size();

  Tableau tb;
  tb.n_struct = m;
  tb.n_rows = r;
  tb.n_total = m + r;
  tb.lo.resize(tb.n_total);
  tb.hi.resize(tb.n_total);
  for (std::size_t j = 0; j < m; ++j) {
    double lb = lp.lower[j], ub = lp.upper[j];
    if (lb <= -kLpBigValue) lb = -kLpInfinity;
    if (ub >= kLpBigValue) ub = kLpInfinity;
    tb.lo[j] = lb;
    tb.hi[j] = ub;
  }
  for (std::size_t i = 0; i < r; ++i) {
    switch (lp.rows[i].rel) {
      case Relation::LessEq:
        tb.lo[m + i] = 0.0;
        tb.hi[m + i] = kLpInfinity;
        break;
      case Relation::GreaterEq:
        tb.lo[m + i] = -kLpInfinity;
        tb.hi[m + i] = 0.0;
        break;
      case Relation::Equal:
        tb.lo[m + i] = 0.0;
        tb.hi[m + i] = 0.0;
        break;
    }
  }

  auto reset_tableau = [&]() {
    tb.t.assign(r * tb.n_total, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < m; ++j) tb.at(i, j) = lp.rows[i].coeffs[j];
      tb.at(i, m + i) = 1.0;
    }
    tb.in_row.assign(tb.n_total, -1);
  };
  auto rest_state = [&](std::size_t j) {
    const double lb = tb.lo[j], ub = tb.hi[j];
    if (std::isfinite(lb) && std::isfinite(ub))
      return std::abs(lb) <= std::abs(ub) ? VarState::AtLower : VarState::AtUpper;
    if (std::isfinite(lb)) return VarState::AtLower;
    if (std::isfinite(ub)) return VarState::AtUpper;
    return VarState::FreeAtZero;
  };

  reset_tableau();
  tb.state.assign(tb.n_total, VarState::AtLower);
  tb.basis.assign(r, 0);
  tb.beta.assign(r, 0.0);
  for (std::size_t j = 0; j < tb.n_total; ++j) tb.state[j] = rest_state(j);

  std::size_t iterations = 0;
  bool warm_ok = false;
  if (warm_basis && warm_basis->size() == r && r > 0) {
    std::vector<std::size_t> cols = *warm_basis;
    warm_ok = std::all_of(cols.begin(), cols.end(),
                          [&](std::size_t c) { return c < tb.n_total; });
    if (warm_ok) {
      std::vector<char> used_row(r, 0);
      std::vector<std::size_t> row_of(r, 0);
      for (std::size_t k = 0; k < cols.size() && warm_ok; ++k) {
        const std::size_t c = cols[k];
        double best = 0.0;
        long besti = -1;
        for (std::size_t i = 0; i < r; ++i) {
          if (used_row[i]) continue;
          const double a = std::abs(tb.at(i, c));
          if (a > best) {
            best = a;
            besti = static_cast<long>(i);
          }
        }
        if (besti < 0 || best < 1e-9) {
          warm_ok = false;
          break;
        }
        const std::size_t rowi = static_cast<std::size_t>(besti);
        used_row[rowi] = 1;
        row_of[k] = rowi;
        tb.pivot_rows(rowi, c);
      }
      if (warm_ok) {
        for (std::size_t k = 0; k < cols.size(); ++k) {
          tb.basis[row_of[k]] = cols[k];
          tb.in_row[cols[k]] = static_cast<int>(row_of[k]);
          tb.state[cols[k]] = VarState::Basic;
        }
        for (std::size_t j = 0; j < tb.n_total; ++j)
          if (tb.state[j] != VarState::Basic) tb.state[j] = rest_state(j);
      } else {
        reset_tableau();
        for (std::size_t j = 0; j < tb.n_total; ++j) tb.state[j] = rest_state(j);
      }
    }
  }
  if (!warm_ok) {
    for (std::size_t i = 0; i < r; ++i) {
      tb.basis[i] = m + i;
      tb.in_row[m + i] = static_cast<int>(i);
      tb.state[m + i] = VarState::Basic;
    }
  }

  // Basic values: solve B beta = b - A_N x_N against original columns.
  if (r > 0) {
    auto orig_col = [&](std::size_t i, std::size_t j) -> double {
      if (j < m) return lp.rows[i].coeffs[j];
      return (j - m == i) ? 1.0 : 0.0;
    };
    std::vector<double> resid(r);
    for (std::size_t i = 0; i < r; ++i) resid[i] = lp.rows[i].rhs;
    for (std::size_t j = 0; j < tb.n_total; ++j) {
      if (tb.state[j] == VarState::Basic) continue;
      const double v = tb.nonbasic_value(j);
      if (v == 0.0) continue;
      for (std::size_t i = 0; i < r; ++i) {
        const double a = orig_col(i, j);
        if (a != 0.0) resid[i] -= a * v;
      }
    }
    std::vector<double> B(r * r);
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t i = 0; i < r; ++i) B[i * r + k] = orig_col(i, tb.basis[k]);
    std::vector<std::size_t> perm(r);
    for (std::size_t i = 0; i < r; ++i) perm[i] = i;
    for (std::size_t k = 0; k < r; ++k) {
      std::size_t piv = k;
      double best = std::abs(B[perm[k] * r + k]);
      for (std::size_t i = k + 1; i < r; ++i) {
        const double a = std::abs(B[perm[i] * r + k]);
        if (a > best) {
          best = a;
          piv = i;
        }
      }
      if (best < 1e-13) raise(ErrorKind::Solve, "singular basis while initializing simplex");
      std::swap(perm[k], perm[piv]);
      for (std::size_t i = k + 1; i < r; ++i) {
        const double f = B[perm[i] * r + k] / B[perm[k] * r + k];
        if (f == 0.0) continue;
        B[perm[i] * r + k] = f;  // store multiplier
        for (std::size_t j = k + 1; j < r; ++j) B[perm[i] * r + j] -= f * B[perm[k] * r + j];
        resid[perm[i]] -= f * resid[perm[k]];
      }
    }
    std::vector<double> beta(r);
    for (std::size_t k = r; k-- > 0;) {
      double acc = resid[perm[k]];
      for (std::size_t j = k + 1; j < r; ++j) acc -= B[perm[k] * r + j] * beta[j];
      beta[k] = acc / B[perm[k] * r + k];
    }
    tb.beta = std::move(beta);
  }

  if (lp_trace_enabled()) dump_tableau(tb, "initial");

  // Phase 1: absorb out-of-bound basic values with artificials and minimize
  // their sum.
  std::vector<std::size_t> artificials;
  {
    std::vector<double> viol(r, 0.0);
    bool need_phase1 = false;
    for (std::size_t i = 0; i < r; ++i) {
      const std::size_t bj = tb.basis[i];
      if (tb.beta[i] < tb.lo[bj] - kFeasTol) {
        viol[i] = tb.beta[i] - tb.lo[bj];
        need_phase1 = true;
      } else if (tb.beta[i] > tb.hi[bj] + kFeasTol) {
        viol[i] = tb.beta[i] - tb.hi[bj];
        need_phase1 = true;
      }
    }
    if (need_phase1) {
      std::size_t n_art = 0;
      for (double v : viol)
        if (v != 0.0) ++n_art;
      const std::size_t old_total = tb.n_total;
      const std::size_t new_total = old_total + n_art;
      std::vector<double> nt(r * new_total, 0.0);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < old_total; ++j) nt[i * new_total + j] = tb.t[i * old_total + j];
      tb.t = std::move(nt);
      tb.n_total = new_total;
      tb.lo.resize(new_total, 0.0);
      tb.hi.resize(new_total, kLpInfinity);
      tb.state.resize(new_total, VarState::AtLower);
      tb.in_row.resize(new_total, -1);
      std::size_t next = old_total;
      for (std::size_t i = 0; i < r; ++i) {
        if (viol[i] == 0.0) continue;
        const std::size_t aj = next++;
        artificials.push_back(aj);
        const double sign = viol[i] > 0.0 ? 1.0 : -1.0;
        const std::size_t old_bj = tb.basis[i];
        const double bound = viol[i] > 0.0 ? tb.hi[old_bj] : tb.lo[old_bj];
        // Artificial column is sign * e_i in the current row space; the old
        // basic variable leaves to its violated bound and the artificial
        // starts at |violation|.
        tb.at(i, aj) = sign;
        tb.state[old_bj] = viol[i] > 0.0 ? VarState::AtUpper : VarState::AtLower;
        tb.in_row[old_bj] = -1;
        if (sign < 0.0) {
          double* row = &tb.t[i * tb.n_total];
          for (std::size_t j = 0; j < tb.n_total; ++j) row[j] = -row[j];
        }
        tb.basis[i] = aj;
        tb.in_row[aj] = static_cast<int>(i);
        tb.state[aj] = VarState::Basic;
        tb.beta[i] = std::abs(tb.beta[i] - bound);
      }
      std::vector<double> c1(tb.n_total, 0.0);
      for (std::size_t aj : artificials) c1[aj] = 1.0;
      if (iterate(tb, c1, iterations) == IterStatus::Unbounded)
        raise(ErrorKind::Solve, "phase 1 reported unbounded");
      double infeas = 0.0;
      for (std::size_t aj : artificials) {
        const double v = tb.state[aj] == VarState::Basic
                             ? tb.beta[static_cast<std::size_t>(tb.in_row[aj])]
                             : tb.nonbasic_value(aj);
        infeas += v;
      }
      if (infeas > kPhase1Tol) {
        LpSolution sol;
        sol.status = LpStatus::Infeasible;
        sol.iterations = iterations;
        return sol;
      }
      // Drive basic artificials out if a safe pivot exists; otherwise freeze.
      for (std::size_t aj : artificials) {
        if (tb.state[aj] == VarState::Basic) {
          const std::size_t row = static_cast<std::size_t>(tb.in_row[aj]);
          const double art_val = tb.beta[row];
          double best = 0.0;
          long target = -1;
          for (std::size_t j = 0; j < old_total; ++j) {
            if (tb.state[j] == VarState::Basic) continue;
            const double a = std::abs(tb.at(row, j));
            if (a > best) {
              best = a;
              target = static_cast<long>(j);
            }
          }
          if (target >= 0 && best >= 1e-8 && std::abs(art_val) / best <= 1e-7) {
            const std::size_t col = static_cast<std::size_t>(target);
            const double entering_val = tb.nonbasic_value(col) + art_val / tb.at(row, col);
            tb.pivot_rows(row, col);
            tb.basis[row] = col;
            tb.in_row[col] = static_cast<int>(row);
            tb.in_row[aj] = -1;
            tb.state[col] = VarState::Basic;
            tb.beta[row] = entering_val;
          }
        }
        tb.lo[aj] = 0.0;
        tb.hi[aj] = 0.0;
        if (tb.state[aj] != VarState::Basic) tb.state[aj] = VarState::AtLower;
      }
    }
  }

  // Phase 2.
  std::vector<double> c2(tb.n_total, 0.0);
  for (std::size_t j = 0; j < m; ++j) c2[j] = lp.objective[j];
  if (iterate(tb, c2, iterations) == IterStatus::Unbounded) {
    LpSolution sol;
    sol.status = LpStatus::Unbounded;
    sol.iterations = iterations;
    return sol;
  }

  if (lp_trace_enabled()) dump_tableau(tb, "final");

  LpSolution sol;
  sol.status = LpStatus::Optimal;
  sol.iterations = iterations;
  sol.x.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j)
    if (tb.state[j] != VarState::Basic) sol.x[j] = tb.nonbasic_value(j);
  for (std::size_t i = 0; i < r; ++i)
    if (tb.basis[i] < m) sol.x[tb.basis[i]] = tb.beta[i];
  double obj = 0.0;
  for (std::size_t j = 0; j < m; ++j) obj += lp.objective[j] * sol.x[j];
  sol.objective_value = obj;
  sol.basis.reserve(r);
  for (std::size_t i = 0; i < r; ++i)
    if (tb.basis[i] < m + r) sol.basis.push_back(tb.basis[i]);
  return sol;
}

}  // namespace fairflip
