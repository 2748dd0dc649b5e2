#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairflip/classifiers.hpp"
#include "fairflip/data_model.hpp"
#include "fairflip/lp_core.hpp"
#include "fairflip/milp_solver.hpp"

namespace fairflip {

/// Flip fractions and the shared integer flip count. The count is derived
/// once from the exact rational (n_b p_w - p_b n_w - n_w n_b eps)/(n_w + n_b)
/// and applied to both groups, so the equal-count coupling survives rounding.
struct FlipBudget {
  double tau_w = 0.0;
  double tau_b = 0.0;
  std::size_t k_w = 0;
  std::size_t k_b = 0;
  double epsilon = 0.0;
  bool directional = true;
};

/// Affine-in-z encoding of |modified merit mean - xbar_j| <= delta, valid
/// whenever the modified positive count stays positive.
struct MeritRow {
  std::vector<double> coeffs;  // over z, length n
  double rhs = 0.0;            // row is coeffs . z <= rhs
};

struct MeritConstraint {
  double delta = kLpInfinity;
  std::vector<double> xbar;
  std::vector<MeritRow> rows;  // 2 per merit column; empty when delta is infinite

  bool active() const { return std::isfinite(delta); }
};

struct FlipAssignment {
  std::vector<std::uint8_t> z;
  std::vector<std::int8_t> y_tilde;
  double objective_value = 0.0;
};

/// Variable layout of the reduced master problem:
/// [beta0, beta_1..p, gamma_{i,j} for i in [n] x j in {0..p}, z_1..n, eta].
struct RmpFormulation {
  LinearProgram lp;
  std::vector<std::size_t> binary_indices;
  std::vector<double> big_m;  // length p+1, index 0 is the intercept bound
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t budget_rows = 0;
  std::size_t bigm_rows = 0;  // two-sided sandwich pairs
  std::size_t linking_rows = 0;
  std::size_t merit_rows = 0;

  std::size_t beta0_index() const { return 0; }
  std::size_t beta_index(std::size_t j) const { return 1 + j; }  // j in [0, p)
  std::size_t gamma_index(std::size_t i, std::size_t j) const {  // j in [0, p]
    return 1 + p + i * (p + 1) + j;
  }
  std::size_t z_index(std::size_t i) const { return 1 + p + n * (p + 1) + i; }
  std::size_t eta_index() const { return 1 + p + n * (p + 1) + n; }
  std::size_t num_vars() const { return eta_index() + 1; }

  /// Epigraph cut eta >= value + grad . ((beta,gamma) - point).
  LpRow make_cut(const FlipGradient& grad, double value, double beta0,
                 const std::vector<double>& beta, const std::vector<double>& gamma0,
                 const Matrix& gamma) const;
};

enum class ModelKind { Logistic, Svm };
enum class SvmMode { Alternating, ExactEnum };

struct DebiasConfig {
  double gap_tol = 1e-4;
  std::size_t max_iter = 200;
  double big_m = 20.0;
  bool directional = true;
  double ridge_lambda = 1e-6;
  double svm_c = 1.0;
  SvmMode svm_mode = SvmMode::Alternating;
  std::size_t max_rounds = 50;
  std::size_t node_limit = 1000000;
  TraceSink trace;
};

struct DebiasResult {
  FlipAssignment assignment;
  AnyModel model;
  FlipBudget budget;
  std::size_t iterations = 0;
  std::vector<std::pair<double, double>> bound_trace;  // (lower, incumbent)
  double achieved_parity = 0.0;
  std::vector<double> merit_deltas;
  bool gap_limit = false;
  bool exact = false;
  double final_gap = 0.0;
};

struct TradeoffRow {
  double epsilon = 0.0;
  std::string column;
  double delta_change = 0.0;
  std::string status;  // "ok" or an error message
};

/// Closed-form budgets for a target parity gap; groups must be oriented so
/// the ADV positive rate is at least the DIS rate.
FlipBudget compute_flip_budgets(const GroupStats& stats, double epsilon, bool directional = true);

MeritConstraint merit_bounds(const LabeledDataset& ds, double delta);

/// Visits every per-group-exact flip vector satisfying directionality and the
/// merit rows, in lexicographic order of the selected index sets. Returns the
/// number visited; the visitor may stop the stream by returning false.
std::size_t enumerate_feasible_flips(const LabeledDataset& ds, const FlipBudget& budget,
                                     const MeritConstraint& merit,
                                     const std::function<bool(const FlipAssignment&)>& visit);
std::vector<FlipAssignment> collect_feasible_flips(const LabeledDataset& ds,
                                                   const FlipBudget& budget,
                                                   const MeritConstraint& merit);

RmpFormulation build_rmp(const LabeledDataset& ds, const FlipBudget& budget,
                         const MeritConstraint& merit, const std::vector<double>& big_m);

DebiasResult solve_dp_lr_oa(const LabeledDataset& ds, double epsilon, double delta,
                            const DebiasConfig& config = {});

DebiasResult solve_dp_svm(const LabeledDataset& ds, double epsilon, double delta,
                          const DebiasConfig& config = {});

/// Standardize by group, derive budgets, then dispatch to the requested
/// min-min solver; the returned model carries the dataset metadata.
DebiasResult debias(const LabeledDataset& ds, double epsilon, double delta, ModelKind kind,
                    const DebiasConfig& config = {});

/// Change in merit means among positively labeled rows of the flipped data,
/// on the standardized scale.
std::vector<double> price_of_diversity(const LabeledDataset& ds, const DebiasResult& result);

std::vector<TradeoffRow> tradeoff_sweep(const LabeledDataset& ds,
                                        const std::vector<double>& epsilons, double delta,
                                        ModelKind kind, const DebiasConfig& config = {});

std::vector<double> default_epsilon_grid(double alpha);

}  // namespace fairflip
