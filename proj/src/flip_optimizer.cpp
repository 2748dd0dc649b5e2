#include "fairflip/flip_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "fairflip/model_io.hpp"

namespace fairflip {

namespace {

constexpr double kMeritSlack = 1e-9;

std::vector<std::int8_t> flipped_labels(const std::vector<std::int8_t>& y,
                                        const std::vector<std::uint8_t>& z) {
  std::vector<std::int8_t> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    out[i] = z[i] ? static_cast<std::int8_t>(-y[i]) : y[i];
  return out;
}

bool flippable(const LabeledDataset& ds, const FlipBudget& budget, std::size_t i) {
  if (!budget.directional) return true;
  return ds.group[i] == Group::Adv ? ds.labels[i] > 0 : ds.labels[i] < 0;
}

std::vector<double> merit_deltas_for(const LabeledDataset& ds,
                                     const std::vector<std::int8_t>& y_tilde) {
  if (ds.merit_columns.empty()) return {};
  const std::vector<double> xbar = merit_means(ds);
  long long pos = 0;
  for (std::int8_t y : y_tilde)
    if (y > 0) ++pos;
  if (pos == 0) raise(ErrorKind::Data, "flipped labels have no positive rows");
  std::vector<double> out(ds.merit_columns.size());
  for (std::size_t k = 0; k < ds.merit_columns.size(); ++k) {
    const std::size_t j = ds.merit_columns[k];
    double sum = 0.0;
    for (std::size_t i = 0; i < ds.num_rows(); ++i)
      if (y_tilde[i] > 0) sum += ds.features(i, j);
    out[k] = sum / static_cast<double>(pos) - xbar[k];
  }
  return out;
}

void finish_result(const LabeledDataset& ds, DebiasResult& result) {
  result.achieved_parity = parity_gap(result.assignment.y_tilde, ds.group);
  result.merit_deltas = merit_deltas_for(ds, result.assignment.y_tilde);
}

// Next k-combination of indices into 'universe' in lexicographic order.
bool next_combination(std::vector<std::size_t>& comb, std::size_t universe) {
  const std::size_t k = comb.size();
  if (k == 0) return false;
  std::size_t i = k;
  while (i-- > 0) {
    if (comb[i] + (k - i) < universe) {
      ++comb[i];
      for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

FlipBudget compute_flip_budgets(const GroupStats& stats, double epsilon, bool directional) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    raise(ErrorKind::InvalidArgument, "epsilon must lie in [0, 1]");
  if (stats.n_w == 0 || stats.n_b == 0)
    raise(ErrorKind::InvalidArgument, "both groups must be non-empty");
  const auto n_w = static_cast<long long>(stats.n_w);
  const auto n_b = static_cast<long long>(stats.n_b);
  const auto p_w = static_cast<long long>(stats.p_w);
  const auto p_b = static_cast<long long>(stats.p_b);
  if (p_w * n_b < p_b * n_w)
    raise(ErrorKind::InvalidArgument,
          "groups must be oriented so the ADV positive rate is at least the DIS rate");

  FlipBudget budget;
  budget.epsilon = epsilon;
  budget.directional = directional;
  const double numerator =
      static_cast<double>(n_b * p_w - p_b * n_w) -
      static_cast<double>(n_w) * static_cast<double>(n_b) * epsilon;
  if (numerator > 0.0) {
    const double total = static_cast<double>(n_w + n_b);
    budget.tau_w = numerator / (static_cast<double>(n_w) * total);
    budget.tau_b = numerator / (static_cast<double>(n_b) * total);
    const double q = numerator / total;
    const double k = std::ceil(q - 1e-9);
    const auto count = static_cast<std::size_t>(std::max(0.0, k));
    budget.k_w = count;
    budget.k_b = count;
  }
  if (directional) {
    const std::size_t max_w = stats.p_w;
    const std::size_t max_b = stats.n_b - stats.p_b;
    if (budget.k_w > max_w || budget.k_b > max_b) {
      const auto k_max = static_cast<double>(std::min(max_w, max_b));
      const double eps_min =
          (static_cast<double>(n_b * p_w - p_b * n_w) - k_max * static_cast<double>(n_w + n_b)) /
          (static_cast<double>(n_w) * static_cast<double>(n_b));
      raise(ErrorKind::Data,
            "directional flip budget infeasible for epsilon " + std::to_string(epsilon) +
                ": need " + std::to_string(budget.k_w) + " flips per group but only " +
                std::to_string(std::min(max_w, max_b)) +
                " rows are flippable; minimal achievable epsilon is " +
                std::to_string(std::max(0.0, eps_min)));
    }
  }
  return budget;
}

MeritConstraint merit_bounds(const LabeledDataset& ds, double delta) {
  ds.validate();
  if (delta < 0.0) raise(ErrorKind::InvalidArgument, "delta must be >= 0");
  MeritConstraint merit;
  merit.delta = delta;
  if (ds.merit_columns.empty()) return merit;
  merit.xbar = merit_means(ds);
  if (!std::isfinite(delta)) return merit;

  const std::size_t n = ds.num_rows();
  const GroupStats s = ds.group_stats();
  const double two_p_delta = 2.0 * static_cast<double>(s.p_w + s.p_b) * delta;
  for (std::size_t k = 0; k < ds.merit_columns.size(); ++k) {
    const std::size_t col = ds.merit_columns[k];
    const double xb = merit.xbar[k];
    MeritRow up, lo;
    up.coeffs.assign(n, 0.0);
    lo.coeffs.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = static_cast<double>(ds.labels[i]);
      const double xij = ds.features(i, col);
      up.coeffs[i] = 2.0 * yi * (xb + delta - xij);
      lo.coeffs[i] = 2.0 * yi * (xij - xb + delta);
    }
    up.rhs = two_p_delta;
    lo.rhs = two_p_delta;
    merit.rows.push_back(std::move(up));
    merit.rows.push_back(std::move(lo));
  }
  return merit;
}

namespace {

bool merit_feasible(const MeritConstraint& merit, const std::vector<std::uint8_t>& z) {
  for (const MeritRow& row : merit.rows) {
    double act = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (z[i]) act += row.coeffs[i];
    if (act > row.rhs + kMeritSlack) return false;
  }
  return true;
}

}  // namespace

std::size_t enumerate_feasible_flips(const LabeledDataset& ds, const FlipBudget& budget,
                                     const MeritConstraint& merit,
                                     const std::function<bool(const FlipAssignment&)>& visit) {
  ds.validate();
  const std::size_t n = ds.num_rows();
  if (n > 24) raise(ErrorKind::Size, "enumerate_feasible_flips is limited to n <= 24");

  std::vector<std::size_t> w_pool, b_pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (!flippable(ds, budget, i)) continue;
    (ds.group[i] == Group::Adv ? w_pool : b_pool).push_back(i);
  }
  if (budget.k_w > w_pool.size() || budget.k_b > b_pool.size()) return 0;

  const GroupStats s = ds.group_stats();
  const long long total_pos = static_cast<long long>(s.p_w + s.p_b);

  std::size_t count = 0;
  std::vector<std::size_t> wc(budget.k_w), bc(budget.k_b);
  for (std::size_t i = 0; i < budget.k_w; ++i) wc[i] = i;
  bool w_more = true;
  while (w_more) {
    for (std::size_t i = 0; i < budget.k_b; ++i) bc[i] = i;
    bool b_more = true;
    while (b_more) {
      FlipAssignment a;
      a.z.assign(n, 0);
      for (std::size_t i : wc) a.z[w_pool[i]] = 1;
      for (std::size_t i : bc) a.z[b_pool[i]] = 1;
      bool ok = merit_feasible(merit, a.z);
      if (ok && !budget.directional) {
        long long pos_flux = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (a.z[i]) pos_flux += ds.labels[i];
        if (total_pos - pos_flux < 1) ok = false;  // modified positives must exist
      }
      if (ok) {
        a.y_tilde = flipped_labels(ds.labels, a.z);
        ++count;
        if (!visit(a)) return count;
      }
      b_more = next_combination(bc, b_pool.size());
    }
    w_more = next_combination(wc, w_pool.size());
  }
  return count;
}

std::vector<FlipAssignment> collect_feasible_flips(const LabeledDataset& ds,
                                                   const FlipBudget& budget,
                                                   const MeritConstraint& merit) {
  std::vector<FlipAssignment> out;
  enumerate_feasible_flips(ds, budget, merit, [&](const FlipAssignment& a) {
    out.push_back(a);
    return true;
  });
  return out;
}

LpRow RmpFormulation::make_cut(const FlipGradient& grad, double value, double beta0,
                               const std::vector<double>& beta, const std::vector<double>& gamma0,
                               const Matrix& gamma) const {
  // eta >= value + g.(x - x0)  ==>  eta - g.x >= value - g.x0
  LpRow row;
  row.coeffs.assign(num_vars(), 0.0);
  row.rel = Relation::GreaterEq;
  double rhs = value;
  row.coeffs[eta_index()] = 1.0;
  row.coeffs[beta0_index()] = -grad.d_beta0;
  rhs -= grad.d_beta0 * beta0;
  for (std::size_t j = 0; j < p; ++j) {
    row.coeffs[beta_index(j)] = -grad.d_beta[j];
    rhs -= grad.d_beta[j] * beta[j];
  }
  for (std::size_t i = 0; i < n; ++i) {
    row.coeffs[gamma_index(i, 0)] = -grad.d_gamma0[i];
    rhs -= grad.d_gamma0[i] * gamma0[i];
    for (std::size_t j = 0; j < p; ++j) {
      row.coeffs[gamma_index(i, j + 1)] = -grad.d_gamma(i, j);
      rhs -= grad.d_gamma(i, j) * gamma(i, j);
    }
  }
  row.rhs = rhs;
  return row;
}

RmpFormulation build_rmp(const LabeledDataset& ds, const FlipBudget& budget,
                         const MeritConstraint& merit, const std::vector<double>& big_m) {
  ds.validate();
  const std::size_t n = ds.num_rows();
  const std::size_t p = ds.num_features();
  if (big_m.size() != p + 1)
    raise(ErrorKind::InvalidArgument, "big_m must have one entry per coefficient incl. intercept");
  for (double m : big_m)
    if (!(m > 0.0)) raise(ErrorKind::InvalidArgument, "big_m entries must be positive");

  RmpFormulation rmp;
  rmp.n = n;
  rmp.p = p;
  rmp.big_m = big_m;
  rmp.lp = LinearProgram::with_vars(0);
  rmp.lp.objective.assign(rmp.num_vars(), 0.0);
  rmp.lp.lower.assign(rmp.num_vars(), 0.0);
  rmp.lp.upper.assign(rmp.num_vars(), 0.0);
  rmp.lp.objective[rmp.eta_index()] = 1.0;

  // Coefficient boxes: beta_j and every gamma_{i,j} within +-M_j; the loss is
  // strictly positive so eta >= 0 is a valid floor that keeps the root
  // relaxation bounded before the first cut arrives.
  rmp.lp.lower[rmp.beta0_index()] = -big_m[0];
  rmp.lp.upper[rmp.beta0_index()] = big_m[0];
  for (std::size_t j = 0; j < p; ++j) {
    rmp.lp.lower[rmp.beta_index(j)] = -big_m[j + 1];
    rmp.lp.upper[rmp.beta_index(j)] = big_m[j + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= p; ++j) {
      rmp.lp.lower[rmp.gamma_index(i, j)] = -big_m[j];
      rmp.lp.upper[rmp.gamma_index(i, j)] = big_m[j];
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    rmp.lp.lower[rmp.z_index(i)] = 0.0;
    rmp.lp.upper[rmp.z_index(i)] = flippable(ds, budget, i) ? 1.0 : 0.0;
    rmp.binary_indices.push_back(rmp.z_index(i));
  }
  rmp.lp.lower[rmp.eta_index()] = 0.0;
  rmp.lp.upper[rmp.eta_index()] = kLpInfinity;

  const std::size_t nv = rmp.num_vars();
  auto blank = [&]() { return std::vector<double>(nv, 0.0); };

  // Per-group flip-count equalities.
  {
    auto row_w = blank();
    auto row_b = blank();
    for (std::size_t i = 0; i < n; ++i)
      (ds.group[i] == Group::Adv ? row_w : row_b)[rmp.z_index(i)] = 1.0;
    rmp.lp.add_row(std::move(row_w), Relation::Equal, static_cast<double>(budget.k_w));
    rmp.lp.add_row(std::move(row_b), Relation::Equal, static_cast<double>(budget.k_b));
    rmp.budget_rows = 2;
  }

  // Big-M sandwiches for gamma_{i,j} = z_i * beta_j, intercept included.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= p; ++j) {
      const double mj = big_m[j];
      const std::size_t g = rmp.gamma_index(i, j);
      const std::size_t bj = j == 0 ? rmp.beta0_index() : rmp.beta_index(j - 1);
      const std::size_t zi = rmp.z_index(i);
      auto r1 = blank();
      r1[g] = 1.0;
      r1[zi] = -mj;
      rmp.lp.add_row(std::move(r1), Relation::LessEq, 0.0);
      auto r2 = blank();
      r2[g] = -1.0;
      r2[zi] = -mj;
      rmp.lp.add_row(std::move(r2), Relation::LessEq, 0.0);
      auto r3 = blank();
      r3[g] = 1.0;
      r3[bj] = -1.0;
      r3[zi] = mj;
      rmp.lp.add_row(std::move(r3), Relation::LessEq, mj);
      auto r4 = blank();
      r4[g] = -1.0;
      r4[bj] = 1.0;
      r4[zi] = mj;
      rmp.lp.add_row(std::move(r4), Relation::LessEq, mj);
      rmp.bigm_rows += 2;  // counted as two-sided sandwich pairs
    }
  }

  // Aggregate linking rows, non-intercept coefficients.
  for (std::size_t j = 0; j < p; ++j) {
    auto row_w = blank();
    auto row_b = blank();
    for (std::size_t i = 0; i < n; ++i)
      (ds.group[i] == Group::Adv ? row_w : row_b)[rmp.gamma_index(i, j + 1)] = 1.0;
    row_w[rmp.beta_index(j)] = -static_cast<double>(budget.k_w);
    row_b[rmp.beta_index(j)] = -static_cast<double>(budget.k_b);
    rmp.lp.add_row(std::move(row_w), Relation::Equal, 0.0);
    rmp.lp.add_row(std::move(row_b), Relation::Equal, 0.0);
    rmp.linking_rows += 2;
  }

  for (const MeritRow& mrow : merit.rows) {
    auto row = blank();
    for (std::size_t i = 0; i < n; ++i) row[rmp.z_index(i)] = mrow.coeffs[i];
    rmp.lp.add_row(std::move(row), Relation::LessEq, mrow.rhs);
    ++rmp.merit_rows;
  }

  if (!budget.directional) {
    // Keep at least one modified positive so the merit rows stay equivalent
    // to their nonlinear form.
    const GroupStats s = ds.group_stats();
    auto row = blank();
    for (std::size_t i = 0; i < n; ++i)
      row[rmp.z_index(i)] = static_cast<double>(ds.labels[i]);
    rmp.lp.add_row(std::move(row), Relation::LessEq,
                   static_cast<double>(s.p_w + s.p_b) - 1.0);
  }

  return rmp;
}

namespace {

DebiasResult plain_fit_result(const LabeledDataset& ds, ModelKind kind,
                              const DebiasConfig& config, const FlipBudget& budget) {
  DebiasResult result;
  result.budget = budget;
  result.assignment.z.assign(ds.num_rows(), 0);
  result.assignment.y_tilde = ds.labels;
  if (kind == ModelKind::Logistic) {
    LogisticModel model = fit_logistic(ds.features, ds.labels, config.ridge_lambda);
    result.assignment.objective_value = logistic_loss(model, ds.features, ds.labels);
    result.model = std::move(model);
  } else {
    SvmModel model = fit_svm(ds.features, ds.labels, config.svm_c);
    result.assignment.objective_value = model.objective;
    result.model = std::move(model);
  }
  result.iterations = 1;
  result.bound_trace = {{result.assignment.objective_value, result.assignment.objective_value}};
  result.exact = true;
  finish_result(ds, result);
  return result;
}

struct OaCacheEntry {
  double loss = 0.0;
  LogisticModel model;
};

}  // namespace

DebiasResult solve_dp_lr_oa(const LabeledDataset& ds, double epsilon, double delta,
                            const DebiasConfig& config) {
  ds.validate();
  const FlipBudget budget = compute_flip_budgets(ds.group_stats(), epsilon, config.directional);
  const MeritConstraint merit = merit_bounds(ds, delta);
  if (budget.k_w == 0 && budget.k_b == 0)
    return plain_fit_result(ds, ModelKind::Logistic, config, budget);

  const std::size_t n = ds.num_rows();
  const std::size_t p = ds.num_features();
  const Matrix& x = ds.features;

  std::vector<double> big_m(p + 1, config.big_m);
  DebiasResult result;
  result.budget = budget;

  for (int attempt = 0; attempt < 3; ++attempt) {
    RmpFormulation rmp = build_rmp(ds, budget, merit, big_m);
    std::map<std::vector<std::uint8_t>, OaCacheEntry> cache;
    std::vector<std::pair<double, double>> trace;
    double upper = kLpInfinity;
    std::vector<std::uint8_t> best_z;
    LogisticModel best_model;
    std::size_t rounds = 0;
    bool coeff_outgrew_m = false;
    double last_lower = 0.0;

    MixedIntegerProgram mip;
    mip.base = rmp.lp;
    mip.binary_indices = rmp.binary_indices;
    mip.trace = config.trace;
    mip.callback = [&](const std::vector<double>& xsol,
                       const MilpCallbackContext& ctx) -> CallbackResult {
      CallbackResult out;
      std::vector<std::uint8_t> z(n);
      for (std::size_t i = 0; i < n; ++i)
        z[i] = xsol[rmp.z_index(i)] > 0.5 ? 1 : 0;

      auto it = cache.find(z);
      bool fresh = false;
      if (it == cache.end()) {
        OaCacheEntry entry;
        const std::vector<std::int8_t> y_tilde = flipped_labels(ds.labels, z);
        entry.model = fit_logistic(x, y_tilde, config.ridge_lambda);
        entry.loss = logistic_loss(entry.model, x, y_tilde);
        it = cache.emplace(std::move(z), std::move(entry)).first;
        fresh = true;
      }
      const std::vector<std::uint8_t>& zz = it->first;
      const OaCacheEntry& entry = it->second;
      for (std::size_t j = 0; j < p; ++j)
        if (std::abs(entry.model.beta[j]) > 0.999 * big_m[j + 1]) coeff_outgrew_m = true;
      if (std::abs(entry.model.beta0) > 0.999 * big_m[0]) coeff_outgrew_m = true;

      if (entry.loss < upper) {
        upper = entry.loss;
        best_z = zz;
        best_model = entry.model;
      }
      if (fresh) {
        ++rounds;
        last_lower = std::max(last_lower, std::max(0.0, ctx.global_bound));
        trace.emplace_back(last_lower, upper);
      }

      // Fit point on the gamma = z * beta manifold.
      std::vector<double> gamma0(n, 0.0);
      Matrix gamma(n, p);
      for (std::size_t i = 0; i < n; ++i) {
        if (!zz[i]) continue;
        gamma0[i] = entry.model.beta0;
        for (std::size_t j = 0; j < p; ++j) gamma(i, j) = entry.model.beta[j];
      }
      const FlipGradient grad = logistic_flip_gradient(entry.model.beta0, entry.model.beta,
                                                       gamma0, gamma, x, ds.labels);
      LpRow cut = rmp.make_cut(grad, entry.loss, entry.model.beta0, entry.model.beta, gamma0, gamma);
      double act = 0.0;
      for (std::size_t j = 0; j < cut.coeffs.size(); ++j) act += cut.coeffs[j] * xsol[j];
      const double cut_tol = 1e-7 * std::max(1.0, std::abs(entry.loss));
      const bool violated = act < cut.rhs - cut_tol;

      if (rounds >= config.max_iter && violated) {
        out.request_stop = true;
        return out;
      }
      if (violated) {
        out.cuts.push_back(std::move(cut));
        return out;
      }
      // Certified: hand back the fit point as the incumbent.
      std::vector<double> inc(rmp.num_vars(), 0.0);
      inc[rmp.beta0_index()] = entry.model.beta0;
      for (std::size_t j = 0; j < p; ++j) inc[rmp.beta_index(j)] = entry.model.beta[j];
      for (std::size_t i = 0; i < n; ++i) {
        inc[rmp.gamma_index(i, 0)] = gamma0[i];
        for (std::size_t j = 0; j < p; ++j) inc[rmp.gamma_index(i, j + 1)] = gamma(i, j);
        inc[rmp.z_index(i)] = zz[i] ? 1.0 : 0.0;
      }
      inc[rmp.eta_index()] = entry.loss;
      out.incumbent_override = std::make_pair(std::move(inc), entry.loss);
      return out;
    };

    MilpSolution sol = solve_milp(mip, config.gap_tol, config.node_limit);
    if (sol.status == MilpStatus::Infeasible)
      raise(ErrorKind::Solve,
            "no feasible flip assignment under the budget and merit constraints");
    if (best_z.empty())
      raise(ErrorKind::Solve, "branch and bound terminated without visiting an integral point");

    // Self-check of the big-M choice: the incumbent's gamma block must agree
    // with z * beta, and no fitted coefficient may press against the box.
    bool bigm_ok = !coeff_outgrew_m;
    if (!sol.x.empty() && bigm_ok) {
      for (std::size_t i = 0; i < n && bigm_ok; ++i) {
        const double zi = sol.x[rmp.z_index(i)];
        if (std::abs(sol.x[rmp.gamma_index(i, 0)] - zi * sol.x[rmp.beta0_index()]) > 1e-6)
          bigm_ok = false;
        for (std::size_t j = 0; j < p && bigm_ok; ++j)
          if (std::abs(sol.x[rmp.gamma_index(i, j + 1)] - zi * sol.x[rmp.beta_index(j)]) > 1e-6)
            bigm_ok = false;
      }
    }
    if (!bigm_ok && attempt < 2) {
      for (double& m : big_m) m *= 10.0;
      continue;
    }

    result.assignment.z = best_z;
    result.assignment.y_tilde = flipped_labels(ds.labels, best_z);
    result.assignment.objective_value = upper;
    result.model = best_model;
    result.iterations = rounds;
    result.bound_trace = std::move(trace);
    const double lower = std::max(std::min(sol.bound, upper), 0.0);
    result.final_gap = (upper - lower) / std::max(1.0, std::abs(upper));
    result.gap_limit = sol.status != MilpStatus::Optimal || result.final_gap > config.gap_tol + 1e-12;
    result.exact = !result.gap_limit;
    if (!result.bound_trace.empty()) result.bound_trace.back().first = lower;
    finish_result(ds, result);
    return result;
  }
  raise(ErrorKind::Solve, "big-M escalation failed to certify the gamma linking");
}

DebiasResult solve_dp_svm(const LabeledDataset& ds, double epsilon, double delta,
                          const DebiasConfig& config) {
  ds.validate();
  const FlipBudget budget = compute_flip_budgets(ds.group_stats(), epsilon, config.directional);
  const MeritConstraint merit = merit_bounds(ds, delta);
  if (budget.k_w == 0 && budget.k_b == 0)
    return plain_fit_result(ds, ModelKind::Svm, config, budget);

  const std::size_t n = ds.num_rows();
  const Matrix& x = ds.features;
  DebiasResult result;
  result.budget = budget;

  if (config.svm_mode == SvmMode::ExactEnum) {
    if (n > 20) raise(ErrorKind::Size, "exact_enum mode is limited to n <= 20");
    double best = kLpInfinity;
    FlipAssignment best_a;
    SvmModel best_model;
    std::size_t visited = enumerate_feasible_flips(ds, budget, merit, [&](const FlipAssignment& a) {
      SvmModel model = fit_svm(x, a.y_tilde, config.svm_c);
      if (model.objective < best) {
        best = model.objective;
        best_a = a;
        best_model = std::move(model);
      }
      return true;
    });
    if (visited == 0)
      raise(ErrorKind::Solve,
            "no feasible flip assignment under the budget and merit constraints");
    best_a.objective_value = best;
    result.assignment = std::move(best_a);
    result.model = std::move(best_model);
    result.iterations = visited;
    result.bound_trace = {{best, best}};
    result.exact = true;
    finish_result(ds, result);
    return result;
  }

  // Alternating minimization: hold (w, b) and pick the cheapest feasible flip
  // set by hinge-cost deltas, then refit on the flipped labels.
  const GroupStats s = ds.group_stats();
  std::vector<std::uint8_t> z(n, 0);
  SvmModel model = fit_svm(x, ds.labels, config.svm_c);
  std::vector<std::int8_t> y_tilde = ds.labels;
  double objective = model.objective;
  std::set<std::vector<std::uint8_t>> seen;
  seen.insert(z);
  std::vector<std::pair<double, double>> trace;
  std::size_t rounds = 0;
  bool cycled = false;

  SvmModel best_model = model;
  std::vector<std::uint8_t> best_z = z;
  double best_obj = kLpInfinity;  // z = 0 violates the budget; not a candidate

  for (; rounds < config.max_rounds; ++rounds) {
    // z-step: minimize sum over selected rows of the hinge swap cost.
    LinearProgram lp = LinearProgram::with_vars(n);
    std::vector<std::int8_t> flipped_all(n);
    for (std::size_t i = 0; i < n; ++i) flipped_all[i] = static_cast<std::int8_t>(-ds.labels[i]);
    const std::vector<double> xi_orig = hinge_losses(model, x, ds.labels);
    const std::vector<double> xi_flip = hinge_losses(model, x, flipped_all);
    for (std::size_t i = 0; i < n; ++i) {
      lp.objective[i] = xi_flip[i] - xi_orig[i];
      lp.upper[i] = flippable(ds, budget, i) ? 1.0 : 0.0;
    }
    std::vector<double> row_w(n, 0.0), row_b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      (ds.group[i] == Group::Adv ? row_w : row_b)[i] = 1.0;
    lp.add_row(std::move(row_w), Relation::Equal, static_cast<double>(budget.k_w));
    lp.add_row(std::move(row_b), Relation::Equal, static_cast<double>(budget.k_b));
    for (const MeritRow& mrow : merit.rows) lp.add_row(mrow.coeffs, Relation::LessEq, mrow.rhs);
    if (!budget.directional) {
      std::vector<double> row(n);
      for (std::size_t i = 0; i < n; ++i) row[i] = static_cast<double>(ds.labels[i]);
      lp.add_row(std::move(row), Relation::LessEq, static_cast<double>(s.p_w + s.p_b) - 1.0);
    }
    MixedIntegerProgram mip;
    mip.base = std::move(lp);
    mip.binary_indices.resize(n);
    for (std::size_t i = 0; i < n; ++i) mip.binary_indices[i] = i;
    MilpSolution zsol = solve_milp(mip, 1e-9, config.node_limit);
    if (zsol.status == MilpStatus::Infeasible)
      raise(ErrorKind::Solve,
            "no feasible flip assignment under the budget and merit constraints");
    if (zsol.status != MilpStatus::Optimal)
      raise(ErrorKind::Solve, "flip-selection subproblem hit the node limit");

    std::vector<std::uint8_t> z_next(n);
    for (std::size_t i = 0; i < n; ++i) z_next[i] = zsol.x[i] > 0.5 ? 1 : 0;
    y_tilde = flipped_labels(ds.labels, z_next);
    model = fit_svm(x, y_tilde, config.svm_c);
    const double next_obj = model.objective;
    trace.emplace_back(0.0, next_obj);
    if (next_obj < best_obj) {
      best_obj = next_obj;
      best_model = model;
      best_z = z_next;
    }
    const bool repeat = !seen.insert(z_next).second;
    const bool tiny_step = std::abs(objective - next_obj) < 1e-8;
    z = std::move(z_next);
    objective = next_obj;
    if (repeat || tiny_step) {
      cycled = true;
      ++rounds;
      break;
    }
  }

  result.assignment.z = best_z;
  result.assignment.y_tilde = flipped_labels(ds.labels, best_z);
  result.assignment.objective_value = best_obj;
  result.model = std::move(best_model);
  result.iterations = rounds;
  result.bound_trace = std::move(trace);
  result.gap_limit = !cycled;
  result.exact = false;
  finish_result(ds, result);
  return result;
}

DebiasResult debias(const LabeledDataset& ds, double epsilon, double delta, ModelKind kind,
                    const DebiasConfig& config) {
  ds.validate();
  LabeledDataset work;
  StandardizationParams params;
  if (ds.standardized && ds.std_params) {
    work = ds;
    params = *ds.std_params;
  } else {
    auto [standardized, p] = standardize_by_group(ds);
    work = std::move(standardized);
    params = p;
  }
  DebiasResult result = kind == ModelKind::Logistic
                            ? solve_dp_lr_oa(work, epsilon, delta, config)
                            : solve_dp_svm(work, epsilon, delta, config);
  attach_dataset_metadata(result.model, work, params);
  return result;
}

std::vector<double> price_of_diversity(const LabeledDataset& ds, const DebiasResult& result) {
  ds.validate();
  if (result.assignment.y_tilde.size() != ds.num_rows())
    raise(ErrorKind::InvalidArgument, "result does not match the dataset");
  if (ds.standardized) return merit_deltas_for(ds, result.assignment.y_tilde);
  auto [work, params] = standardize_by_group(ds);
  (void)params;
  return merit_deltas_for(work, result.assignment.y_tilde);
}

std::vector<TradeoffRow> tradeoff_sweep(const LabeledDataset& ds,
                                        const std::vector<double>& epsilons, double delta,
                                        ModelKind kind, const DebiasConfig& config) {
  ds.validate();
  for (std::size_t k = 1; k < epsilons.size(); ++k)
    if (!(epsilons[k] > epsilons[k - 1]))
      raise(ErrorKind::InvalidArgument, "epsilon grid must be sorted and distinct");
  std::vector<TradeoffRow> rows;
  for (double eps : epsilons) {
    try {
      DebiasResult result = debias(ds, eps, delta, kind, config);
      for (std::size_t k = 0; k < ds.merit_columns.size(); ++k) {
        TradeoffRow row;
        row.epsilon = eps;
        row.column = ds.column_names[ds.merit_columns[k]];
        row.delta_change = result.merit_deltas[k];
        row.status = "ok";
        rows.push_back(std::move(row));
      }
    } catch (const Error& e) {
      for (std::size_t k = 0; k < ds.merit_columns.size(); ++k) {
        TradeoffRow row;
        row.epsilon = eps;
        row.column = ds.column_names[ds.merit_columns[k]];
        row.delta_change = 0.0;
        row.status = std::string("error: ") + e.what();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<double> default_epsilon_grid(double alpha) {
  if (!(alpha > 0.0)) return {0.0};
  std::vector<double> grid;
  for (int k = 9; k >= 0; --k)
    grid.push_back(alpha * std::pow(10.0, -2.0 * static_cast<double>(k) / 9.0));
  return grid;
}

}  // namespace fairflip
