#include "fairflip/milp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace fairflip {

namespace {

constexpr double kIntTol = 1e-6;
constexpr std::size_t kMaxResolvesPerNode = 10000;

struct Node {
  double bound;
  std::uint64_t id;
  std::size_t depth;
  std::vector<std::pair<std::size_t, double>> fixes;  // binary var -> 0/1
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.id > b.id;
  }
};

bool is_integral(double v) { return std::abs(v - std::round(v)) <= kIntTol; }

}  // namespace

void MixedIntegerProgram::validate() const {
  base.validate();
  for (std::size_t j : binary_indices) {
    if (j >= base.num_vars())
      raise(ErrorKind::InvalidArgument, "binary index out of range");
    if (base.lower[j] < -kIntTol || base.upper[j] > 1.0 + kIntTol)
      raise(ErrorKind::InvalidArgument, "binary variable bounds must lie within [0, 1]");
  }
}

MilpSolution solve_milp(const MixedIntegerProgram& mip, double gap_tol, std::size_t node_limit) {
  mip.validate();

  if (mip.binary_indices.empty() && !mip.callback) {
    const LpSolution lps = solve_lp(mip.base);
    MilpSolution sol;
    sol.node_count = 1;
    switch (lps.status) {
      case LpStatus::Optimal:
        sol.status = MilpStatus::Optimal;
        sol.x = lps.x;
        sol.objective_value = lps.objective_value;
        sol.bound = lps.objective_value;
        break;
      case LpStatus::Infeasible:
        sol.status = MilpStatus::Infeasible;
        break;
      case LpStatus::Unbounded:
        raise(ErrorKind::Solve, "MILP relaxation is unbounded");
    }
    return sol;
  }

  std::vector<std::size_t> binaries = mip.binary_indices;
  std::sort(binaries.begin(), binaries.end());

  std::vector<LpRow> cut_pool;
  std::vector<double> incumbent_x;
  double incumbent_obj = kLpInfinity;
  bool have_incumbent = false;
  bool stop_requested = false;

  auto build_lp = [&](const Node& node) {
    LinearProgram lp = mip.base;
    for (const auto& cut : cut_pool) lp.rows.push_back(cut);
    for (const auto& [var, val] : node.fixes) {
      lp.lower[var] = val;
      lp.upper[var] = val;
    }
    return lp;
  };

  auto check_cut_against_incumbent = [&](const LpRow& cut) {
    if (!have_incumbent) return;
    double act = 0.0;
    for (std::size_t j = 0; j < cut.coeffs.size(); ++j) act += cut.coeffs[j] * incumbent_x[j];
    const double tol = 1e-6 * std::max(1.0, std::abs(cut.rhs));
    const bool violated = (cut.rel == Relation::LessEq && act > cut.rhs + tol) ||
                          (cut.rel == Relation::GreaterEq && act < cut.rhs - tol) ||
                          (cut.rel == Relation::Equal && std::abs(act - cut.rhs) > tol);
    if (violated)
      raise(ErrorKind::Solve,
            "lazy-cut contract violation: returned row cuts off the current incumbent");
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t next_id = 0;
  open.push(Node{-kLpInfinity, next_id++, 0, {}});

  std::size_t node_count = 0;
  double popped_bound = -kLpInfinity;  // monotone under best-first selection
  bool cutoff_exhausted = false;

  auto cutoff = [&]() {
    return have_incumbent ? incumbent_obj - gap_tol * std::max(1.0, std::abs(incumbent_obj))
                          : kLpInfinity;
  };

  while (!open.empty() && !stop_requested) {
    if (node_count >= node_limit) break;
    Node node = open.top();
    open.pop();
    popped_bound = std::max(popped_bound, node.bound);
    if (have_incumbent && node.bound >= cutoff()) {
      cutoff_exhausted = true;
      break;
    }
    ++node_count;

    LpSolution lps;
    bool pruned = false;
    std::size_t frac_count = 0;
    long branch_var = -1;
    std::size_t resolves = 0;
    std::optional<std::pair<std::vector<double>, double>> override;
    while (true) {
      if (++resolves > kMaxResolvesPerNode)
        raise(ErrorKind::Solve, "lazy-cut callback kept cutting the same node");
      lps = solve_lp(build_lp(node));
      if (lps.status == LpStatus::Infeasible) {
        pruned = true;
        break;
      }
      if (lps.status == LpStatus::Unbounded)
        raise(ErrorKind::Solve, "node relaxation is unbounded; bound the variables");
      node.bound = std::max(node.bound, lps.objective_value);
      if (have_incumbent && lps.objective_value >= cutoff()) {
        pruned = true;
        break;
      }
      frac_count = 0;
      branch_var = -1;
      double most_frac = -1.0;
      for (std::size_t j : binaries) {
        const double v = lps.x[j];
        if (!is_integral(v)) {
          ++frac_count;
          const double frac = std::abs(v - std::round(v));
          if (frac > most_frac + 1e-12) {
            most_frac = frac;
            branch_var = static_cast<long>(j);
          }
        }
      }
      if (frac_count > 0) break;
      if (!mip.callback) break;
      MilpCallbackContext ctx;
      ctx.global_bound = open.empty() ? node.bound : std::min(node.bound, open.top().bound);
      if (have_incumbent) ctx.incumbent = incumbent_obj;
      ctx.node_id = node.id;
      CallbackResult cbr = mip.callback(lps.x, ctx);
      if (cbr.cuts.empty()) {
        if (cbr.request_stop) stop_requested = true;
        if (cbr.incumbent_override) {
          if (cbr.incumbent_override->first.size() != mip.base.num_vars())
            raise(ErrorKind::InvalidArgument, "incumbent override has wrong length");
          override = std::move(cbr.incumbent_override);
        }
        break;  // cut-free integral point: acceptable incumbent
      }
      for (auto& cut : cbr.cuts) {
        if (cut.coeffs.size() != mip.base.num_vars())
          raise(ErrorKind::InvalidArgument, "lazy cut has wrong coefficient length");
        check_cut_against_incumbent(cut);
        cut_pool.push_back(std::move(cut));
      }
      if (cbr.request_stop) {
        // Do not trust the pre-cut relaxation for incumbent bookkeeping.
        stop_requested = true;
        pruned = true;
        break;
      }
    }

    if (mip.trace) {
      std::ostringstream os;
      os << "node=" << node.id << " bound=" << popped_bound << " depth=" << node.depth
         << " frac=" << frac_count;
      mip.trace(os.str());
    }
    if (pruned) continue;

    if (frac_count == 0) {
      const double cand_obj = override ? override->second : lps.objective_value;
      if (!have_incumbent || cand_obj < incumbent_obj) {
        incumbent_obj = cand_obj;
        incumbent_x = override ? std::move(override->first) : lps.x;
        for (std::size_t j : binaries) incumbent_x[j] = std::round(incumbent_x[j]);
        have_incumbent = true;
      }
      continue;
    }

    const std::size_t var = static_cast<std::size_t>(branch_var);
    Node down{node.bound, next_id++, node.depth + 1, node.fixes};
    down.fixes.emplace_back(var, 0.0);
    Node up{node.bound, next_id++, node.depth + 1, node.fixes};
    up.fixes.emplace_back(var, 1.0);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  // Terminal bound: everything still open is at least min(open) and the
  // incumbent value caps it from above.
  double bound;
  if (cutoff_exhausted) {
    bound = popped_bound;
  } else if (open.empty()) {
    bound = have_incumbent ? incumbent_obj : popped_bound;
  } else {
    bound = open.top().bound;
  }
  if (have_incumbent) bound = std::min(bound, incumbent_obj);

  MilpSolution sol;
  sol.node_count = node_count;
  sol.bound = bound;
  if (have_incumbent) {
    sol.x = incumbent_x;
    sol.objective_value = incumbent_obj;
    if (stop_requested && !open.empty())
      sol.status = MilpStatus::GapLimit;
    else if (!stop_requested && !open.empty() && !cutoff_exhausted)
      sol.status = MilpStatus::NodeLimit;
    else
      sol.status = MilpStatus::Optimal;
  } else {
    if (open.empty() && !stop_requested)
      sol.status = MilpStatus::Infeasible;
    else
      sol.status = stop_requested ? MilpStatus::GapLimit : MilpStatus::NodeLimit;
  }
  return sol;
}

}  // namespace fairflip
