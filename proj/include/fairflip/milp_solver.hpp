#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fairflip/lp_core.hpp"

namespace fairflip {

struct MilpCallbackContext {
  double global_bound = -kLpInfinity;
  std::optional<double> incumbent;
  std::uint64_t node_id = 0;
};

/// Lazy cuts must be valid for every integral-feasible point; a cut that
/// removes the current incumbent is a contract violation and is surfaced.
/// When a point is certified cut-free the callback may supply a repaired
/// incumbent (same binaries, adjusted continuous part and objective); for
/// epigraph cut families this keeps stored incumbents valid under all
/// later cuts.
struct CallbackResult {
  std::vector<LpRow> cuts;
  bool request_stop = false;
  std::optional<std::pair<std::vector<double>, double>> incumbent_override;
};

using LazyCutCallback =
    std::function<CallbackResult(const std::vector<double>& x, const MilpCallbackContext&)>;
using TraceSink = std::function<void(const std::string&)>;

struct MixedIntegerProgram {
  LinearProgram base;
  std::vector<std::size_t> binary_indices;
  LazyCutCallback callback;  // optional
  TraceSink trace;           // optional, one line per node

  void validate() const;
};

enum class MilpStatus { Optimal, Infeasible, GapLimit, NodeLimit };

struct MilpSolution {
  MilpStatus status = MilpStatus::Infeasible;
  std::vector<double> x;
  double objective_value = 0.0;
  double bound = -kLpInfinity;
  std::size_t node_count = 0;
};

/// Best-first branch and bound over binary variables. Node selection is keyed
/// on LP bound with creation-order tie break; branching picks the most
/// fractional binary, lowest index on ties. Deterministic for fixed inputs.
MilpSolution solve_milp(const MixedIntegerProgram& mip, double gap_tol = 1e-6,
                        std::size_t node_limit = 1000000);

}  // namespace fairflip
