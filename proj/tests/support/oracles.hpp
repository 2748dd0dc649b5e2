#pragma once

// Independent test oracles. Everything here must stay decoupled from the
// implementation paths it checks: vertex enumeration for LPs, exhaustive
// scans for binary programs, finite differences for gradients, and plain
// textbook iterations for the model fits.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "fairflip/lp_core.hpp"
#include "fairflip/matrix.hpp"

namespace oracles {

/// Minimum of c.x over the polytope by brute-force basic-point enumeration:
/// every choice of m active constraints among rows-at-equality and finite
/// bounds is solved and feasibility-checked. Returns nullopt when no feasible
/// basic point exists (infeasible or badly posed).
std::optional<double> lp_vertex_enumeration(const fairflip::LinearProgram& lp);

/// Exhaustive scan over all binary assignments; continuous variables must be
/// absent (every variable binary). Returns nullopt when no assignment is
/// feasible.
std::optional<double> milp_exhaustive(const fairflip::LinearProgram& lp);

/// Central finite differences of a scalar function.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double step);

/// Textbook IRLS logistic regression with ridge on the non-intercept part.
/// Written independently of the production Newton path.
std::vector<double> irls_logistic(const fairflip::Matrix& x, const std::vector<std::int8_t>& y,
                                  double ridge, std::size_t iters = 200);

/// Projected subgradient descent on the primal SVM objective; slow but
/// independent. Returns the best objective seen.
double svm_subgradient_objective(const fairflip::Matrix& x, const std::vector<std::int8_t>& y,
                                 double c, std::size_t iters = 200000);

}  // namespace oracles
