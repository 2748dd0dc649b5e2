#include "support/oracles.hpp"

#include <algorithm>

namespace oracles {

namespace {

using fairflip::LinearProgram;
using fairflip::Relation;

// Gaussian elimination solve; returns false when singular.
bool solve_square(std::vector<double> a, std::vector<double> b, std::size_t m,
                  std::vector<double>& out) {
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t piv = k;
    double best = std::abs(a[perm[k] * m + k]);
    for (std::size_t i = k + 1; i < m; ++i) {
      const double v = std::abs(a[perm[i] * m + k]);
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (best < 1e-10) return false;
    std::swap(perm[k], perm[piv]);
    for (std::size_t i = k + 1; i < m; ++i) {
      const double f = a[perm[i] * m + k] / a[perm[k] * m + k];
      if (f == 0.0) continue;
      for (std::size_t j = k; j < m; ++j) a[perm[i] * m + j] -= f * a[perm[k] * m + j];
      b[perm[i]] -= f * b[perm[k]];
    }
  }
  out.assign(m, 0.0);
  for (std::size_t k = m; k-- > 0;) {
    double acc = b[perm[k]];
    for (std::size_t j = k + 1; j < m; ++j) acc -= a[perm[k] * m + j] * out[j];
    out[k] = acc / a[perm[k] * m + k];
  }
  return true;
}

bool feasible(const LinearProgram& lp, const std::vector<double>& x, double tol) {
  const std::size_t m = lp.num_vars();
  for (std::size_t j = 0; j < m; ++j) {
    if (x[j] < lp.lower[j] - tol || x[j] > lp.upper[j] + tol) return false;
  }
  for (const auto& row : lp.rows) {
    double act = 0.0;
    for (std::size_t j = 0; j < m; ++j) act += row.coeffs[j] * x[j];
    switch (row.rel) {
      case Relation::LessEq:
        if (act > row.rhs + tol) return false;
        break;
      case Relation::GreaterEq:
        if (act < row.rhs - tol) return false;
        break;
      case Relation::Equal:
        if (std::abs(act - row.rhs) > tol) return false;
        break;
    }
  }
  return true;
}

}  // namespace

std::optional<double> lp_vertex_enumeration(const fairflip::LinearProgram& lp) {
  const std::size_t m = lp.num_vars();
  struct Plane {
    std::vector<double> coeffs;
    double rhs;
  };
  std::vector<Plane> planes;
  for (const auto& row : lp.rows) planes.push_back({row.coeffs, row.rhs});
  for (std::size_t j = 0; j < m; ++j) {
    if (std::isfinite(lp.lower[j])) {
      std::vector<double> c(m, 0.0);
      c[j] = 1.0;
      planes.push_back({c, lp.lower[j]});
    }
    if (std::isfinite(lp.upper[j])) {
      std::vector<double> c(m, 0.0);
      c[j] = 1.0;
      planes.push_back({c, lp.upper[j]});
    }
  }
  const std::size_t total = planes.size();
  if (total < m) return std::nullopt;

  std::optional<double> best;
  std::vector<std::size_t> pick(m);
  for (std::size_t i = 0; i < m; ++i) pick[i] = i;
  while (true) {
    std::vector<double> a(m * m), b(m);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t c = 0; c < m; ++c) a[r * m + c] = planes[pick[r]].coeffs[c];
      b[r] = planes[pick[r]].rhs;
    }
    std::vector<double> x;
    if (solve_square(std::move(a), std::move(b), m, x) && feasible(lp, x, 1e-7)) {
      double obj = 0.0;
      for (std::size_t j = 0; j < m; ++j) obj += lp.objective[j] * x[j];
      if (!best || obj < *best) best = obj;
    }
    // next m-combination
    std::size_t i = m;
    bool more = false;
    while (i-- > 0) {
      if (pick[i] + (m - i) < total) {
        ++pick[i];
        for (std::size_t j = i + 1; j < m; ++j) pick[j] = pick[j - 1] + 1;
        more = true;
        break;
      }
    }
    if (!more) break;
  }
  return best;
}

std::optional<double> milp_exhaustive(const fairflip::LinearProgram& lp) {
  const std::size_t m = lp.num_vars();
  if (m > 24) return std::nullopt;
  std::optional<double> best;
  std::vector<double> x(m);
  for (std::uint64_t mask = 0; mask < (1ull << m); ++mask) {
    bool in_bounds = true;
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = (mask >> j) & 1 ? 1.0 : 0.0;
      if (x[j] < lp.lower[j] - 1e-9 || x[j] > lp.upper[j] + 1e-9) {
        in_bounds = false;
        break;
      }
    }
    if (!in_bounds || !feasible(lp, x, 1e-9)) continue;
    double obj = 0.0;
    for (std::size_t j = 0; j < m; ++j) obj += lp.objective[j] * x[j];
    if (!best || obj < *best) best = obj;
  }
  return best;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double step) {
  std::vector<double> grad(at.size());
  for (std::size_t j = 0; j < at.size(); ++j) {
    const double keep = at[j];
    at[j] = keep + step;
    const double hi = f(at);
    at[j] = keep - step;
    const double lo = f(at);
    at[j] = keep;
    grad[j] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

std::vector<double> irls_logistic(const fairflip::Matrix& x, const std::vector<std::int8_t>& y,
                                  double ridge, std::size_t iters) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const std::size_t d = p + 1;
  std::vector<double> theta(d, 0.0);
  for (std::size_t it = 0; it < iters; ++it) {
    std::vector<double> g(d, 0.0), h(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double a = theta[0];
      for (std::size_t j = 0; j < p; ++j) a += theta[j + 1] * x(i, j);
      const double mu = 1.0 / (1.0 + std::exp(-a));
      const double t = y[i] > 0 ? 1.0 : 0.0;  // Bernoulli target form of the same loss
      const double w = std::max(mu * (1.0 - mu), 1e-12);
      std::vector<double> row(d, 1.0);
      for (std::size_t j = 0; j < p; ++j) row[j + 1] = x(i, j);
      for (std::size_t r = 0; r < d; ++r) {
        g[r] += (t - mu) * row[r];
        for (std::size_t c = 0; c < d; ++c) h[r * d + c] += w * row[r] * row[c];
      }
    }
    for (std::size_t j = 1; j < d; ++j) {
      g[j] -= ridge * theta[j];
      h[j * d + j] += ridge;
    }
    std::vector<double> step;
    std::vector<double> hc = h;
    if (!solve_square(std::move(hc), g, d, step)) break;
    double norm = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      theta[j] += step[j];
      norm = std::max(norm, std::abs(step[j]));
    }
    if (norm < 1e-12) break;
  }
  return theta;
}

double svm_subgradient_objective(const fairflip::Matrix& x, const std::vector<std::int8_t>& y,
                                 double c, std::size_t iters) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  std::vector<double> w(p, 0.0);
  double b = 0.0;
  auto objective = [&]() {
    double s = 0.0;
    for (double v : w) s += 0.5 * v * v;
    for (std::size_t i = 0; i < n; ++i) {
      double m = -b;
      for (std::size_t j = 0; j < p; ++j) m += w[j] * x(i, j);
      s += c * std::max(0.0, 1.0 - static_cast<double>(y[i]) * m);
    }
    return s;
  };
  double best = objective();
  for (std::size_t it = 1; it <= iters; ++it) {
    const double step = 1.0 / (1.0 + 0.05 * static_cast<double>(it));
    std::vector<double> gw = w;
    double gb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double m = -b;
      for (std::size_t j = 0; j < p; ++j) m += w[j] * x(i, j);
      if (static_cast<double>(y[i]) * m < 1.0) {
        const double yi = static_cast<double>(y[i]);
        for (std::size_t j = 0; j < p; ++j) gw[j] -= c * yi * x(i, j);
        gb += c * yi;
      }
    }
    for (std::size_t j = 0; j < p; ++j) w[j] -= step * gw[j] / static_cast<double>(n);
    b -= step * gb / static_cast<double>(n);
    best = std::min(best, objective());
  }
  return best;
}

}  // namespace oracles
