#include "fairflip/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fairflip {

namespace {

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

// log(1 + exp(t)) without overflow.
double log1pexp(double t) {
  if (t > 35.0) return t;
  if (t < -35.0) return std::exp(t);
  return std::log1p(std::exp(t));
}

void check_shapes(const Matrix& x, const std::vector<std::int8_t>& y) {
  if (x.rows() != y.size())
    raise(ErrorKind::InvalidArgument, "feature rows and label length disagree");
}

// Solves A s = rhs for symmetric positive definite A (in place copies),
// adding diagonal jitter on factorization failure.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> rhs,
                                   std::size_t d) {
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> l = a;
    if (jitter > 0.0)
      for (std::size_t i = 0; i < d; ++i) l[i * d + i] += jitter;
    bool ok = true;
    for (std::size_t i = 0; i < d && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double s = l[i * d + j];
        for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
        if (i == j) {
          if (s <= 0.0) {
            ok = false;
            break;
          }
          l[i * d + i] = std::sqrt(s);
        } else {
          l[i * d + j] = s / l[j * d + j];
        }
      }
    }
    if (!ok) {
      jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0;
      continue;
    }
    std::vector<double> z(d), out(d);
    for (std::size_t i = 0; i < d; ++i) {
      double s = rhs[i];
      for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * z[k];
      z[i] = s / l[i * d + i];
    }
    for (std::size_t i = d; i-- > 0;) {
      double s = z[i];
      for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * out[k];
      out[i] = s / l[i * d + i];
    }
    return out;
  }
  raise(ErrorKind::Solve, "Cholesky factorization failed despite jitter");
}

}  // namespace

LogisticModel fit_logistic(const Matrix& x, const std::vector<std::int8_t>& y,
                           double ridge_lambda) {
  check_shapes(x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2) raise(ErrorKind::InvalidArgument, "fit_logistic needs at least two rows");
  bool has_pos = false, has_neg = false;
  for (std::int8_t yi : y) (yi > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg)
    raise(ErrorKind::Data, "fit_logistic requires both label values (one-class input diverges)");
  if (ridge_lambda < 0.0) raise(ErrorKind::InvalidArgument, "ridge_lambda must be >= 0");

  const std::size_t d = p + 1;  // theta = (beta0, beta)
  std::vector<double> theta(d, 0.0);

  auto objective = [&](const std::vector<double>& th) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double a = th[0];
      for (std::size_t j = 0; j < p; ++j) a += th[j + 1] * x(i, j);
      obj += log1pexp(-static_cast<double>(y[i]) * a);
    }
    double reg = 0.0;
    for (std::size_t j = 1; j < d; ++j) reg += th[j] * th[j];
    return obj + 0.5 * ridge_lambda * reg;
  };

  std::vector<double> grad(d);
  double grad_norm = 0.0;
  std::size_t iter = 0;
  bool converged = false;
  double cur_obj = objective(theta);
  for (; iter < 500; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> hess(d * d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double a = theta[0];
      for (std::size_t j = 0; j < p; ++j) a += theta[j + 1] * x(i, j);
      const double yi = static_cast<double>(y[i]);
      const double s = sigmoid(-yi * a);   // d/da of loss term is -y*s
      const double wgt = s * (1.0 - s);
      grad[0] -= yi * s;
      for (std::size_t j = 0; j < p; ++j) grad[j + 1] -= yi * s * x(i, j);
      hess[0] += wgt;
      for (std::size_t j = 0; j < p; ++j) {
        hess[(j + 1) * d] += wgt * x(i, j);
        hess[j + 1] += wgt * x(i, j);
        for (std::size_t k = 0; k <= j; ++k) {
          hess[(j + 1) * d + (k + 1)] += wgt * x(i, j) * x(i, k);
          if (k != j) hess[(k + 1) * d + (j + 1)] += wgt * x(i, j) * x(i, k);
        }
      }
    }
    for (std::size_t j = 1; j < d; ++j) {
      grad[j] += ridge_lambda * theta[j];
      hess[j * d + j] += ridge_lambda;
    }
    grad_norm = 0.0;
    for (double g : grad) grad_norm = std::max(grad_norm, std::abs(g));
    if (grad_norm <= 1e-8) {
      converged = true;
      break;
    }
    std::vector<double> neg = grad;
    for (double& g : neg) g = -g;
    const std::vector<double> step = cholesky_solve(hess, neg, d);
    double gd = 0.0;
    for (std::size_t j = 0; j < d; ++j) gd += grad[j] * step[j];
    double t = 1.0;
    std::vector<double> trial(d);
    bool moved = false;
    while (t >= 1e-13) {
      for (std::size_t j = 0; j < d; ++j) trial[j] = theta[j] + t * step[j];
      const double trial_obj = objective(trial);
      if (trial_obj <= cur_obj + 1e-4 * t * gd) {
        theta = trial;
        cur_obj = trial_obj;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;  // stuck at numerical floor; report gradient norm as is
  }

  LogisticModel model;
  model.beta0 = theta[0];
  model.beta.assign(theta.begin() + 1, theta.end());
  model.ridge_lambda = ridge_lambda;
  model.fit = {iter, grad_norm, converged};
  return model;
}

double logistic_loss(double beta0, const std::vector<double>& beta, const Matrix& x,
                     const std::vector<std::int8_t>& y) {
  check_shapes(x, y);
  if (beta.size() != x.cols())
    raise(ErrorKind::InvalidArgument, "beta length does not match feature count");
  double obj = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double a = beta0;
    for (std::size_t j = 0; j < x.cols(); ++j) a += beta[j] * x(i, j);
    obj += log1pexp(-static_cast<double>(y[i]) * a);
  }
  return obj;
}

double logistic_loss(const LogisticModel& model, const Matrix& x,
                     const std::vector<std::int8_t>& y) {
  return logistic_loss(model.beta0, model.beta, x, y);
}

namespace {

void check_flip_shapes(const std::vector<double>& beta, const std::vector<double>& gamma0,
                       const Matrix& gamma, const Matrix& x, const std::vector<std::int8_t>& y) {
  check_shapes(x, y);
  if (beta.size() != x.cols())
    raise(ErrorKind::InvalidArgument, "beta length does not match feature count");
  if (gamma0.size() != x.rows() || gamma.rows() != x.rows() || gamma.cols() != x.cols())
    raise(ErrorKind::InvalidArgument, "gamma block shape does not match data");
}

double flip_margin(double beta0, const std::vector<double>& beta,
                   const std::vector<double>& gamma0, const Matrix& gamma, const Matrix& x,
                   const std::vector<std::int8_t>& y, std::size_t i) {
  const double yi = static_cast<double>(y[i]);
  double a = beta0, g = gamma0[i];
  for (std::size_t j = 0; j < x.cols(); ++j) {
    a += beta[j] * x(i, j);
    g += gamma(i, j) * x(i, j);
  }
  // Exponent of the i-th term is -t_i.
  return yi * a - 2.0 * yi * g;
}

}  // namespace

double logistic_flip_value(double beta0, const std::vector<double>& beta,
                           const std::vector<double>& gamma0, const Matrix& gamma,
                           const Matrix& x, const std::vector<std::int8_t>& y) {
  check_flip_shapes(beta, gamma0, gamma, x, y);
  double obj = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    obj += log1pexp(-flip_margin(beta0, beta, gamma0, gamma, x, y, i));
  return obj;
}

FlipGradient logistic_flip_gradient(double beta0, const std::vector<double>& beta,
                                    const std::vector<double>& gamma0, const Matrix& gamma,
                                    const Matrix& x, const std::vector<std::int8_t>& y) {
  check_flip_shapes(beta, gamma0, gamma, x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  FlipGradient g;
  g.d_beta.assign(p, 0.0);
  g.d_gamma0.assign(n, 0.0);
  g.d_gamma = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = static_cast<double>(y[i]);
    const double q = sigmoid(-flip_margin(beta0, beta, gamma0, gamma, x, y, i));
    g.d_beta0 -= yi * q;
    g.d_gamma0[i] = 2.0 * yi * q;
    for (std::size_t j = 0; j < p; ++j) {
      g.d_beta[j] -= yi * q * x(i, j);
      g.d_gamma(i, j) = 2.0 * yi * q * x(i, j);
    }
  }
  return g;
}

namespace {

// Exact minimizer of C * sum hinge(1 - y*(m - b)) over the offset b given the
// margins m_i = w.x_i: convex piecewise linear, optimum at a breakpoint or the
// midpoint of a flat optimal interval.
double best_offset(const std::vector<double>& margins, const std::vector<std::int8_t>& y) {
  const std::size_t n = margins.size();
  std::vector<double> bps(n);
  for (std::size_t i = 0; i < n; ++i)
    bps[i] = margins[i] - static_cast<double>(y[i]);  // hinge kink in b
  std::sort(bps.begin(), bps.end());
  auto total = [&](double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = static_cast<double>(y[i]) * (margins[i] - b);
      s += std::max(0.0, 1.0 - m);
    }
    return s;
  };
  // Slope left of all breakpoints is -(number of negatives); walk kinks.
  double best_b = bps.front();
  double best_v = total(best_b);
  double flat_lo = best_b, flat_hi = best_b;
  for (std::size_t k = 1; k < n; ++k) {
    const double v = total(bps[k]);
    if (v < best_v - 1e-12) {
      best_v = v;
      best_b = bps[k];
      flat_lo = flat_hi = bps[k];
    } else if (v <= best_v + 1e-12) {
      flat_hi = bps[k];
    }
  }
  return 0.5 * (flat_lo + flat_hi);
}

}  // namespace

SvmModel fit_svm(const Matrix& x, const std::vector<std::int8_t>& y, double C) {
  check_shapes(x, y);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2) raise(ErrorKind::InvalidArgument, "fit_svm needs at least two rows");
  if (!(C > 0.0)) raise(ErrorKind::InvalidArgument, "C must be positive");
  bool has_pos = false, has_neg = false;
  for (std::int8_t yi : y) (yi > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) raise(ErrorKind::Data, "fit_svm requires both label values");

  std::vector<double> alpha(n, 0.0), w(p, 0.0), margin(n, 0.0);
  std::vector<double> kdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) s += x(i, j) * x(i, j);
    kdiag[i] = s;
  }

  auto primal_dual = [&](double& primal, double& dual, double& b_out) {
    b_out = best_offset(margin, y);
    double hinge = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      hinge += std::max(0.0, 1.0 - static_cast<double>(y[i]) * (margin[i] - b_out));
    double wsq = 0.0;
    for (double v : w) wsq += v * v;
    primal = 0.5 * wsq + C * hinge;
    double asum = 0.0;
    for (double a : alpha) asum += a;
    dual = asum - 0.5 * wsq;
  };

  const double eps = 1e-12;
  const std::size_t max_epochs = 100000;
  const std::size_t updates_per_epoch = std::max<std::size_t>(n, 8);
  double gap = std::numeric_limits<double>::infinity(), primal = 0.0, dual = 0.0, b = 0.0;
  std::size_t epoch = 0;
  for (; epoch < max_epochs; ++epoch) {
    bool made_update = false;
    for (std::size_t sweep = 0; sweep < updates_per_epoch; ++sweep) {
      // Maximal violating pair over E_i = w.x_i - y_i.
      double e_up = std::numeric_limits<double>::infinity(), e_low = -e_up;
      long i_up = -1, i_low = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const double e = margin[i] - static_cast<double>(y[i]);
        const bool in_up = (y[i] > 0 && alpha[i] < C - eps) || (y[i] < 0 && alpha[i] > eps);
        const bool in_low = (y[i] < 0 && alpha[i] < C - eps) || (y[i] > 0 && alpha[i] > eps);
        if (in_up && e < e_up) {
          e_up = e;
          i_up = static_cast<long>(i);
        }
        if (in_low && e > e_low) {
          e_low = e;
          i_low = static_cast<long>(i);
        }
      }
      if (i_up < 0 || i_low < 0 || i_up == i_low || e_low - e_up < 1e-12) break;
      const std::size_t i = static_cast<std::size_t>(i_up);
      const std::size_t j = static_cast<std::size_t>(i_low);
      double kij = 0.0;
      for (std::size_t k = 0; k < p; ++k) kij += x(i, k) * x(j, k);
      const double eta = kdiag[i] + kdiag[j] - 2.0 * kij;
      const double yi = static_cast<double>(y[i]);
      const double yj = static_cast<double>(y[j]);
      // Move alpha_i y_i by +t and alpha_j y_j by -t, preserving sum(alpha.y);
      // the dual gain is (e_low - e_up) t - eta t^2 / 2.
      double t_max = std::min(yi > 0 ? C - alpha[i] : alpha[i],
                              yj > 0 ? alpha[j] : C - alpha[j]);
      if (t_max <= 0.0) break;
      double t = eta > 1e-14 ? (e_low - e_up) / eta : t_max;
      t = std::min(t, t_max);
      if (t <= 0.0) break;
      alpha[i] += yi > 0 ? t : -t;
      alpha[j] -= yj > 0 ? t : -t;
      for (std::size_t k = 0; k < p; ++k) w[k] += t * (x(i, k) - x(j, k));
      for (std::size_t k = 0; k < n; ++k) {
        double kk = 0.0;
        for (std::size_t c = 0; c < p; ++c) kk += x(k, c) * (x(i, c) - x(j, c));
        margin[k] += t * kk;
      }
      made_update = true;
    }
    primal_dual(primal, dual, b);
    gap = primal - dual;
    if (gap <= 1e-6 * std::max(1.0, std::abs(primal))) break;
    if (!made_update) break;  // KKT-stationary but gap stuck: report below
  }
  if (gap > 1e-6 * std::max(1.0, std::abs(primal)))
    raise(ErrorKind::Solve, "fit_svm did not converge after " + std::to_string(epoch) +
                                " epochs; duality gap " + std::to_string(gap));

  SvmModel model;
  model.w = std::move(w);
  model.b = b;
  model.C = C;
  model.objective = primal;
  model.fit = {epoch + 1, gap, true};
  return model;
}

std::vector<double> hinge_losses(const SvmModel& model, const Matrix& x,
                                 const std::vector<std::int8_t>& y) {
  check_shapes(x, y);
  if (model.w.size() != x.cols())
    raise(ErrorKind::InvalidArgument, "model width does not match feature count");
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double m = static_cast<double>(y[i]) * (dot_row(x, i, model.w) - model.b);
    out[i] = std::max(0.0, 1.0 - m);
  }
  return out;
}

namespace {

std::vector<double> standardize_row(const StandardizationParams& params,
                                    const std::vector<std::string>& columns, Group g,
                                    const std::vector<double>& raw_x) {
  const auto& cols = params.per_group[static_cast<std::size_t>(g)];
  if (cols.size() != raw_x.size())
    raise(ErrorKind::InvalidArgument, "feature vector length does not match model columns");
  (void)columns;
  std::vector<double> out(raw_x.size());
  for (std::size_t j = 0; j < raw_x.size(); ++j)
    out[j] = (raw_x[j] - cols[j].mean) / cols[j].stddev;
  return out;
}

}  // namespace

Prediction predict(const AnyModel& model, const std::vector<double>& raw_x,
                   const std::string& group_category) {
  const auto resolve_group = [&](const std::string& adv, const std::string& dis) {
    if (group_category == adv) return Group::Adv;
    if (group_category == dis) return Group::Dis;
    raise(ErrorKind::Data, "unknown group category '" + group_category +
                               "': model was trained on '" + adv + "' and '" + dis + "'");
  };
  Prediction out;
  if (std::holds_alternative<LogisticModel>(model)) {
    const auto& m = std::get<LogisticModel>(model);
    const Group g = resolve_group(m.adv_category, m.dis_category);
    const auto z = standardize_row(m.standardization, m.columns, g, raw_x);
    double a = m.beta0;
    for (std::size_t j = 0; j < z.size(); ++j) a += m.beta[j] * z[j];
    out.score = sigmoid(a);
    out.label = out.score >= 0.5 ? std::int8_t{1} : std::int8_t{-1};
  } else {
    const auto& m = std::get<SvmModel>(model);
    const Group g = resolve_group(m.adv_category, m.dis_category);
    const auto z = standardize_row(m.standardization, m.columns, g, raw_x);
    double a = -m.b;
    for (std::size_t j = 0; j < z.size(); ++j) a += m.w[j] * z[j];
    out.score = a;
    out.label = a >= 0.0 ? std::int8_t{1} : std::int8_t{-1};
  }
  return out;
}

double auc(const std::vector<double>& scores, const std::vector<std::int8_t>& labels) {
  if (scores.size() != labels.size())
    raise(ErrorKind::InvalidArgument, "score and label lengths disagree");
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::int8_t y : labels)
    if (y > 0) ++n_pos;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) raise(ErrorKind::Data, "auc requires both classes");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups; rank sum of positives gives the statistic.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t k = i; k <= j; ++k)
      if (labels[order[k]] > 0) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace fairflip
