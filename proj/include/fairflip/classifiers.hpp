#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fairflip/data_model.hpp"
#include "fairflip/matrix.hpp"

namespace fairflip {

struct FitDiagnostics {
  std::size_t iterations = 0;
  double grad_inf_norm = 0.0;
  bool converged = false;
};

struct LogisticModel {
  double beta0 = 0.0;
  std::vector<double> beta;
  double ridge_lambda = 1e-6;
  StandardizationParams standardization;
  std::vector<std::string> columns;
  std::string adv_category;
  std::string dis_category;
  FitDiagnostics fit;
};

struct SvmModel {
  double b = 0.0;  // decision value is w.x - b
  std::vector<double> w;
  double C = 1.0;
  double objective = 0.0;  // 0.5*|w|^2 + C*sum(hinge)
  StandardizationParams standardization;
  std::vector<std::string> columns;
  std::string adv_category;
  std::string dis_category;
  FitDiagnostics fit;
};

using AnyModel = std::variant<LogisticModel, SvmModel>;

/// Gradient blocks of f(beta, gamma), the label-flip linearized logistic
/// objective; gamma has one row per observation, column 0 is the intercept
/// product.
struct FlipGradient {
  double d_beta0 = 0.0;
  std::vector<double> d_beta;
  std::vector<double> d_gamma0;
  Matrix d_gamma;  // n x p
};

/// Ridge-regularized logistic fit by damped Newton (Armijo backtracking).
/// The ridge applies to beta only, never to the intercept.
LogisticModel fit_logistic(const Matrix& x, const std::vector<std::int8_t>& y,
                           double ridge_lambda = 1e-6);

/// Plain log-loss, no ridge term.
double logistic_loss(double beta0, const std::vector<double>& beta, const Matrix& x,
                     const std::vector<std::int8_t>& y);
double logistic_loss(const LogisticModel& model, const Matrix& x,
                     const std::vector<std::int8_t>& y);

double logistic_flip_value(double beta0, const std::vector<double>& beta,
                           const std::vector<double>& gamma0, const Matrix& gamma,
                           const Matrix& x, const std::vector<std::int8_t>& y);

FlipGradient logistic_flip_gradient(double beta0, const std::vector<double>& beta,
                                    const std::vector<double>& gamma0, const Matrix& gamma,
                                    const Matrix& x, const std::vector<std::int8_t>& y);

/// L1-hinge linear SVM with free offset, solved in the dual by pairwise
/// coordinate ascent; stops at relative duality gap 1e-6.
SvmModel fit_svm(const Matrix& x, const std::vector<std::int8_t>& y, double C = 1.0);

std::vector<double> hinge_losses(const SvmModel& model, const Matrix& x,
                                 const std::vector<std::int8_t>& y);

struct Prediction {
  double score = 0.0;
  std::int8_t label = 1;
};

/// Standardizes raw features with the group's stored parameters and scores.
/// Ties at the decision threshold classify as +1.
Prediction predict(const AnyModel& model, const std::vector<double>& raw_x,
                   const std::string& group_category);

/// Mann-Whitney AUC; ties count one half.
double auc(const std::vector<double>& scores, const std::vector<std::int8_t>& labels);

}  // namespace fairflip
