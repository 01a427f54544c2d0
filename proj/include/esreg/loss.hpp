#pragma once

#include <Eigen/Dense>

#include "esreg/config.hpp"
#include "esreg/dataset.hpp"
#include "esreg/propensity.hpp"

namespace esreg {

using Coefficients = Eigen::VectorXd;

// Exponential squared loss 1 - exp(-r^2 / h). Bounded in [0, 1); h > 0
// controls how quickly large residuals stop mattering.
double exp_sq_loss(double residual, double h);

// d/dr of the loss: (2 r / h) * exp(-r^2 / h). Redescending: it decays to
// zero for |r| >> sqrt(h), which is what makes the estimator robust.
double exp_sq_loss_grad(double residual, double h);

// Residual measured orthogonally to the regression hyperplane:
// (y - t.omega) / sqrt(1 + |omega|^2). Compensates additive noise in t.
double orthogonal_residual(double y, const Eigen::VectorXd& t_row,
                           const Coefficients& omega);

// Sum over complete rows of loss(residual_i, h) / prob_i. Incomplete rows
// contribute exactly zero. The residual is orthogonal or raw according to
// cfg.condition; callers that do not want inverse-probability weighting
// pass PropensityWeights::unit(n).
double weighted_objective(const Dataset& data, const Coefficients& omega,
                          const FitConfig& cfg, const PropensityWeights& weights);

// Analytic gradient of weighted_objective with respect to omega.
Coefficients objective_gradient(const Dataset& data, const Coefficients& omega,
                                const FitConfig& cfg,
                                const PropensityWeights& weights);

namespace detail {

// Complete rows compacted for repeated evaluation inside the optimizer.
// Absent cells are never copied here, which is what guarantees their
// placeholder values cannot influence any result.
struct CompleteView {
  Eigen::MatrixXd design;    // n_complete x d
  Eigen::VectorXd response;  // n_complete
  Eigen::VectorXd weights;   // 1 / prob over complete rows

  static CompleteView from(const Dataset& data, const PropensityWeights& w);
};

double view_objective(const CompleteView& v, const Coefficients& omega,
                      double h, bool orthogonal);
Eigen::VectorXd view_gradient(const CompleteView& v, const Coefficients& omega,
                              double h, bool orthogonal);

}  // namespace detail
}  // namespace esreg
