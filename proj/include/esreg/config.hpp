#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace esreg {

// Which corrections the estimator applies. The data may carry measurement
// error and missingness regardless of the choice here; these flags only
// control how the estimator treats it.
enum class Condition {
  FullCorrection,  // inverse-probability weights + orthogonal residual
  ErrorOnly,       // orthogonal residual, unit weights
  MissingOnly,     // inverse-probability weights, raw residual
  NoCorrection,    // unit weights, raw residual
};

bool uses_orthogonal_residual(Condition c);
bool uses_ipw(Condition c);

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct OptimizerConfig {
  double step_size = 0.5;
  int max_iters = 2000;
  double grad_tol = 1e-6;

  // Graduated smoothing: when the loss scale h is far below the squared
  // residuals at the starting point, the gradient of the exponential
  // squared loss is numerically dead and gradient descent cannot leave
  // the origin. We therefore first solve with an inflated h and anneal
  // it down to the target, warm-starting each stage from the previous
  // solution. With anneal=false (or h already large) a single stage runs.
  bool anneal = true;
  double anneal_factor = 2.0;
  int anneal_stage_iters = 300;

  // Record the penalized objective after every accepted iteration of the
  // final stage (diagnostic; used by descent tests).
  bool trace_objective = false;

  void validate() const;
};

struct FitConfig {
  double h = 1.0;
  Condition condition = Condition::FullCorrection;
  OptimizerConfig optimizer;
  std::vector<double> hbic_grid;  // candidate penalty levels, ascending
  double atan_u = 0.005;          // shape parameter of the atan penalty
  double en_rule = 1.0;           // scales the log(d) factor in the size penalty
  std::int64_t seed = 0;          // provenance only; copied into results

  FitConfig();
  void validate() const;
};

// 30 log-spaced penalty levels spanning [1e-3, 1e1].
std::vector<double> default_hbic_grid();

}  // namespace esreg
