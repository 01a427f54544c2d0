#pragma once

#include <cstdint>
#include <vector>

#include "esreg/penalty.hpp"

namespace esreg {

struct HbicTracePoint {
  double f = 0.0;
  double hbic = 0.0;
  double objective = 0.0;
  int active_size = 0;
  int iterations = 0;
  bool converged = false;
  bool admissible = true;  // eligible for the selection comparison
};

struct EstimateResult {
  Coefficients omega_hat;
  std::vector<int> active_set;  // 0-based indices of nonzero coefficients
  double objective = 0.0;       // weighted data-fit term at omega_hat
  double hbic = 0.0;
  double f_selected = 0.0;
  int iterations = 0;           // accepted iterations, all stages combined
  bool converged = false;
  double final_grad_norm = 0.0;  // composite gradient norm on the active set
  bool perfect_fit = false;      // objective hit exactly zero
  std::int64_t seed = 0;
  std::vector<int> zero_variance_columns;  // constant over complete rows
  std::vector<HbicTracePoint> hbic_trace;  // one entry per grid value
  std::vector<double> objective_trace;     // per accepted iteration (optional)
};

// Minimizes weighted_objective + sum_k p(omega_k) by thresholded gradient
// descent from the origin, with backtracking line search and graduated
// smoothing of h (see OptimizerConfig::anneal).
EstimateResult fit_penalized(const Dataset& data, const PropensityWeights& weights,
                             const PenaltySpec& pen, const FitConfig& cfg);

// Same minimization started from a caller-supplied point instead of the
// origin. Graduated smoothing is skipped when init has nonzero support:
// smoothing exists to escape the origin, where a small h leaves every
// residual saturated and the gradient numerically dead; a warm start has
// informative residuals by construction. Components of init below the
// hard threshold are zeroed before the first iteration.
EstimateResult fit_penalized(const Dataset& data, const PropensityWeights& weights,
                             const PenaltySpec& pen, const FitConfig& cfg,
                             const Coefficients& init);

// log(data-fit term) + |active| * (log(log n) / n) * en_rule * log(d).
// A perfect fit (objective exactly zero) maps to -infinity; the data-fit
// term is clamped to machine epsilon before the log otherwise.
double hbic(const Dataset& data, const PropensityWeights& weights,
            const EstimateResult& result, const FitConfig& cfg);

// Largest active set the model-score comparison in select_f will consider:
// floor(n_c / log(n_c)) nonzero coefficients, where n_c is the number of
// complete rows (the rows the objective actually uses). When the active set
// can approach n_c, small penalty levels produce interpolating fits whose
// data-fit term collapses toward zero, so their log always wins the score
// comparison no matter how overfit they are; the classical remedy is to
// restrict the comparison to models well below the interpolation size.
long selection_size_cap(Eigen::Index complete_rows);

// Fits one model per cfg.hbic_grid value and returns the admissible fit
// (active set within selection_size_cap) with minimal hbic; exact ties go
// to the larger penalty level. If no grid value yields an admissible fit,
// the unrestricted minimum is returned. The winner carries the full grid
// trace, each point flagged with its admissibility.
EstimateResult select_f(const Dataset& data, const PropensityWeights& weights,
                        const PenaltySpec& family, const FitConfig& cfg);

}  // namespace esreg
