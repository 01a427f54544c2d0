#include "esreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "esreg/errors.hpp"
#include "esreg/loss.hpp"

namespace esreg {
namespace {

constexpr int kMaxBacktracks = 30;

// Step direction: data-fit gradient everywhere, plus the penalty slope on
// the currently nonzero coordinates. The penalty is not differentiable at
// zero; zero coordinates feel the raw data-fit pull and the hard-threshold
// sweep decides whether they activate.
Eigen::VectorXd step_direction(const Eigen::VectorXd& smooth,
                               const Coefficients& omega,
                               const PenaltySpec& pen) {
  Eigen::VectorXd g = smooth;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (omega(k) != 0.0) g(k) += penalty_derivative(pen, omega(k));
  }
  return g;
}

// Stage h values, largest first, ending exactly at the target. When the
// squared response scale already sits below the target (or annealing is
// off) this is just {target}.
std::vector<double> anneal_schedule(const detail::CompleteView& view,
                                    const FitConfig& cfg) {
  std::vector<double> stages;
  if (cfg.optimizer.anneal) {
    const double y2 = view.response.squaredNorm() /
                      static_cast<double>(view.response.size());
    double h0 = 2.0 * y2;
    while (h0 > cfg.h && static_cast<int>(stages.size()) < 64) {
      stages.push_back(h0);
      h0 /= cfg.optimizer.anneal_factor;
    }
  }
  stages.push_back(cfg.h);
  return stages;
}

struct StageOutcome {
  int iterations = 0;
  bool grad_converged = false;  // stopped because the stationarity residual fell below tol
};

// Thresholded gradient descent at a fixed h. omega is updated in place.
StageOutcome run_stage(const detail::CompleteView& view, Coefficients& omega,
                       double h, bool orthogonal, const PenaltySpec& pen,
                       const OptimizerConfig& opt, int iter_cap, double thresh,
                       std::vector<double>* trace) {
  const auto n_c = static_cast<double>(view.response.size());
  StageOutcome out;

  double value = detail::view_objective(view, omega, h, orthogonal) +
                 penalty_total(pen, omega);
  if (!std::isfinite(value))
    throw NumericError("non-finite objective at iteration " +
                       std::to_string(out.iterations));

  // The accepted step length is carried between iterations (doubling on
  // success, capped at the nominal size) so backtracking does not re-pay
  // the full halving cascade every iteration.
  double hint = opt.step_size;
  while (out.iterations < iter_cap) {
    const Eigen::VectorXd smooth =
        detail::view_gradient(view, omega, h, orthogonal);
    if (!smooth.allFinite())
      throw NumericError("non-finite gradient at iteration " +
                         std::to_string(out.iterations));
    const Eigen::VectorXd dir = step_direction(smooth, omega, pen);

    // First-order stationarity, per complete row: the composite slope on
    // active coordinates; a zero coordinate counts only when its pull is
    // strong enough to survive the hard threshold at the nominal step
    // (|smooth_k| >= f).
    double stat2 = 0.0;
    for (Eigen::Index k = 0; k < dir.size(); ++k) {
      if (omega(k) != 0.0) {
        stat2 += dir(k) * dir(k);
      } else if (std::fabs(smooth(k)) >= pen.f) {
        stat2 += smooth(k) * smooth(k);
      }
    }
    if (std::sqrt(stat2) / n_c <= opt.grad_tol) {
      out.grad_converged = true;
      break;
    }

    // Backtracking: halve the step until the thresholded candidate does
    // not increase the penalized objective. The hard threshold uses the
    // nominal step size regardless of halving.
    double step = hint;
    bool accepted = false;
    Coefficients candidate;
    double cand_value = 0.0;
    for (int bt = 0; bt <= kMaxBacktracks; ++bt) {
      candidate = omega - step * dir;
      for (Eigen::Index k = 0; k < candidate.size(); ++k) {
        if (std::fabs(candidate(k)) < thresh) candidate(k) = 0.0;
      }
      cand_value = detail::view_objective(view, candidate, h, orthogonal) +
                   penalty_total(pen, candidate);
      if (std::isfinite(cand_value) && cand_value <= value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent direction left at this resolution
    hint = std::min(opt.step_size, step * 2.0);

    const bool unchanged = (candidate.array() == omega.array()).all();
    omega = candidate;
    value = cand_value;
    ++out.iterations;
    if (trace) trace->push_back(value);
    if (unchanged) break;  // exact fixed point
  }
  return out;
}

}  // namespace

EstimateResult fit_penalized(const Dataset& data, const PropensityWeights& weights,
                             const PenaltySpec& pen, const FitConfig& cfg) {
  return fit_penalized(data, weights, pen, cfg,
                       Coefficients::Zero(data.n_cols()));
}

EstimateResult fit_penalized(const Dataset& data, const PropensityWeights& weights,
                             const PenaltySpec& pen, const FitConfig& cfg,
                             const Coefficients& init) {
  cfg.validate();
  pen.validate();
  if (data.n_rows() < 2)
    throw std::invalid_argument("estimation needs at least two rows");
  if (weights.probs.size() != data.n_rows())
    throw std::invalid_argument("weight vector length does not match the dataset");
  if (init.size() != data.n_cols())
    throw std::invalid_argument("initial coefficient length does not match the dataset");
  if (!init.allFinite())
    throw std::invalid_argument("initial coefficients must be finite");

  const auto view = detail::CompleteView::from(data, weights);
  const bool orthogonal = uses_orthogonal_residual(cfg.condition);
  const auto d = data.n_cols();

  EstimateResult res;
  res.seed = cfg.seed;
  res.f_selected = pen.f;

  // Constant columns cannot be identified; they are fit anyway but flagged.
  for (Eigen::Index j = 0; j < d; ++j) {
    const double first = view.design(0, j);
    if ((view.design.col(j).array() == first).all() && view.design.rows() > 1)
      res.zero_variance_columns.push_back(static_cast<int>(j));
  }

  const double thresh = cfg.optimizer.step_size * pen.f;
  Coefficients omega = init;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (std::fabs(omega(k)) < thresh) omega(k) = 0.0;
  }
  std::vector<double>* trace =
      cfg.optimizer.trace_objective ? &res.objective_trace : nullptr;

  std::vector<double> stages;
  if (omega.isZero(0.0)) {
    stages = anneal_schedule(view, cfg);
  } else {
    stages.push_back(cfg.h);
  }
  bool grad_converged = false;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const bool last = (s + 1 == stages.size());
    const int cap = last ? cfg.optimizer.max_iters
                         : std::min(cfg.optimizer.anneal_stage_iters,
                                    cfg.optimizer.max_iters);
    const auto outcome = run_stage(view, omega, stages[s], orthogonal, pen,
                                   cfg.optimizer, cap, thresh,
                                   last ? trace : nullptr);
    res.iterations += outcome.iterations;
    if (last) grad_converged = outcome.grad_converged;
  }

  res.omega_hat = omega;
  for (Eigen::Index k = 0; k < d; ++k) {
    if (omega(k) != 0.0) res.active_set.push_back(static_cast<int>(k));
  }
  res.objective = detail::view_objective(view, omega, cfg.h, orthogonal);
  res.perfect_fit = (res.objective == 0.0);

  // Convergence is judged on the active coordinates: zeros pinned by the
  // hard threshold are stationary points of the iteration by construction.
  Eigen::VectorXd g =
      step_direction(detail::view_gradient(view, omega, cfg.h, orthogonal),
                     omega, pen);
  g /= static_cast<double>(view.response.size());
  double active_norm2 = 0.0;
  for (int k : res.active_set) active_norm2 += g(k) * g(k);
  res.final_grad_norm = std::sqrt(active_norm2);
  res.converged = grad_converged || res.final_grad_norm <= cfg.optimizer.grad_tol;

  res.hbic = hbic(data, weights, res, cfg);
  return res;
}

double hbic(const Dataset& data, const PropensityWeights& weights,
            const EstimateResult& result, const FitConfig& cfg) {
  (void)weights;
  const auto n = static_cast<double>(data.n_rows());
  const auto d = static_cast<double>(data.n_cols());
  if (n < 2.0) throw std::invalid_argument("sample size must be at least two");
  const double obj = result.objective;
  if (!(obj >= 0.0))
    throw NumericError("data-fit term must be nonnegative for model scoring");
  const double size_term = static_cast<double>(result.active_set.size()) *
                           (std::log(std::log(n)) / n) * cfg.en_rule * std::log(d);
  if (obj == 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(std::max(obj, std::numeric_limits<double>::epsilon())) + size_term;
}

long selection_size_cap(Eigen::Index complete_rows) {
  const double nc = static_cast<double>(complete_rows);
  const double floor_arg = std::log(static_cast<double>(std::max<Eigen::Index>(complete_rows, 3)));
  return std::max(1L, static_cast<long>(std::floor(nc / floor_arg)));
}

EstimateResult select_f(const Dataset& data, const PropensityWeights& weights,
                        const PenaltySpec& family, const FitConfig& cfg) {
  cfg.validate();
  std::vector<double> grid = cfg.hbic_grid;
  std::sort(grid.begin(), grid.end());

  const long size_cap = selection_size_cap(data.complete_count());

  EstimateResult best;       // admissible winner
  bool have_best = false;
  EstimateResult fallback;   // unrestricted winner, used only if nothing is admissible
  bool have_fallback = false;
  std::vector<HbicTracePoint> trace;
  trace.reserve(grid.size());

  for (double f : grid) {
    EstimateResult res = fit_penalized(data, weights, family.with_f(f), cfg);
    const bool admissible = static_cast<long>(res.active_set.size()) <= size_cap;
    HbicTracePoint pt;
    pt.f = f;
    pt.hbic = res.hbic;
    pt.objective = res.objective;
    pt.active_size = static_cast<int>(res.active_set.size());
    pt.iterations = res.iterations;
    pt.converged = res.converged;
    pt.admissible = admissible;
    trace.push_back(pt);
    // Ascending sweep with a non-strict comparison: equal scores end up
    // at the largest penalty level.
    if (admissible && (!have_best || res.hbic <= best.hbic)) {
      best = res;
      have_best = true;
    }
    if (!have_fallback || res.hbic <= fallback.hbic) {
      fallback = std::move(res);
      have_fallback = true;
    }
  }
  EstimateResult out = have_best ? std::move(best) : std::move(fallback);
  out.hbic_trace = std::move(trace);
  return out;
}

}  // namespace esreg
