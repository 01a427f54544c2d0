#include "esreg/loss.hpp"

#include <cmath>
#include <stdexcept>

#include "esreg/errors.hpp"

namespace esreg {
namespace {

void check_h(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("loss scale h must be positive and finite");
}

void check_weights(const Dataset& data, const PropensityWeights& weights) {
  if (weights.probs.size() != data.n_rows())
    throw std::invalid_argument("weight vector length does not match the dataset");
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    if (data.is_complete(i) && !(weights.probs(i) > 0.0))
      throw std::invalid_argument("completeness probability must be positive on complete rows");
  }
}

}  // namespace

double exp_sq_loss(double residual, double h) {
  check_h(h);
  if (!std::isfinite(residual)) throw std::invalid_argument("residual is not finite");
  return 1.0 - std::exp(-(residual * residual) / h);
}

double exp_sq_loss_grad(double residual, double h) {
  check_h(h);
  if (!std::isfinite(residual)) throw std::invalid_argument("residual is not finite");
  return (2.0 * residual / h) * std::exp(-(residual * residual) / h);
}

double orthogonal_residual(double y, const Eigen::VectorXd& t_row,
                           const Coefficients& omega) {
  if (t_row.size() != omega.size())
    throw std::invalid_argument("row and coefficient dimensions differ");
  return (y - t_row.dot(omega)) / std::sqrt(1.0 + omega.squaredNorm());
}

namespace detail {

CompleteView CompleteView::from(const Dataset& data, const PropensityWeights& w) {
  const Eigen::Index m = data.complete_count();
  if (m < 1) throw DataError("no complete rows to fit on");
  CompleteView v;
  v.design.resize(m, data.n_cols());
  v.response.resize(m);
  v.weights.resize(m);
  Eigen::Index out = 0;
  for (Eigen::Index i = 0; i < data.n_rows(); ++i) {
    if (!data.is_complete(i)) continue;
    v.design.row(out) = data.design().row(i);
    v.response(out) = data.responses()(i);
    v.weights(out) = 1.0 / w.probs(i);
    ++out;
  }
  return v;
}

double view_objective(const CompleteView& v, const Coefficients& omega, double h,
                      bool orthogonal) {
  const Eigen::VectorXd e = v.response - v.design * omega;
  const double denom = orthogonal ? std::sqrt(1.0 + omega.squaredNorm()) : 1.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double r = e(i) / denom;
    total += v.weights(i) * (1.0 - std::exp(-(r * r) / h));
  }
  return total;
}

Eigen::VectorXd view_gradient(const CompleteView& v, const Coefficients& omega,
                              double h, bool orthogonal) {
  const Eigen::VectorXd e = v.response - v.design * omega;
  if (!orthogonal) {
    // d/dw sum w_i L(e_i) = -T' c with c_i = w_i L'(e_i).
    Eigen::VectorXd c(e.size());
    for (Eigen::Index i = 0; i < e.size(); ++i) {
      const double r = e(i);
      c(i) = v.weights(i) * (2.0 * r / h) * std::exp(-(r * r) / h);
    }
    return -(v.design.transpose() * c);
  }
  // r_i = e_i / s with s = sqrt(1 + |omega|^2); the coefficient also enters
  // through s, contributing -(sum_i c_i r_i) / s^2 * omega.
  const double s2 = 1.0 + omega.squaredNorm();
  const double s = std::sqrt(s2);
  Eigen::VectorXd c(e.size());
  double r_weighted = 0.0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    const double r = e(i) / s;
    const double g = v.weights(i) * (2.0 * r / h) * std::exp(-(r * r) / h);
    c(i) = g;
    r_weighted += g * r;
  }
  Eigen::VectorXd grad = -(v.design.transpose() * c) / s;
  grad -= (r_weighted / s2) * omega;
  return grad;
}

}  // namespace detail

double weighted_objective(const Dataset& data, const Coefficients& omega,
                          const FitConfig& cfg, const PropensityWeights& weights) {
  check_h(cfg.h);
  if (omega.size() != data.n_cols())
    throw std::invalid_argument("coefficient length does not match the design");
  if (!omega.allFinite()) throw std::invalid_argument("coefficients must be finite");
  check_weights(data, weights);
  const auto v = detail::CompleteView::from(data, weights);
  return detail::view_objective(v, omega, cfg.h, uses_orthogonal_residual(cfg.condition));
}

Coefficients objective_gradient(const Dataset& data, const Coefficients& omega,
                                const FitConfig& cfg,
                                const PropensityWeights& weights) {
  check_h(cfg.h);
  if (omega.size() != data.n_cols())
    throw std::invalid_argument("coefficient length does not match the design");
  if (!omega.allFinite()) throw std::invalid_argument("coefficients must be finite");
  check_weights(data, weights);
  const auto v = detail::CompleteView::from(data, weights);
  return detail::view_gradient(v, omega, cfg.h, uses_orthogonal_residual(cfg.condition));
}

}  // namespace esreg
