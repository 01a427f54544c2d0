#include "esreg/propensity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "esreg/errors.hpp"

namespace esreg {

PropensityWeights PropensityWeights::unit(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("weight vector length must be positive");
  PropensityWeights w;
  w.probs = Eigen::VectorXd::Ones(n);
  w.bandwidth = 1.0;
  w.clip_floor = 0.0;
  w.clipped_count = 0;
  return w;
}

double gaussian_product_kernel(const Eigen::VectorXd& u) {
  const Eigen::Index q = u.size();
  if (q < 1) throw std::invalid_argument("kernel argument must be nonempty");
  for (Eigen::Index k = 0; k < q; ++k) {
    if (!std::isfinite(u(k))) throw std::invalid_argument("kernel argument is not finite");
  }
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::pow(kTwoPi, -0.5 * static_cast<double>(q)) *
         std::exp(-0.5 * u.squaredNorm());
}

double bandwidth_rule(double sigma, long n, int m) {
  if (!(sigma > 0.0)) throw std::invalid_argument("bandwidth scale must be positive");
  if (n < 1) throw std::invalid_argument("sample size must be positive");
  if (m < 0) throw std::invalid_argument("covariate count must be nonnegative");
  return sigma * std::pow(static_cast<double>(n), -1.0 / static_cast<double>(m + 2));
}

PropensityWeights nw_weights(const Eigen::MatrixXd& s,
                             const std::vector<std::uint8_t>& flags, double l,
                             double clip_floor) {
  const Eigen::Index n = s.rows();
  if (n < 1) throw std::invalid_argument("conditioning matrix must have rows");
  if (static_cast<Eigen::Index>(flags.size()) != n)
    throw std::invalid_argument("flag length does not match conditioning rows");
  if (!(l > 0.0) || !std::isfinite(l)) throw std::invalid_argument("bandwidth must be positive and finite");
  if (!(clip_floor > 0.0) || !(clip_floor < 1.0))
    throw std::invalid_argument("clip floor must lie strictly between 0 and 1");
  if (!s.allFinite()) throw std::invalid_argument("conditioning matrix has non-finite entries");

  bool any_complete = false;
  for (auto f : flags) any_complete = any_complete || (f != 0);
  if (!any_complete) throw DataError("cannot estimate completeness probabilities: no complete rows");

  // The (2 pi)^(-q/2) normalization cancels between numerator and
  // denominator, so only the exponentials matter. Exponents are shifted by
  // the row maximum; the self term (distance zero) attains it, keeping the
  // denominator >= 1 with no underflow risk.
  PropensityWeights out;
  out.probs = Eigen::VectorXd::Zero(n);
  out.bandwidth = l;
  out.clip_floor = clip_floor;
  out.clipped_count = 0;

  Eigen::VectorXd expo(n);
  const double inv2l2 = 0.5 / (l * l);
  for (Eigen::Index i = 0; i < n; ++i) {
    double emax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double dist2 = (s.row(i) - s.row(j)).squaredNorm();
      expo(j) = -dist2 * inv2l2;
      if (expo(j) > emax) emax = expo(j);
    }
    double num = 0.0, den = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double k = std::exp(expo(j) - emax);
      den += k;
      if (flags[static_cast<std::size_t>(j)] != 0) num += k;
    }
    double p = num / den;
    if (p > 1.0) p = 1.0;
    if (p < clip_floor) {
      p = clip_floor;
      ++out.clipped_count;
    }
    out.probs(i) = p;
  }
  return out;
}

namespace {

// Conditioning rows: response first, then the always-observed covariates.
Eigen::MatrixXd conditioning_matrix(const Dataset& data) {
  const Eigen::Index n = data.n_rows();
  const auto& obs = data.observed_block();
  Eigen::MatrixXd s(n, 1 + static_cast<Eigen::Index>(obs.size()));
  s.col(0) = data.responses();
  for (std::size_t k = 0; k < obs.size(); ++k) {
    s.col(1 + static_cast<Eigen::Index>(k)) = data.design().col(obs[k]);
  }
  return s;
}

// Center and scale each column to unit sample standard deviation; a
// constant column keeps scale one (all its pairwise differences are zero,
// so the kernel value is unaffected).
void standardize_columns(Eigen::MatrixXd& s) {
  const auto n = static_cast<double>(s.rows());
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    const double mean = s.col(j).mean();
    s.col(j).array() -= mean;
    if (s.rows() > 1) {
      const double var = s.col(j).squaredNorm() / (n - 1.0);
      const double sd = std::sqrt(var);
      if (sd > 0.0) s.col(j) /= sd;
    }
  }
}

}  // namespace

PropensityWeights estimate_propensity(const Dataset& data, const KernelSpec& spec,
                                      double l, double clip_floor) {
  Eigen::MatrixXd s = conditioning_matrix(data);
  if (spec.dimension != static_cast<int>(s.cols()))
    throw std::invalid_argument("kernel dimension does not match the conditioning vector");
  if (spec.family != KernelFamily::GaussianProduct)
    throw std::invalid_argument("unsupported kernel family");
  standardize_columns(s);
  return nw_weights(s, data.complete_flags(), l, clip_floor);
}

double default_bandwidth(const Dataset& data) {
  const auto m = static_cast<int>(data.observed_block().size());
  return bandwidth_rule(1.0, static_cast<long>(data.n_rows()), m);
}

PropensityWeights estimate_propensity(const Dataset& data, double clip_floor) {
  KernelSpec spec;
  spec.dimension = 1 + static_cast<int>(data.observed_block().size());
  return estimate_propensity(data, spec, default_bandwidth(data), clip_floor);
}

}  // namespace esreg
