#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "esreg/dataset.hpp"

namespace esreg {

enum class KernelFamily { GaussianProduct };

struct KernelSpec {
  int dimension = 1;  // length of the conditioning vector
  KernelFamily family = KernelFamily::GaussianProduct;
};

// Estimated per-row completeness probabilities.
struct PropensityWeights {
  Eigen::VectorXd probs;     // length n, each in [clip_floor, 1]
  double bandwidth = 1.0;
  double clip_floor = 0.05;
  int clipped_count = 0;     // rows whose estimate was raised to the floor

  static PropensityWeights unit(Eigen::Index n);
};

// Product Gaussian kernel (2*pi)^(-dim/2) * exp(-|u|^2 / 2).
double gaussian_product_kernel(const Eigen::VectorXd& u);

// Plug-in bandwidth sigma * n^(-1/(m+2)) for an m+1 dimensional
// conditioning vector made of the response plus m covariates.
double bandwidth_rule(double sigma, long n, int m);

// Kernel-ratio completeness estimate on raw conditioning rows s (n x q)
// with flags f: prob_i = sum_j f_j K((s_i-s_j)/l) / sum_j K((s_i-s_j)/l),
// clipped from below. The row's own term is always included, so the
// denominator is strictly positive.
PropensityWeights nw_weights(const Eigen::MatrixXd& s,
                             const std::vector<std::uint8_t>& flags,
                             double l, double clip_floor);

// Conditioning vector for row i: (response_i, always-observed covariates).
// Each coordinate is standardized to unit sample deviation before the
// kernel ratio is evaluated with bandwidth l.
PropensityWeights estimate_propensity(const Dataset& data, const KernelSpec& spec,
                                      double l, double clip_floor);

// Same, with the bandwidth chosen by the plug-in rule on the standardized
// coordinates (sigma = 1).
PropensityWeights estimate_propensity(const Dataset& data, double clip_floor = 0.05);

// The bandwidth the convenience overload above uses.
double default_bandwidth(const Dataset& data);

}  // namespace esreg
