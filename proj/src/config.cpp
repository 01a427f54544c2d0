#include "esreg/config.hpp"

#include <cmath>
#include <stdexcept>

namespace esreg {

bool uses_orthogonal_residual(Condition c) {
  return c == Condition::FullCorrection || c == Condition::ErrorOnly;
}

bool uses_ipw(Condition c) {
  return c == Condition::FullCorrection || c == Condition::MissingOnly;
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::FullCorrection: return "full";
    case Condition::ErrorOnly: return "error_only";
    case Condition::MissingOnly: return "missing_only";
    case Condition::NoCorrection: return "none";
  }
  throw std::invalid_argument("unknown condition");
}

Condition condition_from_string(const std::string& s) {
  if (s == "full") return Condition::FullCorrection;
  if (s == "error_only") return Condition::ErrorOnly;
  if (s == "missing_only") return Condition::MissingOnly;
  if (s == "none") return Condition::NoCorrection;
  throw std::invalid_argument("unknown condition '" + s +
                              "' (expected full, error_only, missing_only or none)");
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
  if (!(anneal_factor > 1.0)) throw std::invalid_argument("anneal_factor must exceed 1");
  if (anneal_stage_iters < 1) throw std::invalid_argument("anneal_stage_iters must be at least 1");
}

FitConfig::FitConfig() : hbic_grid(default_hbic_grid()) {}

void FitConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be positive and finite");
  if (!(atan_u > 0.0)) throw std::invalid_argument("atan_u must be positive");
  if (!(en_rule > 0.0)) throw std::invalid_argument("en_rule must be positive");
  if (hbic_grid.empty()) throw std::invalid_argument("hbic_grid must be nonempty");
  for (double f : hbic_grid) {
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("hbic_grid values must be positive and finite");
  }
  optimizer.validate();
}

std::vector<double> default_hbic_grid() {
  constexpr int kSize = 30;
  const double lo = std::log(1e-3);
  const double hi = std::log(1e1);
  std::vector<double> grid(kSize);
  for (int i = 0; i < kSize; ++i) {
    grid[static_cast<std::size_t>(i)] =
        std::exp(lo + (hi - lo) * static_cast<double>(i) / (kSize - 1));
  }
  return grid;
}

}  // namespace esreg
