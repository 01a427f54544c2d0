#pragma once

#include <string>

#include "esreg/loss.hpp"

namespace esreg {

enum class PenaltyFamily { Lasso, Scad, Mcp, Atan };

std::string to_string(PenaltyFamily family);
PenaltyFamily penalty_from_string(const std::string& s);

struct PenaltySpec {
  PenaltyFamily family = PenaltyFamily::Atan;
  double f = 0.0;          // overall penalty level (>= 0)
  double u = 0.005;        // atan shape: smaller = closer to a hard threshold
  double a_scad = 3.7;
  double gamma_mcp = 3.0;

  void validate() const;
  PenaltySpec with_f(double level) const;
};

// p(x): even, p(0) = 0, nondecreasing in |x|.
double penalty_value(const PenaltySpec& spec, double x);

// p'(x) for x != 0 (throws at exactly zero; use the one-sided limit below).
double penalty_derivative(const PenaltySpec& spec, double x);

// lim_{t -> 0+} p'(t); the activation threshold for coefficients at zero.
double penalty_derivative_zero_limit(const PenaltySpec& spec);

// sum_k p(omega_k).
double penalty_total(const PenaltySpec& spec, const Coefficients& omega);

}  // namespace esreg
