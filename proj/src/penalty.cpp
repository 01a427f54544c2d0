#include "esreg/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace esreg {

std::string to_string(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::Lasso: return "lasso";
    case PenaltyFamily::Scad: return "scad";
    case PenaltyFamily::Mcp: return "mcp";
    case PenaltyFamily::Atan: return "atan";
  }
  throw std::invalid_argument("unknown penalty family");
}

PenaltyFamily penalty_from_string(const std::string& s) {
  if (s == "lasso") return PenaltyFamily::Lasso;
  if (s == "scad") return PenaltyFamily::Scad;
  if (s == "mcp") return PenaltyFamily::Mcp;
  if (s == "atan") return PenaltyFamily::Atan;
  throw std::invalid_argument("unknown penalty family '" + s +
                              "' (expected lasso, scad, mcp or atan)");
}

void PenaltySpec::validate() const {
  if (!(f >= 0.0) || !std::isfinite(f))
    throw std::invalid_argument("penalty level must be nonnegative and finite");
  if (!(u > 0.0)) throw std::invalid_argument("atan shape must be positive");
  if (!(a_scad > 2.0)) throw std::invalid_argument("scad shape must exceed 2");
  if (!(gamma_mcp > 0.0)) throw std::invalid_argument("mcp shape must be positive");
}

PenaltySpec PenaltySpec::with_f(double level) const {
  PenaltySpec out = *this;
  out.f = level;
  return out;
}

namespace {
constexpr double kTwoOverPi = 0.63661977236758134308;  // 2 / pi
}

double penalty_value(const PenaltySpec& spec, double x) {
  spec.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("penalty argument is not finite");
  const double t = std::fabs(x);
  const double f = spec.f;
  switch (spec.family) {
    case PenaltyFamily::Lasso:
      return f * t;
    case PenaltyFamily::Scad: {
      const double a = spec.a_scad;
      if (t <= f) return f * t;
      if (t <= a * f) return (2.0 * a * f * t - t * t - f * f) / (2.0 * (a - 1.0));
      return (a + 1.0) * f * f / 2.0;
    }
    case PenaltyFamily::Mcp: {
      const double g = spec.gamma_mcp;
      if (t <= g * f) return f * t - t * t / (2.0 * g);
      return g * f * f / 2.0;
    }
    case PenaltyFamily::Atan:
      return f * (spec.u + kTwoOverPi) * std::atan(t / spec.u);
  }
  throw std::invalid_argument("unknown penalty family");
}

double penalty_derivative(const PenaltySpec& spec, double x) {
  spec.validate();
  if (!std::isfinite(x)) throw std::invalid_argument("penalty argument is not finite");
  if (x == 0.0)
    throw std::invalid_argument("penalty derivative is undefined at zero; use the one-sided limit");
  const double t = std::fabs(x);
  const double sign = x > 0.0 ? 1.0 : -1.0;
  const double f = spec.f;
  switch (spec.family) {
    case PenaltyFamily::Lasso:
      return sign * f;
    case PenaltyFamily::Scad: {
      const double a = spec.a_scad;
      if (t <= f) return sign * f;
      if (t <= a * f) return sign * (a * f - t) / (a - 1.0);
      return 0.0;
    }
    case PenaltyFamily::Mcp: {
      const double g = spec.gamma_mcp;
      if (t <= g * f) return sign * (f - t / g);
      return 0.0;
    }
    case PenaltyFamily::Atan: {
      const double u = spec.u;
      return sign * f * (u + kTwoOverPi) * u / (u * u + t * t);
    }
  }
  throw std::invalid_argument("unknown penalty family");
}

double penalty_derivative_zero_limit(const PenaltySpec& spec) {
  spec.validate();
  switch (spec.family) {
    case PenaltyFamily::Lasso:
    case PenaltyFamily::Scad:
    case PenaltyFamily::Mcp:
      return spec.f;
    case PenaltyFamily::Atan:
      return spec.f * (spec.u + kTwoOverPi) / spec.u;
  }
  throw std::invalid_argument("unknown penalty family");
}

double penalty_total(const PenaltySpec& spec, const Coefficients& omega) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < omega.size(); ++k) total += penalty_value(spec, omega(k));
  return total;
}

}  // namespace esreg
