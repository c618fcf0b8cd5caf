#pragma once

// Covariance-generating functions and the admissibility check
// (increasing, concave, derivative singularity at most x^-delta).
//
// A GammaSpec describes gamma on (0, T]. Its `orientation` records which of
// gamma or -gamma is expected to be increasing and concave: +1 for the
// stationary-increment families (fBm, type A), -1 for the stationary and
// doubled-interval families (types B and C).

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace specgauss {

/// coef * t^exponent
struct PowerTerm {
  double coef;
  double exponent;
};

struct GammaSpec {
  std::function<double(double)> evaluate;
  std::function<double(double)> derivative;
  double delta = 0.0;  // singularity exponent: x^delta gamma'(x) bounded near 0
  double horizon = 1.0;
  std::string label;
  std::optional<double> gamma_at_zero;  // finite limit at 0+, set when delta < 1
  int orientation = +1;

  // Optional split gamma = sum(power_terms) + remainder. Coefficient
  // quadrature integrates the power terms semi-analytically; an empty
  // remainder means it is identically zero.
  std::vector<PowerTerm> power_terms;
  std::function<double(double)> remainder;

  double operator()(double t) const { return evaluate(t); }
};

enum class GammaKind { Power2H, NegPower, MinusAbs, ExpDecay, Linear, StretchedExp };

struct GammaParams {
  double hurst = 0.0;
  double theta = 0.0;
  double sigma = 0.0;
};

/// Builtin generators:
///   Power2H       t^{2H},                 H in (0, 1/2), delta = 1 - 2H
///   NegPower      -2H(2H-1) t^{2H-2},     H in (1/2, 1), delta = 3 - 2H
///   MinusAbs      -t,                     delta = 0, orientation -1
///   ExpDecay      (sigma^2/theta) e^{-theta t}, theta > 0, orientation -1
///   Linear        t,                      delta = 0
///   StretchedExp  e^{-t^{2H}} (stationary fOU), H in (0, 1/2), orientation -1
GammaSpec builtin_gamma(GammaKind kind, const GammaParams& params, double horizon);

/// gamma(t) = sum_i coef_i t^{exponent_i}; derivative and gamma(0) derived from
/// the terms. delta and orientation are taken as given.
GammaSpec power_sum_gamma(std::vector<PowerTerm> terms, double horizon, double delta,
                          int orientation, std::string label);

struct AdmissibilityReport {
  bool passed = false;
  double max_derivative_violation = 0.0;
  double max_concavity_violation = 0.0;
  double singular_bound_estimate = 0.0;
  bool singular_bounded = false;
  int grid_size = 0;
};

/// Checks admissibility of orientation * gamma on a grid that is geometric (ratio 2)
/// from T down to T 2^-40 and uniform with `grid_size` points on [T/2, T].
/// Concavity is checked as monotone decrease of the derivative on that grid.
AdmissibilityReport check_admissible(const GammaSpec& spec, int grid_size, double tol);

}  // namespace specgauss
