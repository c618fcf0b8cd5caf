#pragma once

// Cosine-Fourier coefficients c_k = (2/T) int_0^T gamma(t) cos(k pi t / T) dt.

#include <iosfwd>
#include <string>
#include <vector>

#include "specgauss/exec.hpp"
#include "specgauss/gamma.hpp"

namespace specgauss {

enum class CoeffMethod { ClosedForm, Quadrature, SecondDerivative, Oracle };

const char* to_string(CoeffMethod method) noexcept;

struct CosineSeries {
  double horizon = 1.0;
  int k_max = 0;
  std::vector<double> values;        // c_0 .. c_{k_max}
  std::vector<double> error_bounds;  // same indexing, nonnegative
  CoeffMethod method = CoeffMethod::Quadrature;
  std::string source_label;
  int expected_sign = 0;  // sign of c_k for k >= 1 when the source is admissible, 0 if unknown
  bool has_c0 = true;

  double operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
};

/// Quadrature for every k in [0, k_max]. Power terms of the spec are integrated
/// per half period of the cosine (Gauss-Jacobi on the singular first half
/// period, Gauss-Legendre elsewhere) and shared across k through prefix sums;
/// the remainder uses adaptive Gauss-Kronrod on per-half-period panels.
CosineSeries coeffs_quadrature(const GammaSpec& spec, int k_max, double tol,
                               Exec exec = Exec::Parallel);

enum class ClosedModel { Brownian, GeneralizedOU };

struct ClosedParams {
  double theta = 0.0;
  double sigma = 0.0;
};

/// Closed-form coefficients on the doubled interval (0, 2T):
///   Brownian  gamma(t) = -t:                    (1 - (-1)^k) (2/(k pi))^2 T
///   GeneralizedOU    gamma(t) = (sigma^2/theta) e^{-theta t}
/// horizon of the result is 2T.
CosineSeries coeffs_closed(ClosedModel model, const ClosedParams& params, double T, int k_max);

/// Maps c(-gamma'') to c(f) = (T/(k pi))^2 c_k(-gamma''), k >= 1. The result
/// has no c_0 entry.
CosineSeries second_derivative_transform(const CosineSeries& second_deriv_series, double T);

struct OracleResult {
  double value = 0.0;
  bool converged = false;
  int refinements = 0;
};

/// Independent brute-force value of c_k: composite trapezoid on a mesh graded
/// towards 0 (t = a s^q) plus a uniform mesh on [a, T], with Richardson
/// extrapolation, doubling until the relative change is below 1e-10.
OracleResult oracle_coeff(const GammaSpec& spec, double T, int k, int refine_limit);

/// Least-squares slope of log|c_k| against log k over [k_lo, k_hi], skipping
/// exact zeros and entries within their own error bound.
double decay_fit(const CosineSeries& series, int k_lo, int k_hi);

/// sum_{k>N} |c_k|: explicit entries up to k_max plus a power-law tail fitted on
/// [k_max/8, k_max], slope clamped to [-3, -1], with safety factor 2.
double tail_sum(const CosineSeries& series, long long N);

/// CSV with header `k,c_k,err_bound`.
void write_series_csv(std::ostream& os, const CosineSeries& series);

}  // namespace specgauss
