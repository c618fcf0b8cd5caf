#pragma once

// Internal quadrature rules shared by the coefficient kernels.

#include <array>
#include <cmath>
#include <vector>

namespace specgauss::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre on [-1, 1].
Rule gauss_legendre(int n);

/// n-point Gauss rule for the weight (1+x)^beta on [-1, 1], beta > -1.
Rule gauss_jacobi_left(int n, double beta);

struct Estimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// 15-point Kronrod rule with the embedded 7-point Gauss estimate.
template <class F>
Estimate gauss_kronrod15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {kronrod * half, std::abs((kronrod - gauss) * half), true};
}

/// Recursive bisection until each piece meets its share of `abs_tol`.
template <class F>
Estimate adaptive_gk15(F&& f, double a, double b, double abs_tol, int max_depth = 48) {
  const Estimate whole = gauss_kronrod15(f, a, b);
  if (whole.error <= abs_tol || max_depth == 0) {
    Estimate out = whole;
    out.converged = whole.error <= abs_tol;
    return out;
  }
  const double mid = 0.5 * (a + b);
  const Estimate left = adaptive_gk15(f, a, mid, 0.5 * abs_tol, max_depth - 1);
  const Estimate right = adaptive_gk15(f, mid, b, 0.5 * abs_tol, max_depth - 1);
  return {left.value + right.value, left.error + right.error, left.converged && right.converged};
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace specgauss::quad
