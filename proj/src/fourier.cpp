#include "specgauss/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "quadrature.hpp"
#include "specgauss/error.hpp"
#include "specgauss/io.hpp"

namespace specgauss {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Prefix integrals P(k) = int_0^{k pi} u^beta w(u) du for k = 0..k_max, where
// w is cos (odd = false) or sin (odd = true), with a per-entry error bound.
struct PrefixIntegrals {
  std::vector<double> value;
  std::vector<double> error;
};

PrefixIntegrals half_period_prefix(double beta, bool use_sin, int k_max) {
  PrefixIntegrals out;
  out.value.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  out.error.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  if (k_max == 0) return out;

  // First half period: weight u^beta on [0, pi]; u = pi (1 + x) / 2.
  auto first = [&](int n) {
    const quad::Rule rule = quad::gauss_jacobi_left(n, beta);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = 0.5 * kPi * (1.0 + rule.nodes[i]);
      sum += rule.weights[i] * (use_sin ? std::sin(u) : std::cos(u));
    }
    return std::pow(0.5 * kPi, beta + 1.0) * sum;
  };
  const double first_hi = first(32);
  const double first_lo = first(24);

  // Later half periods: u = n pi + v, v in [0, pi]; w(u) = (-1)^n w(v).
  const quad::Rule hi = quad::gauss_legendre(24);
  const quad::Rule lo = quad::gauss_legendre(16);
  auto tabulate = [&](const quad::Rule& rule, std::vector<double>& v, std::vector<double>& w) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double vv = 0.5 * kPi * (1.0 + rule.nodes[i]);
      v.push_back(vv);
      w.push_back(0.5 * kPi * rule.weights[i] * (use_sin ? std::sin(vv) : std::cos(vv)));
    }
  };
  std::vector<double> v_hi, w_hi, v_lo, w_lo;
  tabulate(hi, v_hi, w_hi);
  tabulate(lo, v_lo, w_lo);

  quad::CompensatedSum running;
  double abs_total = 0.0, diff_total = 0.0;
  for (int n = 0; n < k_max; ++n) {
    double piece, diff;
    if (n == 0) {
      piece = first_hi;
      diff = std::abs(first_hi - first_lo);
    } else {
      const double base = n * kPi;
      double s_hi = 0.0, s_lo = 0.0;
      for (std::size_t i = 0; i < v_hi.size(); ++i) s_hi += w_hi[i] * std::pow(base + v_hi[i], beta);
      for (std::size_t i = 0; i < v_lo.size(); ++i) s_lo += w_lo[i] * std::pow(base + v_lo[i], beta);
      if (n % 2 == 1) {
        s_hi = -s_hi;
        s_lo = -s_lo;
      }
      piece = s_hi;
      diff = std::abs(s_hi - s_lo);
    }
    running.add(piece);
    abs_total += std::abs(piece);
    diff_total += diff;
    out.value[static_cast<std::size_t>(n) + 1] = running.value();
    out.error[static_cast<std::size_t>(n) + 1] = diff_total + 8.0 * kEps * abs_total;
  }
  return out;
}

// Adds (2/T) A int_0^T t^p cos(k pi t / T) dt for k = 0..k_max.
void add_power_term(const PowerTerm& term, double T, int k_max, std::vector<double>& values,
                    std::vector<double>& errors) {
  const double A = term.coef;
  const double p = term.exponent;
  if (!(p > -1.0)) throw Error(Errc::SingularityTooStrong, "power exponent must exceed -1");

  values[0] += 2.0 / T * A * std::pow(T, p + 1.0) / (p + 1.0);
  errors[0] += 4.0 * kEps * std::abs(values[0]);
  if (k_max == 0 || p == 0.0) return;  // constants are orthogonal to every harmonic

  // int_0^{k pi} u^p cos u du; for p > 0 integrate by parts first,
  // = -p int_0^{k pi} u^{p-1} sin u du, which trades growth for cancellation.
  const bool by_parts = p > 0.0;
  const PrefixIntegrals prefix = by_parts ? half_period_prefix(p - 1.0, true, k_max)
                                          : half_period_prefix(p, false, k_max);
  const double factor = by_parts ? -p : 1.0;
  for (int k = 1; k <= k_max; ++k) {
    const double scale = 2.0 / T * A * std::pow(T / (k * kPi), p + 1.0) * factor;
    values[static_cast<std::size_t>(k)] += scale * prefix.value[static_cast<std::size_t>(k)];
    errors[static_cast<std::size_t>(k)] += std::abs(scale) * prefix.error[static_cast<std::size_t>(k)];
  }
}

struct RemainderResult {
  double value;
  double error;
  bool converged;
};

RemainderResult remainder_coefficient(const std::function<double(double)>& r, double T, int k,
                                      double tol) {
  const double omega = k * kPi / T;
  const int panels = k == 0 ? 8 : k;
  const double width = T / panels;
  // Integral target: (2/T) * error <= tol  =>  error <= tol T / 2, split over panels.
  const double panel_tol = 0.25 * tol * T / panels;
  auto integrand = [&](double t) { return r(t) * std::cos(omega * t); };
  double value = 0.0, error = 0.0;
  bool converged = true;
  for (int n = 0; n < panels; ++n) {
    const double a = n * width;
    const double b = (n + 1 == panels) ? T : (n + 1) * width;
    const quad::Estimate piece = quad::adaptive_gk15(integrand, a, b, panel_tol);
    value += piece.value;
    error += piece.error;
    converged = converged && piece.converged;
  }
  return {2.0 / T * value, 2.0 / T * error, converged};
}

}  // namespace

const char* to_string(CoeffMethod method) noexcept {
  switch (method) {
    case CoeffMethod::ClosedForm: return "closed_form";
    case CoeffMethod::Quadrature: return "quadrature";
    case CoeffMethod::SecondDerivative: return "second_derivative";
    case CoeffMethod::Oracle: return "oracle";
  }
  return "unknown";
}

CosineSeries coeffs_quadrature(const GammaSpec& spec, int k_max, double tol, Exec exec) {
  if (!(spec.delta < 2.0))
    throw Error(Errc::SingularityTooStrong, "delta >= 2 makes the coefficients undefined");
  if (k_max < 1) throw Error(Errc::BadParameter, "coeffs_quadrature needs k_max >= 1");
  if (!(tol > 0.0)) throw Error(Errc::BadParameter, "coeffs_quadrature needs tol > 0");

  const double T = spec.horizon;
  const std::size_t count = static_cast<std::size_t>(k_max) + 1;
  CosineSeries series;
  series.horizon = T;
  series.k_max = k_max;
  series.values.assign(count, 0.0);
  series.error_bounds.assign(count, 0.0);
  series.method = CoeffMethod::Quadrature;
  series.source_label = spec.label;
  series.expected_sign = spec.orientation >= 0 ? -1 : +1;

  for (const PowerTerm& term : spec.power_terms)
    add_power_term(term, T, k_max, series.values, series.error_bounds);

  if (spec.power_terms.empty() && !spec.remainder) {
    // No decomposition available: treat all of gamma as the remainder.
    GammaSpec whole = spec;
    whole.remainder = spec.evaluate;
    return coeffs_quadrature(whole, k_max, tol, exec);
  }

  if (spec.remainder) {
    std::vector<RemainderResult> rem(count);
    const auto body = [&](long long k) {
      rem[static_cast<std::size_t>(k)] = remainder_coefficient(spec.remainder, T, static_cast<int>(k), tol);
    };
    const long long n = static_cast<long long>(count);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
      for (long long k = 0; k < n; ++k) body(k);
    } else {
      for (long long k = 0; k < n; ++k) body(k);
    }
    for (std::size_t k = 0; k < count; ++k) {
      series.values[k] += rem[k].value;
      series.error_bounds[k] += rem[k].error;
    }
  }

  for (std::size_t k = 0; k < count; ++k) {
    const double v = series.values[k];
    if (!std::isfinite(v))
      throw Error(Errc::NonFiniteEvaluation, spec.label + ": non-finite coefficient");
    if (series.error_bounds[k] > tol * std::max(1.0, std::abs(v)))
      throw Error(Errc::QuadratureNonConvergence,
                  spec.label + ": error estimate above tolerance at k=" + std::to_string(k));
  }
  return series;
}

CosineSeries coeffs_closed(ClosedModel model, const ClosedParams& params, double T, int k_max) {
  if (!(T > 0.0)) throw Error(Errc::BadParameter, "T must be positive");
  if (k_max < 1) throw Error(Errc::BadParameter, "k_max must be >= 1");

  const std::size_t count = static_cast<std::size_t>(k_max) + 1;
  CosineSeries series;
  series.horizon = 2.0 * T;
  series.k_max = k_max;
  series.values.assign(count, 0.0);
  series.error_bounds.assign(count, 0.0);
  series.method = CoeffMethod::ClosedForm;
  series.expected_sign = +1;

  switch (model) {
    case ClosedModel::Brownian: {
      series.source_label = "brownian";
      series.values[0] = -2.0 * T;  // (1/T) int_0^{2T} -t dt
      for (int k = 1; k <= k_max; ++k) {
        if (k % 2 == 0) continue;
        const double r = 2.0 / (k * kPi);
        series.values[static_cast<std::size_t>(k)] = 2.0 * r * r * T;
      }
      break;
    }
    case ClosedModel::GeneralizedOU: {
      const double theta = params.theta;
      if (!(theta > 0.0) || !std::isfinite(theta))
        throw Error(Errc::BadParameter, "generalized OU needs theta > 0");
      series.source_label = "generalized_ou";
      const double scale = params.sigma * params.sigma / theta;
      const double decay = std::exp(-2.0 * theta * T);
      series.values[0] = scale * (1.0 - decay) / (theta * T);
      for (int k = 1; k <= k_max; ++k) {
        const double x = k * kPi / (2.0 * theta * T);
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        series.values[static_cast<std::size_t>(k)] =
            scale / (1.0 + x * x) * (1.0 - sign * decay) / (theta * T);
      }
      break;
    }
  }
  return series;
}

CosineSeries second_derivative_transform(const CosineSeries& input, double T) {
  if (!(T > 0.0)) throw Error(Errc::BadParameter, "T must be positive");
  if (input.k_max < 1 || input.values.size() != static_cast<std::size_t>(input.k_max) + 1)
    throw Error(Errc::BadParameter, "second_derivative_transform needs entries k = 1..k_max");

  CosineSeries out = input;
  out.method = CoeffMethod::SecondDerivative;
  out.has_c0 = false;
  out.values[0] = 0.0;
  out.error_bounds[0] = 0.0;
  out.source_label = "from_second_derivative(" + input.source_label + ")";
  for (int k = 1; k <= input.k_max; ++k) {
    const double f = T / (k * kPi);
    out.values[static_cast<std::size_t>(k)] = f * f * input.values[static_cast<std::size_t>(k)];
    out.error_bounds[static_cast<std::size_t>(k)] = f * f * input.error_bounds[static_cast<std::size_t>(k)];
  }
  return out;
}

namespace {

// Trapezoid sums with Richardson extrapolation (Romberg), doubling the mesh.
template <class F>
OracleResult romberg(F&& f, double a, double b, int n0, int refine_limit, double scale_floor) {
  constexpr int kColumns = 6;
  std::vector<std::vector<double>> table;
  int n = n0;
  double h = (b - a) / n;
  double trap = 0.5 * (f(a) + f(b));
  for (int i = 1; i < n; ++i) trap += f(a + i * h);
  trap *= h;

  OracleResult result;
  table.push_back({trap});
  double previous = trap;
  for (int level = 1; level <= refine_limit; ++level) {
    double mid = 0.0;
    for (int i = 0; i < n; ++i) mid += f(a + (i + 0.5) * h);
    trap = 0.5 * trap + 0.5 * h * mid;
    n *= 2;
    h *= 0.5;
    std::vector<double> row{trap};
    double factor = 4.0;
    for (int j = 1; j <= std::min(level, kColumns); ++j) {
      const double prev = table.back()[static_cast<std::size_t>(j - 1)];
      row.push_back(row.back() + (row.back() - prev) / (factor - 1.0));
      factor *= 4.0;
    }
    table.push_back(row);
    const double best = row.back();
    result.value = best;
    result.refinements = level;
    if (level >= 2 && std::abs(best - previous) <= 1e-10 * std::max(std::abs(best), scale_floor)) {
      result.converged = true;
      return result;
    }
    previous = best;
  }
  return result;
}

}  // namespace

OracleResult oracle_coeff(const GammaSpec& spec, double T, int k, int refine_limit) {
  if (k < 0) throw Error(Errc::BadParameter, "oracle_coeff needs k >= 0");
  if (!(T > 0.0)) throw Error(Errc::BadParameter, "T must be positive");
  if (!(spec.delta < 2.0)) throw Error(Errc::SingularityTooStrong, "delta >= 2");

  const double omega = k * kPi / T;
  const double split = T / (k + 1);
  // gamma ~ t^{1-delta} near 0; grade so the transformed integrand vanishes to order >= 10.
  const double p = 1.0 - spec.delta;
  const int q = std::max(2, static_cast<int>(std::ceil(10.0 / (p + 1.0))));

  auto graded = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double t = split * std::pow(s, q);
    return spec.evaluate(t) * std::cos(omega * t) * split * q * std::pow(s, q - 1);
  };
  auto uniform = [&](double t) { return spec.evaluate(t) * std::cos(omega * t); };

  // Scale floor for the relative test: the size of gamma itself on [0, T].
  const double floor = 1e-3 * (std::abs(spec.evaluate(T)) + std::abs(spec.evaluate(0.5 * T))) * T;

  const OracleResult near = romberg(graded, 0.0, 1.0, 64, refine_limit, floor);
  const OracleResult far = romberg(uniform, split, T, 16 * std::max(k, 1), refine_limit, floor);

  OracleResult out;
  out.value = 2.0 / T * (near.value + far.value);
  out.converged = near.converged && far.converged;
  out.refinements = std::max(near.refinements, far.refinements);
  return out;
}

double decay_fit(const CosineSeries& series, int k_lo, int k_hi) {
  if (k_lo < 1 || k_hi > series.k_max || k_hi < 4 * k_lo)
    throw Error(Errc::BadParameter, "decay_fit needs 1 <= k_lo, 4 k_lo <= k_hi <= k_max");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double c = std::abs(series.values[static_cast<std::size_t>(k)]);
    if (c == 0.0 || c <= series.error_bounds[static_cast<std::size_t>(k)]) continue;
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(c);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 8) throw Error(Errc::InsufficientData, "decay_fit needs at least 8 nonzero entries");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double tail_sum(const CosineSeries& series, long long N) {
  if (N < 0) throw Error(Errc::BadParameter, "tail_sum needs N >= 0");
  const int k_max = series.k_max;

  quad::CompensatedSum explicit_part;
  for (long long k = N + 1; k <= k_max; ++k)
    explicit_part.add(std::abs(series.values[static_cast<std::size_t>(k)]));

  // Power-law fit on the last stretch of the series.
  const int k_lo = std::max(1, k_max / 8);
  if (k_max < 4 * k_lo || k_max < 16)
    throw Error(Errc::TailEstimateUnavailable, "series too short for a tail fit");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0, total = 0;
  for (int k = k_lo; k <= k_max; ++k) {
    ++total;
    const double c = std::abs(series.values[static_cast<std::size_t>(k)]);
    if (c == 0.0 || c <= series.error_bounds[static_cast<std::size_t>(k)]) continue;
    const double x = std::log(static_cast<double>(k));
    const double y = std::log(c);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 8) {
    // Entirely negligible tail (all entries zero or within noise).
    if (n == 0) return explicit_part.value();
    throw Error(Errc::TailEstimateUnavailable, "too few resolved entries for a tail fit");
  }
  const double slope_raw = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope_raw * sx) / n;
  const double slope = std::clamp(slope_raw, -3.0, -1.0);
  if (slope >= -1.0) return std::numeric_limits<double>::infinity();

  const double start = static_cast<double>(std::max<long long>(N, k_max));
  const double density = static_cast<double>(n) / total;
  // Refit intercept at the clamped slope only when clamping changed it.
  const double icpt = (slope == slope_raw) ? intercept : (sy - slope * sx) / n;
  const double extrapolated =
      2.0 * density * std::exp(icpt) * std::pow(start, slope + 1.0) / (-slope - 1.0);
  return explicit_part.value() + extrapolated;
}

void write_series_csv(std::ostream& os, const CosineSeries& series) {
  os << "k,c_k,err_bound\n";
  for (int k = series.has_c0 ? 0 : 1; k <= series.k_max; ++k) {
    os << k << ',' << format_double(series.values[static_cast<std::size_t>(k)]) << ','
       << format_double(series.error_bounds[static_cast<std::size_t>(k)]) << '\n';
  }
}

}  // namespace specgauss
