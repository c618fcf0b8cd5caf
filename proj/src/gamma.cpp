#include "specgauss/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "specgauss/error.hpp"

namespace specgauss {

namespace {

std::string fmt_label(const char* name, double value) {
  std::ostringstream os;
  os << name << "(" << value << ")";
  return os.str();
}

void require_horizon(double horizon) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw Error(Errc::BadParameter, "horizon must be positive and finite");
}

}  // namespace

GammaSpec power_sum_gamma(std::vector<PowerTerm> terms, double horizon, double delta,
                          int orientation, std::string label) {
  require_horizon(horizon);
  if (terms.empty()) throw Error(Errc::BadParameter, "power_sum_gamma needs at least one term");
  for (const auto& term : terms)
    if (!(term.exponent > -1.0))
      throw Error(Errc::SingularityTooStrong, "power term exponent must exceed -1");

  GammaSpec spec;
  spec.evaluate = [terms](double t) {
    double sum = 0.0;
    for (const auto& term : terms) sum += term.coef * std::pow(t, term.exponent);
    return sum;
  };
  spec.derivative = [terms](double t) {
    double sum = 0.0;
    for (const auto& term : terms)
      if (term.exponent != 0.0) sum += term.coef * term.exponent * std::pow(t, term.exponent - 1.0);
    return sum;
  };
  spec.delta = delta;
  spec.horizon = horizon;
  spec.label = std::move(label);
  spec.orientation = orientation;

  const bool finite_at_zero =
      std::all_of(terms.begin(), terms.end(), [](const PowerTerm& t) { return t.exponent >= 0.0; });
  if (finite_at_zero) {
    double at_zero = 0.0;
    for (const auto& term : terms)
      if (term.exponent == 0.0) at_zero += term.coef;
    spec.gamma_at_zero = at_zero;
  }
  spec.power_terms = std::move(terms);
  return spec;
}

GammaSpec builtin_gamma(GammaKind kind, const GammaParams& params, double horizon) {
  require_horizon(horizon);
  const double H = params.hurst;

  switch (kind) {
    case GammaKind::Power2H: {
      if (!(H > 0.0 && H < 0.5)) throw Error(Errc::BadParameter, "power2H needs H in (0, 1/2)");
      return power_sum_gamma({{1.0, 2.0 * H}}, horizon, 1.0 - 2.0 * H, +1,
                             fmt_label("power2H", H));
    }
    case GammaKind::NegPower: {
      if (!(H > 0.5 && H < 1.0)) throw Error(Errc::BadParameter, "neg_power needs H in (1/2, 1)");
      const double coef = -2.0 * H * (2.0 * H - 1.0);
      return power_sum_gamma({{coef, 2.0 * H - 2.0}}, horizon, 3.0 - 2.0 * H, +1,
                             fmt_label("neg_power", H));
    }
    case GammaKind::Linear:
      return power_sum_gamma({{1.0, 1.0}}, horizon, 0.0, +1, "linear");
    case GammaKind::MinusAbs:
      return power_sum_gamma({{-1.0, 1.0}}, horizon, 0.0, -1, "minus_abs");
    case GammaKind::ExpDecay: {
      const double theta = params.theta;
      if (!(theta > 0.0) || !std::isfinite(theta))
        throw Error(Errc::BadParameter, "exp_decay needs theta > 0");
      if (!std::isfinite(params.sigma)) throw Error(Errc::BadParameter, "sigma must be finite");
      const double scale = params.sigma * params.sigma / theta;
      GammaSpec spec;
      spec.evaluate = [scale, theta](double t) { return scale * std::exp(-theta * t); };
      spec.derivative = [scale, theta](double t) { return -theta * scale * std::exp(-theta * t); };
      spec.remainder = spec.evaluate;
      spec.delta = 0.0;
      spec.horizon = horizon;
      spec.label = fmt_label("exp_decay", theta);
      spec.gamma_at_zero = scale;
      spec.orientation = -1;
      return spec;
    }
    case GammaKind::StretchedExp: {
      if (!(H > 0.0 && H < 0.5))
        throw Error(Errc::BadParameter, "stretched_exp needs H in (0, 1/2)");
      const double a = 2.0 * H;
      GammaSpec spec;
      spec.evaluate = [a](double t) { return std::exp(-std::pow(t, a)); };
      spec.derivative = [a](double t) {
        const double x = std::pow(t, a);
        return -a * std::pow(t, a - 1.0) * std::exp(-x);
      };
      // e^{-x} = sum_{j<5} (-x)^j / j! + O(x^5); x^5 = t^{10H} is C^2 at 0 for H > 0.2
      // and integrable-smooth enough for the adaptive remainder rule otherwise.
      double factorial = 1.0;
      for (int j = 0; j < 5; ++j) {
        if (j > 0) factorial *= j;
        spec.power_terms.push_back({(j % 2 == 0 ? 1.0 : -1.0) / factorial, a * j});
      }
      spec.remainder = [a](double t) {
        const double x = std::pow(t, a);
        if (x < 1.0) {
          // Sum the tail directly; subtracting the prefix would lose all digits near 0.
          double term = -x * x * x * x * x / 120.0, tail = 0.0;
          for (int j = 5; j < 40 && std::abs(term) > 1e-18 * std::abs(tail); ++j) {
            tail += term;
            term *= -x / (j + 1);
          }
          return tail;
        }
        double partial = 0.0, term = 1.0;
        for (int j = 0; j < 5; ++j) {
          partial += term;
          term *= -x / (j + 1);
        }
        return std::exp(-x) - partial;
      };
      spec.delta = 1.0 - a;
      spec.horizon = horizon;
      spec.label = fmt_label("stretched_exp", H);
      spec.gamma_at_zero = 1.0;
      spec.orientation = -1;
      return spec;
    }
  }
  throw Error(Errc::BadParameter, "unknown gamma kind");
}

AdmissibilityReport check_admissible(const GammaSpec& spec, int grid_size, double tol) {
  if (grid_size < 16) throw Error(Errc::BadParameter, "check_admissible needs grid_size >= 16");
  if (!(tol > 0.0)) throw Error(Errc::BadParameter, "check_admissible needs tol > 0");

  const double T = spec.horizon;
  constexpr int kGeometricLevels = 40;

  // Ascending grid: T 2^-40, ..., T/4, then uniform on [T/2, T].
  std::vector<double> grid;
  grid.reserve(kGeometricLevels + grid_size);
  for (int j = kGeometricLevels; j >= 2; --j) grid.push_back(std::ldexp(T, -j));
  for (int i = 0; i < grid_size; ++i)
    grid.push_back(0.5 * T + 0.5 * T * static_cast<double>(i) / (grid_size - 1));

  const double sign = spec.orientation >= 0 ? 1.0 : -1.0;
  std::vector<double> slope(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double value = spec.evaluate(grid[i]);
    const double d = spec.derivative(grid[i]);
    if (!std::isfinite(value) || !std::isfinite(d))
      throw Error(Errc::NonFiniteEvaluation, spec.label + " at t=" + std::to_string(grid[i]));
    slope[i] = sign * d;
  }

  AdmissibilityReport report;
  report.grid_size = static_cast<int>(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    report.max_derivative_violation = std::max(report.max_derivative_violation, -slope[i]);
    if (i + 1 < grid.size()) {
      const double rise = slope[i + 1] - slope[i];
      report.max_concavity_violation =
          std::max(report.max_concavity_violation, rise / std::max(1.0, std::abs(slope[i])));
    }
  }

  // x^delta gamma'(x) along the geometric part; index 0 is the smallest x.
  double coarse_max = 0.0, finest = 0.0;
  for (int j = kGeometricLevels; j >= 1; --j) {
    const double x = std::ldexp(T, -j);
    const double scaled = std::pow(x, spec.delta) * std::abs(spec.derivative(x));
    report.singular_bound_estimate = std::max(report.singular_bound_estimate, scaled);
    if (j == kGeometricLevels) finest = scaled;
    if (j <= kGeometricLevels / 2) coarse_max = std::max(coarse_max, scaled);
  }
  report.singular_bounded = std::isfinite(report.singular_bound_estimate) &&
                            finest <= 1.5 * coarse_max + tol;

  report.passed = report.max_derivative_violation <= tol &&
                  report.max_concavity_violation <= tol && report.singular_bounded;
  return report;
}

}  // namespace specgauss
