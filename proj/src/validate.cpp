#include "specgauss/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "quadrature.hpp"
#include "specgauss/error.hpp"
#include "trig_synth.hpp"

namespace specgauss {

namespace {

constexpr double kPi = std::numbers::pi;

double gamma_at(const GammaSpec& g, double x) {
  if (x > 0.0) return g.evaluate(x);
  return g.gamma_at_zero ? *g.gamma_at_zero : g.evaluate(0.0);
}

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overload(Ts...) -> Overload<Ts...>;

double ou_cov(const OuParams& p, double s, double t) {
  const double th = p.theta;
  return p.sigma0 * p.sigma0 * std::exp(-th * (t + s)) +
         p.sigma * p.sigma / (2.0 * th) * (std::exp(-th * std::abs(t - s)) - std::exp(-th * (t + s)));
}

// 1 - cos(x) without cancellation.
double one_minus_cos(double x) {
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

}  // namespace

double analytic_cov(const CovModel& model, double s, double t) {
  return std::visit(
      Overload{
          [&](const FbmModel& m) {
            const double e = 2.0 * m.hurst;
            return 0.5 * (std::pow(t, e) + std::pow(s, e) - std::pow(std::abs(t - s), e));
          },
          [&](const BrownianModel&) { return std::min(s, t); },
          [&](const GenOuModel& m) { return ou_cov(m.params, s, t); },
          [&](const TypeAModel& m) {
            return 0.5 * (gamma_at(m.gamma, t) + gamma_at(m.gamma, s) - gamma_at(m.gamma, std::abs(t - s)));
          },
          [&](const TypeBModel& m) { return gamma_at(m.gamma, std::abs(t - s)); },
          [&](const TypeCModel& m) {
            return 0.5 * (gamma_at(m.gamma, std::abs(t - s)) - gamma_at(m.gamma, t + s));
          },
      },
      model.tag);
}

double series_cov(const SeriesExpansion& exp, double s, double t) {
  quad::CompensatedSum sum;
  const bool paired = exp.has_partner();
  const bool one_minus = paired && exp.family != Family::TypeB;
  for (int k = exp.truncation; k >= 1; --k) {
    const auto i = static_cast<std::size_t>(k);
    const double w = k * kPi / exp.period;
    const double a = exp.sin_amp[i];
    sum.add(a * a * std::sin(w * s) * std::sin(w * t));
    if (paired) {
      const double b = exp.cos_amp[i];
      const double ps = one_minus ? one_minus_cos(w * s) : std::cos(w * s);
      const double pt = one_minus ? one_minus_cos(w * t) : std::cos(w * t);
      sum.add(b * b * ps * pt);
    }
  }
  if (exp.family == Family::FbmHigh) sum.add(exp.drift_amp * exp.drift_amp * s * t);
  if (exp.family == Family::TypeB) sum.add(exp.drift_amp * exp.drift_amp);
  if (exp.init) {
    const double a = exp.init->sigma0;
    sum.add(a * a * std::exp(-exp.init->theta * (s + t)));
  }
  return sum.value();
}

CovEstimate empirical_cov(const PathBatch& batch, std::size_t i, std::size_t j) {
  const int n = batch.n_paths;
  if (n < 100) throw Error(Errc::TooFewPaths, "empirical_cov needs at least 100 paths");
  if (i >= batch.points() || j >= batch.points())
    throw Error(Errc::BadParameter, "grid column out of range");

  quad::CompensatedSum mx, my;
  for (int p = 0; p < n; ++p) {
    mx.add(batch.at(p, i));
    my.add(batch.at(p, j));
  }
  const double xbar = mx.value() / n, ybar = my.value() / n;

  // Centered sums; leave-one-out covariances follow from them in closed form.
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  quad::CompensatedSum sx, sy, sxy;
  for (int p = 0; p < n; ++p) {
    const auto q = static_cast<std::size_t>(p);
    x[q] = batch.at(p, i) - xbar;
    y[q] = batch.at(p, j) - ybar;
    sx.add(x[q]);
    sy.add(y[q]);
    sxy.add(x[q] * y[q]);
  }
  const double nn = n;
  CovEstimate out;
  out.estimate = (sxy.value() - sx.value() * sy.value() / nn) / (nn - 1.0);

  const double m = nn - 1.0;
  std::vector<double> loo(static_cast<std::size_t>(n));
  quad::CompensatedSum loo_sum;
  for (std::size_t q = 0; q < loo.size(); ++q) {
    const double ax = sx.value() - x[q], ay = sy.value() - y[q];
    const double axy = sxy.value() - x[q] * y[q];
    loo[q] = (axy - ax * ay / m) / (m - 1.0);
    loo_sum.add(loo[q]);
  }
  const double loo_mean = loo_sum.value() / nn;
  quad::CompensatedSum dev;
  for (double v : loo) dev.add((v - loo_mean) * (v - loo_mean));
  out.stderr_ = std::sqrt((nn - 1.0) / nn * dev.value());
  return out;
}

std::vector<CheckRecord> covariance_checks(const CovModel& model, const PathBatch& batch,
                                           double n_stderr) {
  std::vector<CheckRecord> checks;
  const std::size_t P = batch.points();
  checks.reserve(P * (P + 1) / 2);
  for (std::size_t i = 0; i < P; ++i) {
    for (std::size_t j = i; j < P; ++j) {
      const CovEstimate e = empirical_cov(batch, i, j);
      const double exact = analytic_cov(model, batch.grid[i], batch.grid[j]);
      CheckRecord r;
      std::ostringstream name;
      name << "cov(" << batch.grid[i] << "," << batch.grid[j] << ")";
      r.name = name.str();
      r.statistic = std::abs(e.estimate - exact);
      // The absolute floor only matters for degenerate columns (zero spread).
      r.bound = n_stderr * e.stderr_ + 1e-12 * std::max(1.0, std::abs(exact));
      r.pass = r.statistic <= r.bound;
      checks.push_back(std::move(r));
    }
  }
  return checks;
}

RateProbeResult rate_probe(const SeriesExpansion& reference, std::span<const int> Ns,
                           int replicates, int M, std::uint64_t seed, double reference_slope,
                           Exec exec) {
  if (replicates < 100) throw Error(Errc::BadParameter, "rate_probe needs at least 100 replicates");
  if (Ns.size() < 2) throw Error(Errc::BadParameter, "rate_probe needs at least two truncations");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] < 2 || (i > 0 && Ns[i] <= Ns[i - 1]))
      throw Error(Errc::BadParameter, "truncations must be increasing and >= 2");
  }
  if (static_cast<long long>(reference.truncation) < 8LL * Ns.back())
    throw Error(Errc::BadParameter, "reference truncation must be >= 8 max(Ns)");

  const kernels::UniformEvaluator evaluator(reference, M);
  const int count = kernels::normals_per_path(reference);
  const std::size_t nN = Ns.size();
  std::vector<double> sup(static_cast<std::size_t>(replicates) * nN);

  auto body = [&](int r) {
    std::vector<double> z(static_cast<std::size_t>(count));
    std::vector<double> residual(static_cast<std::size_t>(M) + 1);
    kernels::draw_normals(seed, static_cast<std::uint64_t>(r), z);
    for (std::size_t i = 0; i < nN; ++i) {
      evaluator.evaluate(z, Ns[i] + 1, reference.truncation, false, residual);
      double worst = 0.0;
      for (double v : residual) worst = std::max(worst, std::abs(v));
      sup[static_cast<std::size_t>(r) * nN + i] = worst;
    }
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (int r = 0; r < replicates; ++r) body(r);
  } else {
    for (int r = 0; r < replicates; ++r) body(r);
  }

  RateProbeResult out;
  out.Ns.assign(Ns.begin(), Ns.end());
  out.reference_slope = reference_slope;
  out.replicate_count = replicates;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < nN; ++i) {
    quad::CompensatedSum s;
    for (int r = 0; r < replicates; ++r) s.add(sup[static_cast<std::size_t>(r) * nN + i]);
    const double mean = s.value() / replicates;
    quad::CompensatedSum d;
    for (int r = 0; r < replicates; ++r) {
      const double e = sup[static_cast<std::size_t>(r) * nN + i] - mean;
      d.add(e * e);
    }
    out.sup_err_estimates.push_back(mean);
    out.std_errors.push_back(std::sqrt(d.value() / (replicates - 1.0) / replicates));
    const double n = Ns[i];
    x.push_back(std::log(n));
    y.push_back(std::log(mean / std::sqrt(std::log(n))));
  }
  out.fitted_slope = least_squares_slope(x, y);
  return out;
}

RateProbeResult rate_probe_fbm(double hurst, double T, std::span<const int> Ns, int replicates,
                               std::uint64_t seed, Exec exec) {
  if (Ns.empty()) throw Error(Errc::BadParameter, "rate_probe needs truncations");
  const int n_max = *std::max_element(Ns.begin(), Ns.end());
  const int n_ref = 32 * n_max;
  const CosineSeries series = fbm_series(hurst, T, n_ref, 1e-10, exec);
  const SeriesExpansion reference = build_fbm(hurst, T, n_ref, series);
  return rate_probe(reference, Ns, replicates, 16 * n_max, seed, -hurst, exec);
}

namespace {

// gamma(0) + sum_{k>=1} c_k (cos(k pi t/T) - 1), summed from the small end.
double cosine_partial_sum(const CosineSeries& series, double base, double t) {
  const double T = series.horizon;
  quad::CompensatedSum sum;
  for (int k = series.k_max; k >= 1; --k) sum.add(-series[k] * one_minus_cos(k * kPi * t / T));
  sum.add(base);
  return sum.value();
}

void check_grid(std::span<const double> grid, double T) {
  for (double t : grid)
    if (!(std::abs(t) <= T * (1.0 + 1e-12))) throw Error(Errc::BadParameter, "grid point outside [-T, T]");
}

}  // namespace

double cosine_reconstruction_error(const GammaSpec& spec, const CosineSeries& series, std::span<const double> grid) {
  if (!(spec.delta < 1.0)) throw Error(Errc::DeltaOutOfRange, "reconstruction needs delta < 1");
  if (std::abs(series.horizon - spec.horizon) > 1e-12 * spec.horizon)
    throw Error(Errc::BadParameter, "series horizon differs from gamma horizon");
  check_grid(grid, spec.horizon);
  const double g0 = gamma_at(spec, 0.0);
  std::vector<double> err(grid.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = std::abs(grid[i]);
    err[i] = std::abs(cosine_partial_sum(series, g0, t) - gamma_at(spec, t));
  }
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

double cosine_reconstruction_error(const GammaSpec& spec, int K, std::span<const double> grid) {
  if (!(spec.delta < 1.0)) throw Error(Errc::DeltaOutOfRange, "reconstruction needs delta < 1");
  return cosine_reconstruction_error(spec, coeffs_quadrature(spec, K, 1e-10), grid);
}

double fbm_high_reconstruction_check(double hurst, const CosineSeries& series,
                                     std::span<const double> grid) {
  if (!(hurst > 0.5 && hurst < 1.0)) throw Error(Errc::BadParameter, "needs H in (1/2, 1)");
  if (series.method != CoeffMethod::SecondDerivative)
    throw Error(Errc::BranchMismatch, "needs the second-derivative coefficient series");
  const double T = series.horizon;
  check_grid(grid, T);
  const double curvature = hurst * std::pow(T, 2.0 * hurst - 2.0);
  std::vector<double> err(grid.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = std::abs(grid[i]);
    const double approx = cosine_partial_sum(series, curvature * t * t, t);
    err[i] = std::abs(approx - std::pow(t, 2.0 * hurst));
  }
  return err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
}

std::vector<double> sup_truncation_variance(const CosineSeries& series, std::span<const int> Ns, int M) {
  if (M < 2) throw Error(Errc::BadParameter, "needs M >= 2");
  const int K = series.k_max;
  const double beyond = tail_sum(series, K);
  const detail::TrigSynth synth(M);
  std::vector<double> out;
  for (int N : Ns) {
    if (N < 0 || N >= K) throw Error(Errc::BadParameter, "truncation must lie below k_max");
    std::vector<double> b(static_cast<std::size_t>(M) + 1, 0.0), c(b.size());
    quad::CompensatedSum total;
    for (int k = K; k > N; --k) {
      const double w = std::abs(series[k]);
      const long long r = k % (2LL * M);
      b[static_cast<std::size_t>(r <= M ? r : 2 * M - r)] += w;
      total.add(w);
    }
    synth.cosine(b, c);
    double worst = 0.0;
    for (int j = 1; j <= M; ++j) worst = std::max(worst, total.value() - c[static_cast<std::size_t>(j)]);
    out.push_back(worst + beyond);
  }
  return out;
}

}  // namespace specgauss
