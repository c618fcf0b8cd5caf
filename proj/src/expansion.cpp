#include "specgauss/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "specgauss/error.hpp"
#include "specgauss/rng.hpp"
#include "trig_synth.hpp"

namespace specgauss {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_sqrt(double radicand, double err, int k, int& clamped) {
  if (radicand >= 0.0) return std::sqrt(radicand);
  if (radicand >= -(1e-12 + err)) {
    ++clamped;
    return 0.0;
  }
  throw Error(Errc::NegativeRadicand,
              "coefficient sign violated at k=" + std::to_string(k) + " (radicand " +
                  std::to_string(radicand) + ")");
}

std::string hurst_label(const char* family, double h) {
  std::ostringstream os;
  os << family << "(H=" << h << ")";
  return os.str();
}

void require_admissible(const GammaSpec& spec, int orientation) {
  if (spec.orientation != orientation)
    throw Error(Errc::NotAdmissible, spec.label + ": wrong orientation for this family");
  if (!(spec.delta < 1.0)) throw Error(Errc::DeltaOutOfRange, spec.label + ": needs delta < 1");
  const AdmissibilityReport report = check_admissible(spec, 1024, 1e-9);
  if (!report.passed) throw Error(Errc::NotAdmissible, spec.label + ": admissibility check failed");
}

void require_coverage(const CosineSeries& series, int N) {
  if (N < 0) throw Error(Errc::BadParameter, "truncation must be >= 0");
  if (series.k_max < N) throw Error(Errc::BadParameter, "coefficient series shorter than truncation");
}

bool same_horizon(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

int sin_slot(bool paired, int k) { return paired ? 2 * k - 1 : k; }
int partner_slot(int k) { return 2 * k; }

double phase(int k, double period, double t) { return (static_cast<double>(k) * kPi / period) * t; }

// Deterministic plus Z_0 part at time t.
double base_value(const SeriesExpansion& exp, std::span<const double> z, double t) {
  double value = exp.mean(t);
  if (exp.init) value += exp.init->sigma0 * std::exp(-exp.init->theta * t) * z[0];
  if (exp.family == Family::FbmHigh) value += exp.drift_amp * t * z[0];
  if (exp.family == Family::TypeB) value += exp.drift_amp * z[0];
  return value;
}

}  // namespace

const char* to_string(Family family) noexcept {
  switch (family) {
    case Family::FbmLow: return "fbm_low";
    case Family::FbmHigh: return "fbm_high";
    case Family::TypeA: return "type_a";
    case Family::TypeB: return "type_b";
    case Family::TypeC: return "type_c";
  }
  return "unknown";
}

SeriesExpansion SeriesExpansion::truncated(int n) const {
  if (n < 0 || n > truncation) throw Error(Errc::BadParameter, "truncated(n) needs 0 <= n <= N");
  SeriesExpansion out = *this;
  out.truncation = n;
  out.sin_amp.resize(static_cast<std::size_t>(n) + 1);
  if (!out.cos_amp.empty()) out.cos_amp.resize(static_cast<std::size_t>(n) + 1);
  return out;
}

CosineSeries fbm_series(double hurst, double T, int k_max, double tol, Exec exec) {
  if (!(hurst > 0.0 && hurst < 1.0) || hurst == 0.5)
    throw Error(Errc::BadParameter, "fbm needs H in (0, 1) without 1/2");
  if (hurst < 0.5)
    return coeffs_quadrature(builtin_gamma(GammaKind::Power2H, {hurst}, T), k_max, tol, exec);
  const CosineSeries raw =
      coeffs_quadrature(builtin_gamma(GammaKind::NegPower, {hurst}, T), k_max, tol, exec);
  return second_derivative_transform(raw, T);
}

SeriesExpansion build_fbm(double hurst, double T, int N, const CosineSeries& source) {
  if (hurst == 0.5)
    throw Error(Errc::BadParameter, "H = 1/2 is Brownian motion; use build_type_a with gamma(t) = t");
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error(Errc::BadParameter, "fbm needs H in (0, 1)");
  if (!(T > 0.0)) throw Error(Errc::BadParameter, "T must be positive");
  const bool high = hurst > 0.5;
  if (high != (source.method == CoeffMethod::SecondDerivative))
    throw Error(Errc::BranchMismatch, "coefficient series does not match the Hurst branch");
  if (!same_horizon(source.horizon, T))
    throw Error(Errc::BranchMismatch, "coefficient series horizon differs from T");
  require_coverage(source, N);

  SeriesExpansion exp;
  exp.family = high ? Family::FbmHigh : Family::FbmLow;
  exp.horizon = T;
  exp.period = T;
  exp.truncation = N;
  exp.drift_amp = high ? std::sqrt(hurst * std::pow(T, 2.0 * hurst - 2.0)) : 0.0;
  exp.sin_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  exp.cos_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double a = checked_sqrt(-0.5 * source.values[i], 0.5 * source.error_bounds[i], k,
                                  exp.clamped_radicands);
    exp.sin_amp[i] = a;
    exp.cos_amp[i] = a;
  }
  exp.label = hurst_label("fbm", hurst);
  return exp;
}

SeriesExpansion build_type_a(const GammaSpec& spec, const CosineSeries& series, int N) {
  require_admissible(spec, +1);
  if (!same_horizon(series.horizon, spec.horizon))
    throw Error(Errc::BadParameter, "series horizon differs from gamma horizon");
  require_coverage(series, N);

  SeriesExpansion exp;
  exp.family = Family::TypeA;
  exp.horizon = spec.horizon;
  exp.period = spec.horizon;
  exp.truncation = N;
  exp.sin_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  exp.cos_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double a = checked_sqrt(-0.5 * series.values[i], 0.5 * series.error_bounds[i], k,
                                  exp.clamped_radicands);
    exp.sin_amp[i] = a;
    exp.cos_amp[i] = a;
  }
  exp.label = "type_a(" + spec.label + ")";
  return exp;
}

SeriesExpansion build_type_a(const GammaSpec& spec, int N) {
  require_admissible(spec, +1);
  return build_type_a(spec, coeffs_quadrature(spec, std::max(N, 1), 1e-10), N);
}

SeriesExpansion build_type_b(const GammaSpec& spec, const CosineSeries& series, int N) {
  require_admissible(spec, -1);
  if (!same_horizon(series.horizon, spec.horizon))
    throw Error(Errc::BadParameter, "series horizon differs from gamma horizon");
  require_coverage(series, N);
  if (series.values[0] < 0.0) throw Error(Errc::NegativeC0, spec.label + ": c_0 < 0");

  SeriesExpansion exp;
  exp.family = Family::TypeB;
  exp.horizon = spec.horizon;
  exp.period = spec.horizon;
  exp.truncation = N;
  // Constant Fourier term of gamma(|t|) is (1/T) int gamma = c_0 / 2.
  exp.drift_amp = std::sqrt(0.5 * series.values[0]);
  exp.sin_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  exp.cos_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double a =
        checked_sqrt(series.values[i], series.error_bounds[i], k, exp.clamped_radicands);
    exp.sin_amp[i] = a;
    exp.cos_amp[i] = a;
  }
  exp.label = "type_b(" + spec.label + ")";
  return exp;
}

SeriesExpansion build_type_b(const GammaSpec& spec, int N) {
  require_admissible(spec, -1);
  return build_type_b(spec, coeffs_quadrature(spec, std::max(N, 1), 1e-10), N);
}

SeriesExpansion build_type_c(const GammaSpec& spec, const CosineSeries& series, double T, int N) {
  require_admissible(spec, -1);
  if (!same_horizon(spec.horizon, 2.0 * T))
    throw Error(Errc::BadParameter, "type C gamma must be given on (0, 2T)");
  if (!same_horizon(series.horizon, 2.0 * T))
    throw Error(Errc::BadParameter, "type C coefficients must be computed on (0, 2T)");
  require_coverage(series, N);

  SeriesExpansion exp;
  exp.family = Family::TypeC;
  exp.horizon = T;
  exp.period = 2.0 * T;
  exp.truncation = N;
  exp.sin_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) {
    const auto i = static_cast<std::size_t>(k);
    exp.sin_amp[i] =
        checked_sqrt(series.values[i], series.error_bounds[i], k, exp.clamped_radicands);
  }
  exp.label = "type_c(" + spec.label + ")";
  return exp;
}

SeriesExpansion build_type_c(const GammaSpec& spec, double T, int N) {
  require_admissible(spec, -1);
  return build_type_c(spec, coeffs_quadrature(spec, std::max(N, 1), 1e-10), T, N);
}

SeriesExpansion build_generalized_ou(const OuParams& p, double T, int N) {
  if (!(p.theta > 0.0) || !std::isfinite(p.theta))
    throw Error(Errc::BadParameter, "generalized OU needs theta > 0");
  if (!(p.sigma0 >= 0.0)) throw Error(Errc::BadParameter, "generalized OU needs sigma0 >= 0");
  if (!std::isfinite(p.alpha) || !std::isfinite(p.mu) || !std::isfinite(p.sigma))
    throw Error(Errc::BadParameter, "generalized OU parameters must be finite");
  if (!(T > 0.0)) throw Error(Errc::BadParameter, "T must be positive");
  if (N < 0) throw Error(Errc::BadParameter, "truncation must be >= 0");

  const CosineSeries series =
      coeffs_closed(ClosedModel::GeneralizedOU, {p.theta, p.sigma}, T, std::max(N, 1));
  SeriesExpansion exp;
  exp.family = Family::TypeC;
  exp.horizon = T;
  exp.period = 2.0 * T;
  exp.truncation = N;
  exp.sin_amp.assign(static_cast<std::size_t>(N) + 1, 0.0);
  for (int k = 1; k <= N; ++k) exp.sin_amp[static_cast<std::size_t>(k)] = std::sqrt(series[k]);
  const double theta = p.theta, alpha = p.alpha, mu = p.mu;
  exp.mean_fn = [theta, alpha, mu](double t) {
    const double e = std::exp(-theta * t);
    return mu * e + alpha * (1.0 - e);
  };
  exp.init = InitCoupling{p.sigma0, p.theta};
  std::ostringstream os;
  os << "gen_ou(theta=" << p.theta << ",alpha=" << p.alpha << ",mu=" << p.mu
     << ",sigma=" << p.sigma << ",sigma0=" << p.sigma0 << ")";
  exp.label = os.str();
  return exp;
}

namespace kernels {

int normals_per_path(const SeriesExpansion& exp) {
  return exp.has_partner() ? 1 + 2 * exp.truncation : 1 + exp.truncation;
}

void draw_normals(std::uint64_t seed, std::uint64_t path, std::span<double> out) {
  NormalStream stream(seed, path);
  stream.fill(out);
}

void evaluate_direct(const SeriesExpansion& exp, std::span<const double> z,
                     std::span<const double> grid, std::span<double> out) {
  const bool paired = exp.has_partner();
  const bool one_minus = paired && exp.family != Family::TypeB;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid[j];
    double value = base_value(exp, z, t);
    for (int k = 1; k <= exp.truncation; ++k) {
      const auto i = static_cast<std::size_t>(k);
      const double ph = phase(k, exp.period, t);
      value += exp.sin_amp[i] * z[static_cast<std::size_t>(sin_slot(paired, k))] * std::sin(ph);
      if (paired) {
        const double partner = one_minus ? 1.0 - std::cos(ph) : std::cos(ph);
        value += exp.cos_amp[i] * z[static_cast<std::size_t>(partner_slot(k))] * partner;
      }
    }
    out[j] = value;
  }
}

struct UniformEvaluator::Impl {
  const SeriesExpansion* exp;
  int M;
  int L;
  detail::TrigSynth synth;
  Impl(const SeriesExpansion& e, int m, int l) : exp(&e), M(m), L(l), synth(l) {}
};

UniformEvaluator::UniformEvaluator(const SeriesExpansion& exp, int M) {
  if (M < 2) throw Error(Errc::BadParameter, "uniform grid needs M >= 2");
  const double ratio = exp.period / exp.horizon;
  const long long L = std::llround(ratio * M);
  if (std::abs(ratio * M - static_cast<double>(L)) > 1e-9 * M)
    throw Error(Errc::GridNotUniform, "period is not a whole multiple of the grid step");
  impl_ = std::make_unique<Impl>(exp, M, static_cast<int>(L));
}

UniformEvaluator::~UniformEvaluator() = default;
UniformEvaluator::UniformEvaluator(UniformEvaluator&&) noexcept = default;
UniformEvaluator& UniformEvaluator::operator=(UniformEvaluator&&) noexcept = default;

int UniformEvaluator::grid_intervals() const { return impl_->M; }

void UniformEvaluator::evaluate(std::span<const double> z, int k_first, int k_last,
                                bool include_base, std::span<double> out) const {
  const SeriesExpansion& exp = *impl_->exp;
  const int M = impl_->M;
  const long long L = impl_->L;
  const bool paired = exp.has_partner();
  const bool one_minus = paired && exp.family != Family::TypeB;
  k_first = std::max(k_first, 1);
  k_last = std::min(k_last, exp.truncation);

  // Fold frequencies onto [0, L]: phase pi k j / L is periodic in k with period 2L.
  std::vector<double> a(static_cast<std::size_t>(L) + 1, 0.0);
  std::vector<double> b(paired ? a.size() : 0, 0.0);
  double partner_total = 0.0;
  for (int k = k_first; k <= k_last; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const long long r = k % (2 * L);
    const double amp = exp.sin_amp[i] * z[static_cast<std::size_t>(sin_slot(paired, k))];
    if (r != 0 && r != L) {
      if (r < L)
        a[static_cast<std::size_t>(r)] += amp;
      else
        a[static_cast<std::size_t>(2 * L - r)] -= amp;
    }
    if (paired) {
      const double c = exp.cos_amp[i] * z[static_cast<std::size_t>(partner_slot(k))];
      partner_total += c;
      b[static_cast<std::size_t>(r <= L ? r : 2 * L - r)] += c;
    }
  }

  std::vector<double> s(a.size()), cterm(paired ? a.size() : 0);
  impl_->synth.sine(a, s);
  if (paired) impl_->synth.cosine(b, cterm);

  const double T = exp.horizon;
  for (int j = 0; j <= M; ++j) {
    const auto jj = static_cast<std::size_t>(j);
    double value = include_base ? base_value(exp, z, T * j / M) : 0.0;
    if (j == 0) {
      // sin(0) = 0 and 1 - cos(0) = 0 exactly.
      if (paired && !one_minus) value += partner_total;
    } else {
      value += s[jj];
      if (paired) value += one_minus ? partner_total - cterm[jj] : cterm[jj];
    }
    out[jj] = value;
  }
}

}  // namespace kernels

namespace {

template <class Body>
void for_each_path(int n_paths, Exec exec, Body&& body) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < n_paths; ++p) body(p);
  } else {
    for (int p = 0; p < n_paths; ++p) body(p);
  }
}

}  // namespace

PathBatch sample_paths(const SeriesExpansion& exp, std::span<const double> grid, int n_paths,
                       std::uint64_t seed, Exec exec) {
  if (n_paths < 1) throw Error(Errc::BadParameter, "n_paths must be >= 1");
  for (double t : grid)
    if (!(t >= 0.0 && t <= exp.horizon * (1.0 + 1e-12)))
      throw Error(Errc::BadParameter, "grid point outside [0, T]");

  PathBatch batch;
  batch.grid.assign(grid.begin(), grid.end());
  batch.values.assign(static_cast<std::size_t>(n_paths) * grid.size(), 0.0);
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.expansion_ref = exp.label;
  batch.truncation = exp.truncation;

  const int count = kernels::normals_per_path(exp);
  for_each_path(n_paths, exec, [&](int p) {
    std::vector<double> z(static_cast<std::size_t>(count));
    kernels::draw_normals(seed, static_cast<std::uint64_t>(p), z);
    std::span<double> row(batch.values.data() + static_cast<std::size_t>(p) * grid.size(),
                          grid.size());
    kernels::evaluate_direct(exp, z, batch.grid, row);
  });
  return batch;
}

PathBatch sample_paths_fast(const SeriesExpansion& exp, int M, int n_paths, std::uint64_t seed,
                            Exec exec) {
  if (n_paths < 1) throw Error(Errc::BadParameter, "n_paths must be >= 1");
  const kernels::UniformEvaluator evaluator(exp, M);

  PathBatch batch;
  batch.grid.resize(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) batch.grid[static_cast<std::size_t>(j)] = exp.horizon * j / M;
  batch.values.assign(static_cast<std::size_t>(n_paths) * batch.grid.size(), 0.0);
  batch.n_paths = n_paths;
  batch.seed = seed;
  batch.expansion_ref = exp.label;
  batch.truncation = exp.truncation;

  const int count = kernels::normals_per_path(exp);
  const std::size_t width = batch.grid.size();
  for_each_path(n_paths, exec, [&](int p) {
    std::vector<double> z(static_cast<std::size_t>(count));
    kernels::draw_normals(seed, static_cast<std::uint64_t>(p), z);
    std::span<double> row(batch.values.data() + static_cast<std::size_t>(p) * width, width);
    evaluator.evaluate(z, 1, exp.truncation, true, row);
  });
  return batch;
}

long long truncation_for_tolerance(const CosineSeries& series, double eps) {
  if (!(eps > 0.0)) throw Error(Errc::BadParameter, "eps must be positive");
  auto error_at = [&](long long n) { return std::sqrt(2.0 * tail_sum(series, n)); };
  if (error_at(1) <= eps) return 1;
  long long lo = 1, hi = 2;
  while (error_at(hi) > eps) {
    lo = hi;
    hi *= 2;
    if (hi > (1LL << 52))
      throw Error(Errc::TailEstimateUnavailable, "tolerance unreachable by the tail model");
  }
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    if (error_at(mid) <= eps)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace specgauss
