#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "specgauss/error.hpp"
#include "specgauss/expansion.hpp"
#include "specgauss/rng.hpp"

using namespace specgauss;
using std::numbers::pi;

namespace {

std::vector<double> uniform_grid(double T, int M) {
  std::vector<double> g(static_cast<std::size_t>(M) + 1);
  for (int j = 0; j <= M; ++j) g[static_cast<std::size_t>(j)] = j * T / M;
  return g;
}

double max_abs_diff(const PathBatch& a, const PathBatch& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  return worst;
}

}  // namespace

TEST_CASE("normal stream is reproducible and roughly standard") {
  std::vector<double> a(20000), b(20000);
  kernels::draw_normals(11, 3, a);
  kernels::draw_normals(11, 3, b);
  CHECK(a == b);
  kernels::draw_normals(11, 4, b);
  CHECK(a != b);
  double m = 0, v = 0;
  for (double x : a) m += x;
  m /= a.size();
  for (double x : a) v += (x - m) * (x - m);
  v /= a.size() - 1;
  CHECK(std::abs(m) < 4.0 / std::sqrt(20000.0));
  CHECK(std::abs(v - 1.0) < 4.0 * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("build_fbm branches") {
  const CosineSeries lo = fbm_series(0.3, 1.0, 16);
  CHECK_THROWS_AS(build_fbm(0.5, 1.0, 4, lo), Error);

  const SeriesExpansion e = build_fbm(0.3, 1.0, 2, lo);
  CHECK(e.family == Family::FbmLow);
  CHECK(e.drift_amp == 0.0);
  CHECK(std::abs(e.sin_amp[1] - std::sqrt(0.34855310054191843 / 2)) <= 1e-10);
  CHECK(std::abs(e.sin_amp[2] - std::sqrt(0.046357716200937873 / 2)) <= 1e-10);
  CHECK(e.cos_amp[1] == e.sin_amp[1]);

  const CosineSeries hi = fbm_series(0.75, 1.0, 16);
  const SeriesExpansion h = build_fbm(0.75, 1.0, 16, hi);
  CHECK(h.family == Family::FbmHigh);
  CHECK(h.drift_amp == doctest::Approx(std::sqrt(0.75)));

  try {
    build_fbm(0.75, 1.0, 4, lo);
    FAIL("expected BranchMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BranchMismatch);
  }
  CHECK_THROWS_AS(build_fbm(0.3, 2.0, 4, lo), Error);
  CHECK_THROWS_AS(build_fbm(0.3, 1.0, 17, lo), Error);
}

TEST_CASE("negative radicand is refused, tiny ones are clamped") {
  CosineSeries s = fbm_series(0.3, 1.0, 4);
  s.values[2] = 1e-3;
  try {
    build_fbm(0.3, 1.0, 4, s);
    FAIL("expected NegativeRadicand");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NegativeRadicand);
  }
  s.values[2] = 1e-13;
  const SeriesExpansion e = build_fbm(0.3, 1.0, 4, s);
  CHECK(e.sin_amp[2] == 0.0);
  CHECK(e.clamped_radicands == 1);
}

TEST_CASE("type A") {
  const auto lin = builtin_gamma(GammaKind::Linear, {}, 1.0);
  const SeriesExpansion e = build_type_a(lin, 3);
  CHECK(e.family == Family::TypeA);
  CHECK(std::abs(e.sin_amp[1] - std::sqrt(2.0) / pi) <= 1e-12);
  CHECK(e.sin_amp[2] < 1e-7);

  const auto p = builtin_gamma(GammaKind::Power2H, {.hurst = 0.3}, 1.0);
  const CosineSeries s = coeffs_quadrature(p, 32, 1e-10);
  const SeriesExpansion a = build_type_a(p, s, 32);
  const SeriesExpansion f = build_fbm(0.3, 1.0, 32, s);
  CHECK(a.sin_amp == f.sin_amp);
  CHECK(a.cos_amp == f.cos_amp);
  CHECK(a.drift_amp == f.drift_amp);

  const auto hi = builtin_gamma(GammaKind::NegPower, {.hurst = 0.75}, 1.0);
  CHECK_THROWS_AS(build_type_a(hi, 4), Error);
  const auto sq = power_sum_gamma({{1.0, 2.0}}, 1.0, 0.0, +1, "t^2");
  try {
    build_type_a(sq, 4);
    FAIL("expected NotAdmissible");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotAdmissible);
  }
}

TEST_CASE("type B") {
  const auto f = builtin_gamma(GammaKind::StretchedExp, {.hurst = 0.3}, 1.0);
  const SeriesExpansion e = build_type_b(f, 64);
  CHECK(e.family == Family::TypeB);
  CHECK(e.drift_amp == doctest::Approx(std::sqrt(1.1063762886335072 / 2)));
  const auto m = builtin_gamma(GammaKind::MinusAbs, {}, 1.0);
  try {
    build_type_b(m, 4);
    FAIL("expected NegativeC0");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::NegativeC0);
  }
}

TEST_CASE("type C Brownian expansion is the classical KL expansion") {
  const auto g = builtin_gamma(GammaKind::MinusAbs, {}, 2.0);
  const SeriesExpansion e = build_type_c(g, 1.0, 9);
  CHECK(e.period == 2.0);
  CHECK(e.cos_amp.empty());
  for (int j = 1; j <= 5; ++j) {
    const int k = 2 * j - 1;
    CHECK(std::abs(e.sin_amp[k] - std::sqrt(2.0) / ((j - 0.5) * pi)) <= 1e-10);
    CHECK(e.sin_amp[k + 1 <= 9 ? k + 1 : k] >= 0.0);
  }
  for (int k = 2; k <= 8; k += 2) CHECK(e.sin_amp[k] < 1e-7);
  CHECK_THROWS_AS(build_type_c(builtin_gamma(GammaKind::MinusAbs, {}, 1.0), 1.0, 4), Error);

  const std::vector<double> grid{0.0, 0.5, 1.0};
  const PathBatch b = sample_paths(e, grid, 50, 3);
  for (int p = 0; p < b.n_paths; ++p) CHECK(b.at(p, 0) == 0.0);
}

TEST_CASE("generalized OU") {
  const OuParams prm{.theta = 2.0, .alpha = 0.5, .mu = 0.5, .sigma = 2.0, .sigma0 = 0.0};
  const SeriesExpansion e = build_generalized_ou(prm, 1.0, 32);
  REQUIRE(e.init.has_value());
  for (double t : {0.0, 0.3, 1.0}) CHECK(e.mean(t) == doctest::Approx(0.5));
  CHECK_THROWS_AS(build_generalized_ou({.theta = -1.0}, 1.0, 8), Error);
  CHECK_THROWS_AS(build_generalized_ou({.theta = 1.0, .sigma0 = -1.0}, 1.0, 8), Error);
}

TEST_CASE("generalized OU sample mean") {
  const OuParams prm{.theta = 2.0, .alpha = 1.0, .mu = -0.5, .sigma = 1.0, .sigma0 = 0.5};
  const double T = 1.0;
  const SeriesExpansion e = build_generalized_ou(prm, T, 64);
  const std::vector<double> grid{0.0, 0.5 * T, T};
  const int n = 100000;
  const PathBatch b = sample_paths(e, grid, n, 21);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double m = 0, v = 0;
    for (int p = 0; p < n; ++p) m += b.at(p, j);
    m /= n;
    for (int p = 0; p < n; ++p) v += (b.at(p, j) - m) * (b.at(p, j) - m);
    v /= n - 1;
    const double t = grid[j];
    const double expect = prm.mu * std::exp(-prm.theta * t) + prm.alpha * (1 - std::exp(-prm.theta * t));
    CHECK(std::abs(m - expect) <= 4.0 * std::sqrt(v / n));
  }
}

TEST_CASE("fbm_high with no series terms is a random straight line") {
  const CosineSeries hi = fbm_series(0.75, 1.0, 16);
  const SeriesExpansion e = build_fbm(0.75, 1.0, 0, hi);
  const std::vector<double> grid{0.0, 0.25, 0.5, 1.0};
  const PathBatch b = sample_paths(e, grid, 10, 5);
  std::vector<double> z(static_cast<std::size_t>(kernels::normals_per_path(e)));
  for (int p = 0; p < 10; ++p) {
    kernels::draw_normals(5, static_cast<std::uint64_t>(p), z);
    for (std::size_t j = 0; j < grid.size(); ++j)
      CHECK(b.at(p, j) == doctest::Approx(std::sqrt(0.75) * grid[j] * z[0]).epsilon(1e-14));
  }
}

TEST_CASE("single term on a four-interval grid") {
  const auto lin = builtin_gamma(GammaKind::Linear, {}, 1.0);
  const SeriesExpansion e = build_type_a(lin, 1);
  const PathBatch b = sample_paths_fast(e, 4, 3, 9);
  std::vector<double> z(static_cast<std::size_t>(kernels::normals_per_path(e)));
  const double a = e.sin_amp[1];
  const double s[] = {0.0, std::sqrt(0.5), 1.0, std::sqrt(0.5), 0.0};
  const double c[] = {1.0, std::sqrt(0.5), 0.0, -std::sqrt(0.5), -1.0};
  for (int p = 0; p < 3; ++p) {
    kernels::draw_normals(9, static_cast<std::uint64_t>(p), z);
    for (int j = 0; j <= 4; ++j)
      CHECK(std::abs(b.at(p, static_cast<std::size_t>(j)) - a * (s[j] * z[1] + (1 - c[j]) * z[2])) <= 1e-14);
  }
}

TEST_CASE("fast synthesis equals direct summation for every family") {
  const int N = 1024, M = 1024;
  const std::vector<SeriesExpansion> exps{
      build_fbm(0.3, 1.0, N, fbm_series(0.3, 1.0, N)),
      build_fbm(0.75, 2.0, N, fbm_series(0.75, 2.0, N)),
      build_type_a(builtin_gamma(GammaKind::Linear, {}, 1.0), N),
      build_type_b(builtin_gamma(GammaKind::StretchedExp, {.hurst = 0.3}, 1.0), N),
      build_type_c(builtin_gamma(GammaKind::MinusAbs, {}, 2.0), 1.0, N),
      build_generalized_ou({.theta = 2.0, .alpha = 0.3, .mu = 1.0, .sigma = 2.0, .sigma0 = 0.5}, 1.0, N),
  };
  for (const auto& e : exps) {
    CAPTURE(e.label);
    const auto grid = uniform_grid(e.horizon, M);
    const PathBatch direct = sample_paths(e, grid, 4, 17);
    const PathBatch fast = sample_paths_fast(e, M, 4, 17);
    CHECK(fast.grid == direct.grid);
    CHECK(max_abs_diff(direct, fast) <= 1e-10);
  }
}

TEST_CASE("fast synthesis with more terms than grid points folds exactly") {
  const SeriesExpansion e = build_fbm(0.3, 1.0, 1000, fbm_series(0.3, 1.0, 1000));
  const PathBatch direct = sample_paths(e, uniform_grid(1.0, 64), 3, 2);
  const PathBatch fast = sample_paths_fast(e, 64, 3, 2);
  CHECK(max_abs_diff(direct, fast) <= 1e-10);
}

TEST_CASE("fast synthesis rejects incommensurate grids") {
  const SeriesExpansion e = build_type_a(builtin_gamma(GammaKind::Linear, {}, 1.0), 4);
  CHECK_THROWS_AS(sample_paths_fast(e, 1, 1, 1), Error);
}

TEST_CASE("sampling is reproducible and independent of scheduling") {
  const SeriesExpansion e = build_fbm(0.3, 1.0, 256, fbm_series(0.3, 1.0, 256));
  const auto grid = uniform_grid(1.0, 32);
  const PathBatch a = sample_paths(e, grid, 40, 99, Exec::Serial);
  const PathBatch b = sample_paths(e, grid, 40, 99, Exec::Parallel);
  const PathBatch c = sample_paths(e, grid, 40, 99, Exec::Parallel);
  CHECK(a.values == b.values);
  CHECK(b.values == c.values);
  const PathBatch d = sample_paths(e, grid, 40, 100);
  CHECK(a.values != d.values);
  const PathBatch fa = sample_paths_fast(e, 32, 40, 99, Exec::Serial);
  const PathBatch fb = sample_paths_fast(e, 32, 40, 99, Exec::Parallel);
  CHECK(fa.values == fb.values);
  CHECK(a.seed == 99);
  CHECK(a.truncation == 256);
}

TEST_CASE("truncations share their noise") {
  const SeriesExpansion e = build_fbm(0.3, 1.0, 512, fbm_series(0.3, 1.0, 512));
  const auto grid = uniform_grid(1.0, 16);
  const PathBatch full = sample_paths(e, grid, 200, 4);
  const PathBatch cut = sample_paths(e.truncated(256), grid, 200, 4);
  double diff = 0, size = 0;
  for (std::size_t i = 0; i < full.values.size(); ++i) {
    diff += std::pow(full.values[i] - cut.values[i], 2);
    size += std::pow(full.values[i], 2);
  }
  CHECK(diff < 0.05 * size);
}

TEST_CASE("variance at the horizon for fBm") {
  const SeriesExpansion e = build_fbm(0.3, 1.0, 4096, fbm_series(0.3, 1.0, 4096));
  const int n = 20000;
  const PathBatch b = sample_paths_fast(e, 32, n, 12345);
  double s2 = 0, s4 = 0;
  for (int p = 0; p < n; ++p) {
    const double x = b.at(p, 32);
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double var = s2 / n;
  const double se = std::sqrt((s4 / n - var * var) / n);
  CHECK(std::abs(var - 1.0) <= 4.0 * se);
}

TEST_CASE("truncation for a tolerance") {
  const CosineSeries s = fbm_series(0.3, 1.0, 1 << 15);
  CHECK(truncation_for_tolerance(s, std::sqrt(2.0 * tail_sum(s, 100))) <= 100);
  CHECK(truncation_for_tolerance(s, 1e6) == 1);
  const double eps = std::sqrt(2.0 * tail_sum(s, 200));
  const long long n1 = truncation_for_tolerance(s, eps);
  const long long n2 = truncation_for_tolerance(s, eps / 2);
  const double ratio = static_cast<double>(n2) / static_cast<double>(n1);
  CHECK(std::abs(ratio / std::pow(2.0, 1.0 / 0.3) - 1.0) <= 0.3);
  CHECK(truncation_for_tolerance(s, eps / 4) >= n2);
}
