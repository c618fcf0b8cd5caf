#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "quadrature.hpp"
#include "specgauss/error.hpp"
#include "specgauss/quantize.hpp"

using namespace specgauss;
using std::numbers::pi;

namespace {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * pi); }
double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Composite Gauss-Legendre on [0, T].
double integrate(const std::function<double(double)>& f, double T, int panels = 400) {
  const auto rule = quad::gauss_legendre(20);
  double sum = 0.0;
  const double h = T / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * h;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      sum += 0.5 * h * rule.weights[i] * f(a + 0.5 * h * (rule.nodes[i] + 1.0));
  }
  return sum;
}

SeriesExpansion brownian_type_c(double T, int N) {
  return build_type_c(builtin_gamma(GammaKind::MinusAbs, {}, 2 * T),
                      coeffs_closed(ClosedModel::Brownian, {}, T, N), T, N);
}

std::vector<double> brownian_mu(int count, double T = 1.0) {
  std::vector<double> mu;
  for (int j = 0; j < count; ++j) mu.push_back(T * T / ((j + 0.5) * (j + 0.5) * pi * pi));
  return mu;
}

}  // namespace

TEST_CASE("scalar quantizer small cases") {
  const Quantizer1D q1 = gauss1d_quantizer(1);
  CHECK(q1.levels == std::vector<double>{0.0});
  CHECK(q1.distortion == doctest::Approx(1.0).epsilon(1e-14));
  const Quantizer1D q2 = gauss1d_quantizer(2);
  CHECK(std::abs(q2.levels[1] - std::sqrt(2 / pi)) <= 1e-8);
  CHECK(std::abs(q2.levels[0] + std::sqrt(2 / pi)) <= 1e-8);
  CHECK(std::abs(q2.distortion - (1 - 2 / pi)) <= 1e-8);
  // Three levels: reference fixed point from 30-digit root finding.
  const Quantizer1D q3 = gauss1d_quantizer(3);
  CHECK(std::abs(q3.levels[2] - 1.2240063619249615) <= 1e-9);
  CHECK(std::abs(q3.distortion - 0.19017403924790148) <= 1e-12);
  CHECK_THROWS_AS(gauss1d_quantizer(0), Error);
}

TEST_CASE("scalar quantizer invariants") {
  double previous = 2.0;
  for (int n : {1, 2, 3, 4, 5, 7, 10, 19, 20, 33, 64, 150, 500, 1024}) {
    CAPTURE(n);
    const Quantizer1D q = gauss1d_quantizer(n);
    CHECK(q.converged);
    CHECK(static_cast<int>(q.levels.size()) == n);
    CHECK(std::is_sorted(q.levels.begin(), q.levels.end()));
    double worst_centroid = 0.0, worst_symmetry = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = i == 0 ? -INFINITY : q.boundaries[static_cast<std::size_t>(i - 1)];
      const double b = i == n - 1 ? INFINITY : q.boundaries[static_cast<std::size_t>(i)];
      const double pa = std::isinf(a) ? 0.0 : normal_pdf(a), pb = std::isinf(b) ? 0.0 : normal_pdf(b);
      const double mass = (std::isinf(b) ? 1.0 : normal_cdf(b)) - (std::isinf(a) ? 0.0 : normal_cdf(a));
      if (mass > 1e-12)
        worst_centroid = std::max(worst_centroid, std::abs((pa - pb) / mass - q.levels[static_cast<std::size_t>(i)]));
      worst_symmetry = std::max(worst_symmetry, std::abs(q.levels[static_cast<std::size_t>(i)] +
                                                         q.levels[static_cast<std::size_t>(n - 1 - i)]));
    }
    CHECK(worst_centroid <= 1e-8);
    CHECK(worst_symmetry <= 1e-8);
    CHECK(q.distortion < previous);
    previous = q.distortion;
  }
}

TEST_CASE("scalar distortion table") {
  double previous = 2.0;
  for (int n = 1; n <= 1100; ++n) {
    const double d = gauss1d_distortion(n);
    CHECK(d < previous);
    previous = d;
  }
  CHECK(gauss1d_distortion(20) == gauss1d_quantizer(20).distortion);
  // n^2 d(n) approaches sqrt(3) pi / 2 from below.
  CHECK(gauss1d_distortion(4000) * 4000.0 * 4000.0 == doctest::Approx(std::sqrt(3.0) * pi / 2).epsilon(0.01));
}

TEST_CASE("cell lookup") {
  const Quantizer1D q = gauss1d_quantizer(4);
  CHECK(q.cell(-10.0) == 0);
  CHECK(q.cell(10.0) == 3);
  CHECK(q.quantize(0.01) == q.levels[2]);
  CHECK(q.quantize(-0.01) == q.levels[1]);
}

TEST_CASE("level allocation basics") {
  const auto mu = brownian_mu(6);
  CHECK(allocate_levels(mu, 1) == std::vector<int>(6, 1));
  const auto a20 = allocate_levels(mu, 20);
  long long prod = 1;
  for (int n : a20) prod *= n;
  CHECK(prod <= 20);
  CHECK(a20[0] == *std::max_element(a20.begin(), a20.end()));
  CHECK(a20[0] > 1);
  auto value = [&](const std::vector<int>& v) {
    double s = 0;
    for (std::size_t i = 0; i < v.size(); ++i) s += mu[i] * gauss1d_distortion(v[i]);
    return s;
  };
  double previous = INFINITY;
  for (long long b = 1; b <= 4096; b *= 2) {
    const double v = value(allocate_levels(mu, b));
    CHECK(v <= previous);
    previous = v;
  }
  const std::vector<double> with_zero{0.5, 0.0, 0.2};
  const auto z = allocate_levels(with_zero, 12);
  CHECK(z[1] == 1);
  CHECK_THROWS_AS(allocate_levels(mu, 0), Error);
}

TEST_CASE("level allocation matches brute-force enumeration") {
  for (long long budget = 1; budget <= 100; ++budget) {
    CAPTURE(budget);
    const int m = std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(budget)))));
    const auto mu = brownian_mu(m + 1);
    const auto got = allocate_levels(mu, budget);
    // Every vector of m + 1 positive integers with product <= budget.
    std::vector<int> cur(mu.size(), 1), best;
    double best_value = INFINITY;
    std::function<void(std::size_t, long long)> rec = [&](std::size_t i, long long prod) {
      if (i == cur.size()) {
        double v = 0;
        for (std::size_t j = 0; j < cur.size(); ++j) v += mu[j] * gauss1d_distortion(cur[j]);
        if (v < best_value - 1e-14 * best_value || (std::abs(v - best_value) <= 1e-14 * best_value && cur > best)) {
          best_value = std::min(best_value, v);
          best = cur;
        }
        return;
      }
      for (long long n = 1; prod * n <= budget; ++n) {
        cur[i] = static_cast<int>(n);
        rec(i + 1, prod * n);
      }
      cur[i] = 1;
    };
    rec(0, 1);
    CHECK(got == best);
  }
}

TEST_CASE("closed-form Gram entries match numeric integration") {
  using K = BasisFunction::Kind;
  const double T = 1.7;
  const std::vector<BasisFunction> basis{
      {K::Linear, 0.0, 1.0, 0},        {K::Constant, 0.0, 1.0, 0},     {K::Decay, 2.0, 1.0, 0},
      {K::Decay, 0.5, 1.0, 0},         {K::Sine, pi / T, 1.0, 0},      {K::Sine, 3 * pi / T, 1.0, 0},
      {K::Sine, pi / (2 * T), 1.0, 0}, {K::OneMinusCos, pi / T, 1.0, 0}, {K::OneMinusCos, 2 * pi / T, 1.0, 0},
      {K::Cosine, pi / T, 1.0, 0},     {K::Cosine, 5 * pi / T, 1.0, 0}, {K::Cosine, 3 * pi / (2 * T), 1.0, 0},
  };
  const GramMatrix g = gram_matrix(basis, T);
  double worst = 0.0;
  for (int i = 0; i < g.dim; ++i) {
    for (int j = 0; j < g.dim; ++j) {
      const auto& a = basis[static_cast<std::size_t>(i)];
      const auto& b = basis[static_cast<std::size_t>(j)];
      const double num = integrate([&](double t) { return a(t) * b(t); }, T);
      worst = std::max(worst, std::abs(num - g.entries(i, j)));
      CHECK(g.entries(i, j) == g.entries(j, i));
    }
  }
  CHECK(worst <= 1e-10);
  CHECK(inner_product(basis[4], basis[4], T) == doctest::Approx(T / 2));
  CHECK(inner_product(basis[0], basis[0], T) == doctest::Approx(T * T * T / 3));
}

TEST_CASE("Gram matrix of the Brownian type C basis is T/2 times the identity") {
  const double T = 1.3;
  const SeriesExpansion e = brownian_type_c(T, 21);
  const GramMatrix g = gram_matrix(e);
  CHECK(g.dim == 11);
  for (int i = 0; i < g.dim; ++i)
    for (int j = 0; j < g.dim; ++j) CHECK(std::abs(g.entries(i, j) - (i == j ? T / 2 : 0.0)) <= 1e-12);
}

TEST_CASE("Gram matrices are positive semidefinite") {
  const SeriesExpansion e = build_fbm(0.75, 1.0, 40, fbm_series(0.75, 1.0, 40));
  const ReducedKL kl = kl_reduce(e, 80);
  double trace = 0.0;
  for (int i = 0; i < kl.gram.dim; ++i) trace += kl.gram.entries(i, i);
  for (double v : kl.mu) CHECK(v >= -1e-10 * trace);
}

TEST_CASE("KL reduction of Brownian motion") {
  const double T = 1.0;
  const ReducedKL kl = kl_reduce(brownian_type_c(T, 21), 10);
  REQUIRE(kl.mu.size() == 11);
  for (int j = 0; j <= 10; ++j)
    CHECK(std::abs(kl.mu[static_cast<std::size_t>(j)] - T * T / ((j + 0.5) * (j + 0.5) * pi * pi)) <= 1e-8);
  CHECK(kl.trimmed == 0);
}

namespace {

void check_reduction(const SeriesExpansion& e, int m) {
  CAPTURE(e.label);
  const ReducedKL kl = kl_reduce(e, m);
  const int n = m + 1;
  const int r = static_cast<int>(kl.mu.size());
  // a^T G a = I
  double orth = 0.0;
  for (int j = 0; j < r; ++j)
    for (int l = 0; l < r; ++l) {
      double v = 0.0;
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) v += kl.eigvec_coeffs(i, j) * kl.gram.entries(i, k) * kl.eigvec_coeffs(k, l);
      orth = std::max(orth, std::abs(v - (j == l ? 1.0 : 0.0)));
    }
  CHECK(orth <= 1e-8);
  // Trace identity.
  double mu_sum = 0.0, trace = 0.0;
  for (double v : kl.mu) mu_sum += v;
  for (int i = 0; i < n; ++i) trace += std::pow(kl.basis[static_cast<std::size_t>(i)].amplitude, 2) * kl.gram.entries(i, i);
  CHECK(mu_sum == doctest::Approx(trace).epsilon(1e-10));
  CHECK(std::is_sorted(kl.mu.rbegin(), kl.mu.rend()));
  // Kernel reconstruction at random points.
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> u(0.0, e.horizon);
  double recon = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double s = u(gen), t = u(gen);
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < r; ++j) lhs += kl.mu[static_cast<std::size_t>(j)] * kl.eigenfunction(j, s) * kl.eigenfunction(j, t);
    for (int k = 0; k < n; ++k) {
      const auto& b = kl.basis[static_cast<std::size_t>(k)];
      rhs += b.amplitude * b.amplitude * b(s) * b(t);
    }
    recon = std::max(recon, std::abs(lhs - rhs));
  }
  CHECK(recon <= 1e-8);
}

}  // namespace

TEST_CASE("KL reduction invariants across families") {
  // Kept eigenvalues stay above ~1e-6 of the trace; below that the Gram
  // identity itself is limited by double rounding (error ~ eps * trace / mu).
  check_reduction(build_fbm(0.3, 1.0, 16, fbm_series(0.3, 1.0, 16)), 8);
  check_reduction(build_fbm(0.75, 2.0, 16, fbm_series(0.75, 2.0, 16)), 8);
  check_reduction(build_type_b(builtin_gamma(GammaKind::StretchedExp, {.hurst = 0.3}, 1.0), 16), 8);
  check_reduction(build_generalized_ou({.theta = 2.0, .sigma = 1.0, .sigma0 = 0.5}, 1.0, 16), 5);
  CHECK_THROWS_AS(kl_reduce(build_fbm(0.3, 1.0, 2, fbm_series(0.3, 1.0, 2)), 4), Error);
}

TEST_CASE("product quantizer") {
  const CosineSeries s = fbm_series(0.4, 1.0, 1024);
  const SeriesExpansion e = build_fbm(0.4, 1.0, 256, s);

  const FunctionalQuantizer one = product_quantizer(e, 1);
  CHECK(one.codebook_size() == 1);
  CHECK(one.codeword(0, 0.3) == 0.0);
  double variance = 0.0;
  for (const auto& b : expansion_basis(e)) variance += b.amplitude * b.amplitude * inner_product(b, b, 1.0);
  CHECK(one.distortion_sq == doctest::Approx(variance).epsilon(1e-10));

  double previous = INFINITY;
  for (long long budget : {5, 10, 20, 40}) {
    const FunctionalQuantizer q = product_quantizer(e, budget);
    CHECK(q.codebook_size() <= budget);
    CHECK(q.reduced.m == static_cast<int>(std::ceil(std::log2(static_cast<double>(budget)))));
    CHECK(q.distortion_sq < previous);
    previous = q.distortion_sq;
    for (long long c = 0; c < q.codebook_size(); ++c) CHECK(q.codeword(c, 0.0) == 0.0);
  }
  // Larger m at a fixed budget helps until the tail dominates.
  const double m1 = product_quantizer(e, 20, 1).distortion_sq;
  const double m5 = product_quantizer(e, 20, 5).distortion_sq;
  CHECK(m5 < m1);
  // The series adds the variance beyond the truncation.
  CHECK(product_quantizer(e, 20, std::nullopt, &s).distortion_sq > product_quantizer(e, 20).distortion_sq);
}

TEST_CASE("Monte Carlo distortion") {
  const SeriesExpansion e = build_fbm(0.4, 1.0, 256, fbm_series(0.4, 1.0, 256));
  const FunctionalQuantizer one = product_quantizer(e, 1);
  const McEstimate d1 = distortion_mc(one, e, 4000, 5);
  CHECK(std::abs(d1.estimate - one.distortion_sq) <= 4 * d1.stderr_ + 1e-4 * one.distortion_sq);

  double previous = INFINITY;
  for (long long budget : {5, 10, 20}) {
    const FunctionalQuantizer q = product_quantizer(e, budget);
    const McEstimate d = distortion_mc(q, e, 4000, 5);
    CHECK(d.estimate >= q.distortion_sq * (1 - 4 * d.stderr_ / d.estimate) - 1e-4 * q.distortion_sq);
    CHECK(d.estimate < previous);
    previous = d.estimate;
  }
  const McEstimate serial = distortion_mc(one, e, 200, 9, Exec::Serial);
  const McEstimate parallel = distortion_mc(one, e, 200, 9, Exec::Parallel);
  CHECK(serial.estimate == parallel.estimate);
  CHECK_THROWS_AS(distortion_mc(one, e, 50, 1), Error);
}

TEST_CASE("generalized OU codebook starts at the initial mean") {
  const SeriesExpansion e = build_generalized_ou({.theta = 2.0, .alpha = 0.0, .sigma = 1.0}, 1.0, 128);
  const FunctionalQuantizer q = product_quantizer(e, 20);
  CHECK(q.codebook_size() <= 20);
  for (long long c = 0; c < q.codebook_size(); ++c) CHECK(std::abs(q.codeword(c, 0.0)) <= 1e-15);
}

TEST_CASE("codebook export") {
  const SeriesExpansion e = build_fbm(0.4, 1.0, 64, fbm_series(0.4, 1.0, 64));
  const FunctionalQuantizer q = product_quantizer(e, 6);
  std::ostringstream os;
  write_codebook_csv(os, q, 8, "# test");
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# test");
  std::getline(is, line);
  CHECK(line.rfind("t,cw_0", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), ',') == q.codebook_size());
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 9);
  const auto j = nlohmann::json::parse(codebook_sidecar_json(q));
  CHECK(j["levels_per_dim"].size() == q.levels_per_dim.size());
  CHECK(j["mu"].size() == q.reduced.mu.size());
  CHECK(j["distortion_sq"].get<double>() == q.distortion_sq);
}
