// Wall-clock comparison of the serial reference kernels against their OpenMP
// variants, and of direct summation against the transform-based synthesis.
// Usage: specgauss_bench [repeats]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "specgauss/exec.hpp"
#include "specgauss/expansion.hpp"
#include "specgauss/fourier.hpp"
#include "specgauss/validate.hpp"

using namespace specgauss;

namespace {

int repeats = 3;

double best_of(const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void row(const char* name, double a, double b, bool same, const char* agree = "identical") {
  std::printf("%-44s %10.4f %10.4f %8.2fx  %s\n", name, a, b, a / b, same ? agree : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) repeats = std::max(1, std::atoi(argv[1]));
  std::printf("threads available: %d, repeats: %d\n\n", thread_limit(), repeats);
  std::printf("%-44s %10s %10s %9s\n", "kernel", "A [s]", "B [s]", "A/B");

  const CosineSeries fbm = fbm_series(0.3, 1.0, 8192);
  const SeriesExpansion exp = build_fbm(0.3, 1.0, 4096, fbm);

  {
    PathBatch s, p;
    const double ts = best_of([&] { s = sample_paths_fast(exp, 4096, 64, 1, Exec::Serial); });
    const double tp = best_of([&] { p = sample_paths_fast(exp, 4096, 64, 1, Exec::Parallel); });
    row("fast synthesis N=M=4096, 64 paths (ser/par)", ts, tp, s.values == p.values);
  }
  {
    std::vector<double> grid(513);
    for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = static_cast<double>(j) / 512.0;
    PathBatch s, p;
    const double ts = best_of([&] { s = sample_paths(exp, grid, 16, 1, Exec::Serial); });
    const double tp = best_of([&] { p = sample_paths(exp, grid, 16, 1, Exec::Parallel); });
    row("direct N=4096, 513 pts, 16 paths (ser/par)", ts, tp, s.values == p.values);
  }
  {
    const SeriesExpansion small = exp.truncated(1024);
    std::vector<double> grid(1025);
    for (std::size_t j = 0; j < grid.size(); ++j) grid[j] = static_cast<double>(j) / 1024.0;
    PathBatch d, f;
    const double td = best_of([&] { d = sample_paths(small, grid, 16, 1, Exec::Serial); });
    const double tf = best_of([&] { f = sample_paths_fast(small, 1024, 16, 1, Exec::Serial); });
    double diff = 0.0;
    for (std::size_t i = 0; i < d.values.size(); ++i) diff = std::max(diff, std::abs(d.values[i] - f.values[i]));
    row("N=M=1024, 16 paths (direct/fast, serial)", td, tf, diff <= 1e-10, "within 1e-10");
  }
  {
    const GammaSpec g = builtin_gamma(GammaKind::StretchedExp, {.hurst = 0.3}, 1.0);
    CosineSeries s, p;
    const double ts = best_of([&] { s = coeffs_quadrature(g, 1024, 1e-10, Exec::Serial); });
    const double tp = best_of([&] { p = coeffs_quadrature(g, 1024, 1e-10, Exec::Parallel); });
    row("remainder quadrature k<=1024 (ser/par)", ts, tp, s.values == p.values);
  }
  {
    const int Ns[] = {16, 32, 64, 128};
    const SeriesExpansion ref = build_fbm(0.3, 1.0, 4096, fbm);
    RateProbeResult s, p;
    const double ts = best_of([&] { s = rate_probe(ref, Ns, 100, 2048, 9, -0.3, Exec::Serial); });
    const double tp = best_of([&] { p = rate_probe(ref, Ns, 100, 2048, 9, -0.3, Exec::Parallel); });
    row("rate probe, 100 replicates (ser/par)", ts, tp, s.sup_err_estimates == p.sup_err_estimates);
  }
  return 0;
}
