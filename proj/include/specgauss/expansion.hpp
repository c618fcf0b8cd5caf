#pragma once

// Truncated trigonometric series expansions and path sampling.
//
//   fbm_low / type_a:  X_t = sum_k a_k (sin(k pi t/T) Z_k + (1 - cos(k pi t/T)) Z_{-k})
//   fbm_high:          X_t = a_0 t Z_0 + (same sum)
//   type_b:            X_t = a_0 Z_0 + sum_k a_k (sin(k pi t/T) Z_k + cos(k pi t/T) Z_{-k})
//   type_c:            X_t = sum_k a_k sin(k pi t / 2T) Z_k   (period 2T)
//
// Normal draws per path follow a fixed slot order: slot 0 holds Z_0; for the
// paired families Z_k and Z_{-k} sit in slots 2k-1 and 2k; for type_c Z_k sits
// in slot k. Truncations of one expansion therefore share their noise.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specgauss/exec.hpp"
#include "specgauss/fourier.hpp"
#include "specgauss/gamma.hpp"

namespace specgauss {

enum class Family { FbmLow, FbmHigh, TypeA, TypeB, TypeC };

const char* to_string(Family family) noexcept;

/// sigma0 e^{-theta t} Z_0 term of the generalized Ornstein-Uhlenbeck process.
struct InitCoupling {
  double sigma0 = 0.0;
  double theta = 0.0;
};

struct SeriesExpansion {
  Family family = Family::TypeA;
  double horizon = 1.0;
  double period = 1.0;
  int truncation = 0;
  double drift_amp = 0.0;
  std::vector<double> sin_amp;  // index k = 0..N; entry 0 unused
  std::vector<double> cos_amp;  // partner amplitudes; empty for type_c
  std::function<double(double)> mean_fn;
  std::optional<InitCoupling> init;
  std::string label;
  int clamped_radicands = 0;

  bool has_partner() const { return family != Family::TypeC; }
  double mean(double t) const { return mean_fn ? mean_fn(t) : 0.0; }
  /// Same expansion cut at n <= truncation terms.
  SeriesExpansion truncated(int n) const;
};

/// Coefficient series matching the fBm branch: c(t^{2H}) for H < 1/2,
/// the second-derivative transform of c(-2H(2H-1) t^{2H-2}) for H > 1/2.
CosineSeries fbm_series(double hurst, double T, int k_max, double tol = 1e-10,
                        Exec exec = Exec::Parallel);

SeriesExpansion build_fbm(double hurst, double T, int N, const CosineSeries& coeff_source);

SeriesExpansion build_type_a(const GammaSpec& spec, const CosineSeries& series, int N);
SeriesExpansion build_type_a(const GammaSpec& spec, int N);

/// `spec` describes gamma with -gamma in the class (orientation -1).
SeriesExpansion build_type_b(const GammaSpec& spec, const CosineSeries& series, int N);
SeriesExpansion build_type_b(const GammaSpec& spec, int N);

/// `spec` lives on (0, 2T) with -gamma in the class; the process lives on [0, T].
SeriesExpansion build_type_c(const GammaSpec& spec, const CosineSeries& series, double T, int N);
SeriesExpansion build_type_c(const GammaSpec& spec, double T, int N);

struct OuParams {
  double theta = 1.0;
  double alpha = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  double sigma0 = 0.0;
};

SeriesExpansion build_generalized_ou(const OuParams& params, double T, int N);

struct PathBatch {
  std::vector<double> grid;
  std::vector<double> values;  // row-major: path p occupies [p * grid.size(), (p+1) * grid.size())
  int n_paths = 0;
  std::uint64_t seed = 0;
  std::string expansion_ref;
  int truncation = 0;

  std::size_t points() const { return grid.size(); }
  double at(int path, std::size_t j) const {
    return values[static_cast<std::size_t>(path) * grid.size() + j];
  }
  std::span<const double> path(int p) const {
    return {values.data() + static_cast<std::size_t>(p) * grid.size(), grid.size()};
  }
};

/// Direct summation on an arbitrary grid in [0, T].
PathBatch sample_paths(const SeriesExpansion& exp, std::span<const double> grid, int n_paths,
                       std::uint64_t seed, Exec exec = Exec::Parallel);

/// Uniform grid t_j = j T / M, j = 0..M, through fast sine/cosine transforms.
PathBatch sample_paths_fast(const SeriesExpansion& exp, int M, int n_paths, std::uint64_t seed,
                            Exec exec = Exec::Parallel);

/// Smallest N >= 1 with sqrt(2 tail_sum(N)) <= eps.
long long truncation_for_tolerance(const CosineSeries& series, double eps);

namespace kernels {

int normals_per_path(const SeriesExpansion& exp);
void draw_normals(std::uint64_t seed, std::uint64_t path, std::span<double> out);

/// One path by direct summation at the given points.
void evaluate_direct(const SeriesExpansion& exp, std::span<const double> z,
                     std::span<const double> grid, std::span<double> out);

/// Reusable workspace for evaluate_uniform on a fixed (expansion period, M).
class UniformEvaluator {
 public:
  UniformEvaluator(const SeriesExpansion& exp, int M);
  ~UniformEvaluator();
  UniformEvaluator(UniformEvaluator&&) noexcept;
  UniformEvaluator& operator=(UniformEvaluator&&) noexcept;

  int grid_intervals() const;

  /// Series terms k in [k_first, k_last] on t_j = j T / M, plus the
  /// deterministic/drift/init part when include_base is set.
  void evaluate(std::span<const double> z, int k_first, int k_last, bool include_base,
                std::span<double> out) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace kernels

}  // namespace specgauss
