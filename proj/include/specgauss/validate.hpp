#pragma once

// Covariance oracles, Monte Carlo checks and empirical convergence-rate probes.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "specgauss/exec.hpp"
#include "specgauss/expansion.hpp"
#include "specgauss/fourier.hpp"
#include "specgauss/gamma.hpp"
#include "specgauss/io.hpp"

namespace specgauss {

struct FbmModel {
  double hurst;
};
struct BrownianModel {};
struct GenOuModel {
  OuParams params;
};
struct TypeAModel {
  GammaSpec gamma;
};
struct TypeBModel {
  GammaSpec gamma;
};
/// gamma given on (0, 2T).
struct TypeCModel {
  GammaSpec gamma;
};

struct CovModel {
  std::variant<FbmModel, BrownianModel, GenOuModel, TypeAModel, TypeBModel, TypeCModel> tag;
  double horizon = 1.0;
};

double analytic_cov(const CovModel& model, double s, double t);

/// Covariance of the truncated expansion, from its amplitudes.
double series_cov(const SeriesExpansion& exp, double s, double t);

struct CovEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Unbiased sample covariance of grid columns i and j with a jackknife
/// standard error. Needs at least 100 paths.
CovEstimate empirical_cov(const PathBatch& batch, std::size_t i, std::size_t j);

/// Every pair (i <= j) of grid columns against analytic_cov, accepted within
/// 4 standard errors.
std::vector<CheckRecord> covariance_checks(const CovModel& model, const PathBatch& batch,
                                           double n_stderr = 4.0);

struct RateProbeResult {
  std::vector<int> Ns;
  std::vector<double> sup_err_estimates;  // Monte Carlo E sup_grid |X - X^N|
  std::vector<double> std_errors;
  double fitted_slope = 0.0;              // of log(estimate / sqrt(log N)) vs log N
  double reference_slope = 0.0;
  int replicate_count = 0;
};

/// Truncations share one noise draw per replicate (coupled); `reference` is the
/// high-truncation stand-in for the full series. Sup over t is the max over the
/// uniform grid with M intervals.
RateProbeResult rate_probe(const SeriesExpansion& reference, std::span<const int> Ns,
                           int replicates, int M, std::uint64_t seed, double reference_slope,
                           Exec exec = Exec::Parallel);

/// fBm probe with reference truncation 32 max(Ns) and M = 16 max(Ns).
RateProbeResult rate_probe_fbm(double hurst, double T, std::span<const int> Ns, int replicates,
                               std::uint64_t seed, Exec exec = Exec::Parallel);

/// max over grid of |gamma(0) + sum_{k<=K} c_k (cos(k pi t/T) - 1) - gamma(|t|)|,
/// grid inside [-T, T]; K = series.k_max.
double cosine_reconstruction_error(const GammaSpec& spec, const CosineSeries& series, std::span<const double> grid);
double cosine_reconstruction_error(const GammaSpec& spec, int K, std::span<const double> grid);

/// Same reconstruction for H > 1/2:
/// |t|^{2H} = H T^{2H-2} t^2 + sum_k c_k (cos(k pi t/T) - 1), c_k from second_derivative_transform.
double fbm_high_reconstruction_check(double hurst, const CosineSeries& high_series,
                                     std::span<const double> grid);

/// sup_t E(B_t - B^N_t)^2 = sup_t sum_{k>N} (-c_k)(1 - cos(k pi t/T)) for each N,
/// explicit terms up to k_max on a uniform grid with M intervals plus the
/// extrapolated tail beyond k_max.
std::vector<double> sup_truncation_variance(const CosineSeries& series, std::span<const int> Ns, int M);

}  // namespace specgauss
