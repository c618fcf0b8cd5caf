#pragma once

// Functional quantization: optimal scalar Gaussian quantizers, level
// allocation under a product budget, KL reduction of a truncated expansion on
// its (non-orthonormal) trigonometric basis, and product codebooks.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specgauss/expansion.hpp"
#include "specgauss/fourier.hpp"

namespace specgauss {

struct Quantizer1D {
  int n = 1;
  std::vector<double> levels;      // increasing
  std::vector<double> boundaries;  // n - 1 midpoints
  double distortion = 1.0;         // E (Z - q(Z))^2, Z standard normal
  bool converged = true;
  int iterations = 0;

  /// Index of the cell containing z.
  int cell(double z) const;
  double quantize(double z) const { return levels[static_cast<std::size_t>(cell(z))]; }
};

/// Lloyd iteration for the standard normal law, stopped when no level moves by
/// more than tol. On hitting the iteration cap the best iterate is returned
/// with converged = false.
Quantizer1D gauss1d_quantizer(int n, double tol = 1e-10, int max_iterations = 200000);

/// Optimal scalar distortion for n levels, memoized. Lloyd up to
/// kExactLevelLimit levels, the high-resolution asymptote beyond.
inline constexpr int kExactLevelLimit = 1024;
double gauss1d_distortion(int n);

/// argmin sum_i mu_i d(N_i) subject to prod N_i <= budget, N_i >= 1.
/// Entries with mu_i <= 0 get a single level. Ties go to the lexicographically
/// largest vector.
std::vector<int> allocate_levels(std::span<const double> mu, long long budget);

/// One basis function of an expansion, scaled by its amplitude in the series.
struct BasisFunction {
  enum class Kind { Linear, Constant, Sine, OneMinusCos, Cosine, Decay };
  Kind kind = Kind::Sine;
  double rate = 0.0;       // angular frequency, or decay rate for Decay
  double amplitude = 0.0;  // lambda_i
  int slot = 0;            // index of its normal draw in the per-path stream
  double operator()(double t) const;
};

/// Basis functions of `exp` with nonzero amplitude, in canonical order: the
/// Z_0 term first, then for each k the sine and its partner.
std::vector<BasisFunction> expansion_basis(const SeriesExpansion& exp);

struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
};

struct GramMatrix {
  int dim = 0;
  DenseMatrix entries;  // <e_i, e_j> in L^2[0, T]
};

/// Closed-form L^2[0, T] inner products of unscaled basis functions.
double inner_product(const BasisFunction& a, const BasisFunction& b, double T);
GramMatrix gram_matrix(std::span<const BasisFunction> basis, double T);
GramMatrix gram_matrix(const SeriesExpansion& exp);

struct ReducedKL {
  int m = 0;
  std::vector<double> mu;              // descending, one per retained direction
  DenseMatrix eigvec_coeffs;           // column j holds a_j with f_j = sum_i a_ij e_i
  GramMatrix gram;
  std::vector<BasisFunction> basis;    // the e_i with their amplitudes lambda_i
  double horizon = 1.0;
  int trimmed = 0;                     // Gram null-space directions dropped

  /// f_j(t).
  double eigenfunction(int j, double t) const;
};

/// Eigen-reduction of the covariance restricted to the first m + 1 basis
/// functions of `exp`.
ReducedKL kl_reduce(const SeriesExpansion& exp, int m);

struct FunctionalQuantizer {
  ReducedKL reduced;
  std::vector<int> levels_per_dim;
  std::vector<Quantizer1D> scalar;
  double distortion_sq = 0.0;
  double residual_variance = 0.0;  // integrated variance outside the reduced span
  long long budget = 1;
  std::function<double(double)> mean_fn;

  long long codebook_size() const;
  /// Multi-index of codeword `index`, last dimension varying fastest.
  std::vector<int> multi_index(long long index) const;
  double codeword(long long index, double t) const;
};

/// m defaults to max(1, ceil(log2 budget)). `series` (the coefficients the
/// expansion was built from) adds the integrated variance beyond the
/// expansion's truncation to distortion_sq.
FunctionalQuantizer product_quantizer(const SeriesExpansion& exp, long long budget,
                                      std::optional<int> m = std::nullopt,
                                      const CosineSeries* series = nullptr);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Integrated squared error of nearest-codeword quantization, against fresh
/// paths of `exp` on a 257-point uniform grid (trapezoid rule in t).
McEstimate distortion_mc(const FunctionalQuantizer& q, const SeriesExpansion& exp, int n_paths,
                         std::uint64_t seed, Exec exec = Exec::Parallel);

/// `t,cw_0,...,cw_{K-1}` on the uniform grid with M intervals.
void write_codebook_csv(std::ostream& os, const FunctionalQuantizer& q, int M,
                        std::string_view header_line = {});
/// {"levels_per_dim", "mu", "distortion_sq", ...}
std::string codebook_sidecar_json(const FunctionalQuantizer& q);

}  // namespace specgauss
