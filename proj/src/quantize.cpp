#include "specgauss/quantize.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "quadrature.hpp"
#include "specgauss/error.hpp"
#include "specgauss/io.hpp"

namespace specgauss {

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

double pdf(double x) { return std::isinf(x) ? 0.0 : kInvSqrt2Pi * std::exp(-0.5 * x * x); }
// Upper tail P(Z > x).
double upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

// P(a < Z < b), using whichever tail keeps precision.
double cell_mass(double a, double b) {
  if (a >= 0.0) return upper(a) - upper(b);
  if (b <= 0.0) return upper(-b) - upper(-a);
  return 1.0 - upper(b) - upper(-a);
}

double x_pdf(double x) { return std::isinf(x) ? 0.0 : x * pdf(x); }

struct Cells {
  std::vector<double> lo, hi;
};

Cells cells_of(const std::vector<double>& levels) {
  const std::size_t n = levels.size();
  Cells c;
  c.lo.resize(n);
  c.hi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    c.lo[i] = i == 0 ? -INFINITY : 0.5 * (levels[i - 1] + levels[i]);
    c.hi[i] = i + 1 == n ? INFINITY : 0.5 * (levels[i] + levels[i + 1]);
  }
  return c;
}

double scalar_distortion(const std::vector<double>& levels) {
  const Cells c = cells_of(levels);
  quad::CompensatedSum d;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double a = c.lo[i], b = c.hi[i], y = levels[i];
    const double p = cell_mass(a, b);
    // int_a^b (z - y)^2 phi(z) dz
    d.add(p * (1.0 + y * y) + x_pdf(a) - x_pdf(b) - 2.0 * y * (pdf(a) - pdf(b)));
  }
  return d.value();
}

void antisymmetrize(std::vector<double>& y) {
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double v = 0.5 * (y[n - 1 - i] - y[i]);
    y[i] = -v;
    y[n - 1 - i] = v;
  }
  if (n % 2 == 1) y[n / 2] = 0.0;
}

}  // namespace

int Quantizer1D::cell(double z) const {
  const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), z);
  return static_cast<int>(it - boundaries.begin());
}

Quantizer1D gauss1d_quantizer(int n, double tol, int max_iterations) {
  if (n < 1) throw Error(Errc::BadParameter, "quantizer needs n >= 1");
  if (!(tol > 0.0)) throw Error(Errc::BadParameter, "quantizer needs tol > 0");
  Quantizer1D q;
  q.n = n;
  // Start from the high-resolution optimum: level density proportional to phi^{1/3}.
  std::vector<double> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double p = (i + 0.5) / n;
    y[static_cast<std::size_t>(i)] = -std::sqrt(3.0) * std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
  }
  antisymmetrize(y);

  // Lloyd's map y -> centroids(midpoint cells of y). Its fixed point is the
  // optimum; the plain iteration contracts very slowly for large n (a global
  // stretch of the levels), so each step also tries a Newton step on
  // y - Lloyd(y) = 0, whose Jacobian is tridiagonal. The Newton candidate is
  // kept only if it is ordered and no worse in distortion than the Lloyd step.
  q.converged = false;
  const std::size_t n_levels = y.size();
  std::vector<double> lloyd(n_levels), newton(n_levels);
  std::vector<double> lower(n_levels), diag(n_levels), upper_d(n_levels), rhs(n_levels);
  for (int it = 1; it <= max_iterations; ++it) {
    const Cells c = cells_of(y);
    double move = 0.0;
    for (std::size_t i = 0; i < n_levels; ++i) {
      const double a = c.lo[i], b = c.hi[i];
      const double p = cell_mass(a, b);
      const double cen = (pdf(a) - pdf(b)) / p;
      lloyd[i] = cen;
      move = std::max(move, std::abs(cen - y[i]));
      // d centroid / d boundary, then chain through the midpoints.
      const double da = std::isinf(a) ? 0.0 : pdf(a) * (cen - a) / p;
      const double db = std::isinf(b) ? 0.0 : pdf(b) * (b - cen) / p;
      lower[i] = 0.5 * da;
      upper_d[i] = 0.5 * db;
      diag[i] = 0.5 * (da + db) - 1.0;
      rhs[i] = -(cen - y[i]);
    }
    q.iterations = it;
    // `move` is the centroid residual of the current levels; keep them if small enough.
    if (move < tol) {
      q.converged = true;
      break;
    }
    antisymmetrize(lloyd);

    // Thomas algorithm for the tridiagonal system.
    bool ok = true;
    for (std::size_t i = 1; i < n_levels && ok; ++i) {
      if (diag[i - 1] == 0.0) ok = false;
      const double w = lower[i] / diag[i - 1];
      diag[i] -= w * upper_d[i - 1];
      rhs[i] -= w * rhs[i - 1];
    }
    if (ok && diag[n_levels - 1] != 0.0) {
      newton[n_levels - 1] = rhs[n_levels - 1] / diag[n_levels - 1];
      for (std::size_t i = n_levels - 1; i-- > 0;) newton[i] = (rhs[i] - upper_d[i] * newton[i + 1]) / diag[i];
      for (std::size_t i = 0; i < n_levels; ++i) newton[i] += y[i];
      antisymmetrize(newton);
      ok = std::all_of(newton.begin(), newton.end(), [](double v) { return std::isfinite(v); }) &&
           std::is_sorted(newton.begin(), newton.end()) &&
           std::adjacent_find(newton.begin(), newton.end()) == newton.end();
    } else {
      ok = false;
    }
    if (ok && scalar_distortion(newton) <= scalar_distortion(lloyd) * (1.0 + 1e-12))
      y.swap(newton);
    else
      y.swap(lloyd);
  }
  q.levels = y;
  q.boundaries.resize(y.size() - 1);
  for (std::size_t i = 0; i + 1 < y.size(); ++i) q.boundaries[i] = 0.5 * (y[i] + y[i + 1]);
  q.distortion = scalar_distortion(y);
  return q;
}

double gauss1d_distortion(int n) {
  if (n < 1) throw Error(Errc::BadParameter, "quantizer needs n >= 1");
  static std::mutex mutex;
  static std::map<int, double> cache;
  const int exact_n = std::min(n, kExactLevelLimit);
  double d;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(exact_n);
    if (it == cache.end()) it = cache.emplace(exact_n, gauss1d_quantizer(exact_n).distortion).first;
    d = it->second;
  }
  if (n == exact_n) return d;
  // n^2 d(n) has nearly reached its limit; extend with the 1/n^2 law.
  const double r = static_cast<double>(exact_n) / n;
  return d * r * r;
}

std::vector<int> allocate_levels(std::span<const double> mu, long long budget) {
  if (budget < 1) throw Error(Errc::BadParameter, "budget must be >= 1");
  const std::size_t dims = mu.size();
  std::vector<int> result(dims, 1);
  // Work in descending-mu order over the dimensions that carry variance.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dims; ++i)
    if (mu[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mu[a] > mu[b]; });
  const std::size_t d = order.size();
  if (d == 0) return result;

  std::vector<double> w(d);
  for (std::size_t i = 0; i < d; ++i) w[i] = mu[order[i]];
  std::vector<double> dist(static_cast<std::size_t>(budget) + 1, 0.0);
  for (long long n = 1; n <= budget; ++n) dist[static_cast<std::size_t>(n)] = gauss1d_distortion(static_cast<int>(n));

  std::vector<int> cur(d, 1), best(d, 1);
  double best_value = INFINITY;
  // Vectors are visited in lexicographically decreasing order, so among
  // (numerically) tied optima the first one found is kept.
  auto better = [&](double v) {
    return std::isinf(best_value) || v < best_value - 1e-14 * std::abs(best_value);
  };

  auto dfs = [&](auto&& self, std::size_t i, long long prod, long long cap, double value) -> void {
    if (i == d) {
      if (better(value)) {
        best_value = value;
        best = cur;
      }
      return;
    }
    const long long hi = std::min(cap, budget / prod);
    for (long long n = hi; n >= 2; --n) {
      cur[i] = static_cast<int>(n);
      self(self, i + 1, prod * n, n, value + w[i] * dist[static_cast<std::size_t>(n)]);
    }
    // All remaining dimensions get one level.
    double rest = value;
    for (std::size_t j = i; j < d; ++j) {
      cur[j] = 1;
      rest += w[j];
    }
    if (better(rest)) {
      best_value = rest;
      best = cur;
    }
  };
  dfs(dfs, 0, 1, budget, 0.0);
  for (std::size_t i = 0; i < d; ++i) result[order[i]] = best[i];
  return result;
}

// ---------------------------------------------------------------------------
// Basis functions and Gram matrices.

double BasisFunction::operator()(double t) const {
  switch (kind) {
    case Kind::Linear: return t;
    case Kind::Constant: return 1.0;
    case Kind::Sine: return std::sin(rate * t);
    case Kind::OneMinusCos: {
      const double h = std::sin(0.5 * rate * t);
      return 2.0 * h * h;
    }
    case Kind::Cosine: return std::cos(rate * t);
    case Kind::Decay: return std::exp(-rate * t);
  }
  return 0.0;
}

std::vector<BasisFunction> expansion_basis(const SeriesExpansion& exp) {
  using K = BasisFunction::Kind;
  std::vector<BasisFunction> out;
  const bool paired = exp.has_partner();
  if (exp.family == Family::FbmHigh && exp.drift_amp != 0.0) out.push_back({K::Linear, 0.0, exp.drift_amp, 0});
  if (exp.family == Family::TypeB && exp.drift_amp != 0.0) out.push_back({K::Constant, 0.0, exp.drift_amp, 0});
  if (exp.init && exp.init->sigma0 != 0.0) out.push_back({K::Decay, exp.init->theta, exp.init->sigma0, 0});
  const K partner = exp.family == Family::TypeB ? K::Cosine : K::OneMinusCos;
  for (int k = 1; k <= exp.truncation; ++k) {
    const auto i = static_cast<std::size_t>(k);
    const double w = k * kPi / exp.period;
    if (exp.sin_amp[i] != 0.0) out.push_back({K::Sine, w, exp.sin_amp[i], paired ? 2 * k - 1 : k});
    if (paired && exp.cos_amp[i] != 0.0) out.push_back({partner, w, exp.cos_amp[i], 2 * k});
  }
  return out;
}

namespace {

// Atoms on [0, T]: 1, t, sin(w t), cos(w t), exp(-theta t).
enum class Atom { One, Lin, Sin, Cos, Exp };
struct Term {
  double coef;
  Atom atom;
  double rate;
};

std::vector<Term> atoms_of(const BasisFunction& f) {
  using K = BasisFunction::Kind;
  switch (f.kind) {
    case K::Linear: return {{1.0, Atom::Lin, 0.0}};
    case K::Constant: return {{1.0, Atom::One, 0.0}};
    case K::Sine: return {{1.0, Atom::Sin, f.rate}};
    case K::OneMinusCos: return {{1.0, Atom::One, 0.0}, {-1.0, Atom::Cos, f.rate}};
    case K::Cosine: return {{1.0, Atom::Cos, f.rate}};
    case K::Decay: return {{1.0, Atom::Exp, f.rate}};
  }
  return {};
}

// int_0^T sin(u t) dt and int_0^T cos(u t) dt, including u = 0.
double int_sin(double u, double T) { return u == 0.0 ? 0.0 : (1.0 - std::cos(u * T)) / u; }
double int_cos(double u, double T) { return u == 0.0 ? T : std::sin(u * T) / u; }

double atom_product(Atom x, double a, Atom y, double b, double T) {
  if (static_cast<int>(x) > static_cast<int>(y)) {
    std::swap(x, y);
    std::swap(a, b);
  }
  const double T2 = T * T;
  switch (x) {
    case Atom::One:
      switch (y) {
        case Atom::One: return T;
        case Atom::Lin: return 0.5 * T2;
        case Atom::Sin: return int_sin(b, T);
        case Atom::Cos: return int_cos(b, T);
        case Atom::Exp: return -std::expm1(-b * T) / b;
      }
      break;
    case Atom::Lin:
      switch (y) {
        case Atom::Lin: return T2 * T / 3.0;
        case Atom::Sin: return (std::sin(b * T) - b * T * std::cos(b * T)) / (b * b);
        case Atom::Cos: return (std::cos(b * T) + b * T * std::sin(b * T) - 1.0) / (b * b);
        case Atom::Exp: return (1.0 - std::exp(-b * T) * (1.0 + b * T)) / (b * b);
        default: break;
      }
      break;
    case Atom::Sin:
      switch (y) {
        case Atom::Sin: return 0.5 * (int_cos(a - b, T) - int_cos(a + b, T));
        case Atom::Cos: return 0.5 * (int_sin(a + b, T) + int_sin(a - b, T));
        case Atom::Exp: {
          const double e = std::exp(-b * T);
          return (a - e * (b * std::sin(a * T) + a * std::cos(a * T))) / (a * a + b * b);
        }
        default: break;
      }
      break;
    case Atom::Cos:
      switch (y) {
        case Atom::Cos: return 0.5 * (int_cos(a - b, T) + int_cos(a + b, T));
        case Atom::Exp: {
          const double e = std::exp(-b * T);
          return (b + e * (a * std::sin(a * T) - b * std::cos(a * T))) / (a * a + b * b);
        }
        default: break;
      }
      break;
    case Atom::Exp:
      return -std::expm1(-(a + b) * T) / (a + b);
  }
  return 0.0;
}

}  // namespace

double inner_product(const BasisFunction& f, const BasisFunction& g, double T) {
  double sum = 0.0;
  for (const Term& x : atoms_of(f))
    for (const Term& y : atoms_of(g)) sum += x.coef * y.coef * atom_product(x.atom, x.rate, y.atom, y.rate, T);
  return sum;
}

GramMatrix gram_matrix(std::span<const BasisFunction> basis, double T) {
  GramMatrix g;
  g.dim = static_cast<int>(basis.size());
  g.entries.rows = g.entries.cols = g.dim;
  g.entries.data.assign(static_cast<std::size_t>(g.dim) * g.dim, 0.0);
  for (int i = 0; i < g.dim; ++i) {
    for (int j = i; j < g.dim; ++j) {
      const double v = inner_product(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)], T);
      g.entries(i, j) = v;
      g.entries(j, i) = v;
    }
  }
  return g;
}

GramMatrix gram_matrix(const SeriesExpansion& exp) {
  const auto basis = expansion_basis(exp);
  return gram_matrix(basis, exp.horizon);
}

double ReducedKL::eigenfunction(int j, double t) const {
  double v = 0.0;
  for (int i = 0; i < eigvec_coeffs.rows; ++i) v += eigvec_coeffs(i, j) * basis[static_cast<std::size_t>(i)](t);
  return v;
}

ReducedKL kl_reduce(const SeriesExpansion& exp, int m) {
  if (m < 0) throw Error(Errc::BadParameter, "kl_reduce needs m >= 0");
  auto basis = expansion_basis(exp);
  if (static_cast<std::size_t>(m) + 1 > basis.size())
    throw Error(Errc::BadParameter, "expansion has fewer than m + 1 random terms");
  basis.resize(static_cast<std::size_t>(m) + 1);

  ReducedKL out;
  out.m = m;
  out.horizon = exp.horizon;
  out.gram = gram_matrix(basis, exp.horizon);
  out.basis = basis;

  const int n = m + 1;
  Eigen::MatrixXd G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) G(i, j) = out.gram.entries(i, j);
  Eigen::VectorXd lambda2(n);
  for (int i = 0; i < n; ++i) lambda2(i) = basis[static_cast<std::size_t>(i)].amplitude * basis[static_cast<std::size_t>(i)].amplitude;

  // Lambda^2 G a = mu a is similar to the symmetric problem (Lambda G Lambda) w = mu w
  // with a = Lambda w / sqrt(mu), which gives a^T G a = I without forming G^{-1/2}.
  // Directions with mu below 1e-12 trace span the numerical null space of G.
  Eigen::MatrixXd S = lambda2.cwiseSqrt().asDiagonal() * G * lambda2.cwiseSqrt().asDiagonal();
  S = 0.5 * (S + S.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solve(S);
  if (solve.info() != Eigen::Success) throw Error(Errc::GramSingular, "reduced eigenproblem failed");
  const double cutoff = 1e-12 * S.trace();
  std::vector<int> keep;  // descending eigenvalue order
  for (int i = n - 1; i >= 0; --i)
    if (solve.eigenvalues()(i) > cutoff) keep.push_back(i);
  const int r = static_cast<int>(keep.size());
  out.trimmed = n - r;
  if (r == 0) throw Error(Errc::GramSingular, "covariance is numerically zero on the basis");

  out.mu.resize(static_cast<std::size_t>(r));
  out.eigvec_coeffs.rows = n;
  out.eigvec_coeffs.cols = r;
  out.eigvec_coeffs.data.assign(static_cast<std::size_t>(n) * r, 0.0);
  for (int j = 0; j < r; ++j) {
    const int src = keep[static_cast<std::size_t>(j)];
    const double mu = solve.eigenvalues()(src);
    out.mu[static_cast<std::size_t>(j)] = mu;
    const Eigen::VectorXd a = lambda2.cwiseSqrt().cwiseProduct(solve.eigenvectors().col(src)) / std::sqrt(mu);
    // Fix the sign so each eigenfunction has a positive leading coefficient.
    int lead = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(a(i)) > std::abs(a(lead)) * (1.0 + 1e-9)) lead = i;
    const double sign = a(lead) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) out.eigvec_coeffs(i, j) = sign * a(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Product quantizer.

long long FunctionalQuantizer::codebook_size() const {
  long long k = 1;
  for (int n : levels_per_dim) k *= n;
  return k;
}

std::vector<int> FunctionalQuantizer::multi_index(long long index) const {
  std::vector<int> idx(levels_per_dim.size(), 0);
  for (std::size_t d = idx.size(); d-- > 0;) {
    const int n = levels_per_dim[d];
    idx[d] = static_cast<int>(index % n);
    index /= n;
  }
  return idx;
}

double FunctionalQuantizer::codeword(long long index, double t) const {
  const auto idx = multi_index(index);
  double v = mean_fn ? mean_fn(t) : 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const double y = scalar[j].levels[static_cast<std::size_t>(idx[j])];
    if (y != 0.0) v += std::sqrt(reduced.mu[j]) * y * reduced.eigenfunction(static_cast<int>(j), t);
  }
  return v;
}

namespace {

// int_0^T of the variance carried by one coefficient c_k, per unit |c_k|.
double variance_weight(const SeriesExpansion& exp) {
  return exp.family == Family::TypeC ? 0.5 * exp.horizon : exp.horizon;
}

}  // namespace

FunctionalQuantizer product_quantizer(const SeriesExpansion& exp, long long budget,
                                      std::optional<int> m, const CosineSeries* series) {
  if (budget < 1) throw Error(Errc::BadParameter, "budget must be >= 1");
  const auto basis = expansion_basis(exp);
  if (basis.empty()) throw Error(Errc::BadParameter, "expansion has no random terms");
  int dim = m ? *m : std::max(1, static_cast<int>(std::ceil(std::log2(static_cast<double>(budget)))));
  if (dim < 0) throw Error(Errc::BadParameter, "m must be >= 0");
  dim = std::min(dim, static_cast<int>(basis.size()) - 1);

  FunctionalQuantizer q;
  q.budget = budget;
  q.mean_fn = exp.mean_fn;
  q.reduced = kl_reduce(exp, dim);
  q.levels_per_dim = allocate_levels(q.reduced.mu, budget);
  for (int n : q.levels_per_dim) q.scalar.push_back(gauss1d_quantizer(n));

  const double T = exp.horizon;
  quad::CompensatedSum residual;
  for (std::size_t i = static_cast<std::size_t>(dim) + 1; i < basis.size(); ++i) {
    const double a = basis[i].amplitude;
    residual.add(a * a * inner_product(basis[i], basis[i], T));
  }
  // Variance lost to trimming inside the reduced span.
  quad::CompensatedSum kept, mu_total;
  for (int i = 0; i <= dim; ++i) {
    const double a = q.reduced.basis[static_cast<std::size_t>(i)].amplitude;
    kept.add(a * a * q.reduced.gram.entries(i, i));
  }
  for (double v : q.reduced.mu) mu_total.add(v);
  residual.add(std::max(0.0, kept.value() - mu_total.value()));
  if (series && series->k_max > exp.truncation) residual.add(variance_weight(exp) * tail_sum(*series, exp.truncation));
  q.residual_variance = residual.value();

  quad::CompensatedSum total;
  total.add(q.residual_variance);
  for (std::size_t j = 0; j < q.reduced.mu.size(); ++j)
    total.add(q.reduced.mu[j] * q.scalar[j].distortion);
  q.distortion_sq = total.value();
  return q;
}

McEstimate distortion_mc(const FunctionalQuantizer& q, const SeriesExpansion& exp, int n_paths,
                         std::uint64_t seed, Exec exec) {
  if (n_paths < 100) throw Error(Errc::TooFewPaths, "distortion_mc needs at least 100 paths");
  constexpr int M = 256;
  const kernels::UniformEvaluator evaluator(exp, M);
  const ReducedKL& kl = q.reduced;
  const int n = kl.m + 1;
  const int r = static_cast<int>(kl.mu.size());
  const double T = exp.horizon;

  // Coordinate map: Y_j = sum_i lambda_i z_i (G a_j)_i / sqrt(mu_j).
  std::vector<double> proj(static_cast<std::size_t>(n) * r, 0.0);
  for (int j = 0; j < r; ++j) {
    if (!(kl.mu[static_cast<std::size_t>(j)] > 0.0)) continue;
    const double s = 1.0 / std::sqrt(kl.mu[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i) {
      double ga = 0.0;
      for (int l = 0; l < n; ++l) ga += kl.gram.entries(i, l) * kl.eigvec_coeffs(l, j);
      proj[static_cast<std::size_t>(i) * r + j] = kl.basis[static_cast<std::size_t>(i)].amplitude * ga * s;
    }
  }
  std::vector<double> eig(static_cast<std::size_t>(r) * (M + 1)), mean(M + 1);
  for (int k = 0; k <= M; ++k) {
    const double t = T * k / M;
    mean[static_cast<std::size_t>(k)] = exp.mean(t);
    for (int j = 0; j < r; ++j)
      eig[static_cast<std::size_t>(j) * (M + 1) + k] = std::sqrt(kl.mu[static_cast<std::size_t>(j)]) * kl.eigenfunction(j, t);
  }

  const int count = kernels::normals_per_path(exp);
  std::vector<double> err(static_cast<std::size_t>(n_paths));
  auto body = [&](int p) {
    std::vector<double> z(static_cast<std::size_t>(count)), x(M + 1), code(mean);
    kernels::draw_normals(seed, static_cast<std::uint64_t>(p), z);
    evaluator.evaluate(z, 1, exp.truncation, true, x);
    for (int j = 0; j < r; ++j) {
      double y = 0.0;
      for (int i = 0; i < n; ++i)
        y += proj[static_cast<std::size_t>(i) * r + j] * z[static_cast<std::size_t>(kl.basis[static_cast<std::size_t>(i)].slot)];
      const double level = q.scalar[static_cast<std::size_t>(j)].quantize(y);
      if (level == 0.0) continue;
      for (int k = 0; k <= M; ++k) code[static_cast<std::size_t>(k)] += level * eig[static_cast<std::size_t>(j) * (M + 1) + k];
    }
    double s = 0.0;
    for (int k = 0; k <= M; ++k) {
      const double d = x[static_cast<std::size_t>(k)] - code[static_cast<std::size_t>(k)];
      s += (k == 0 || k == M ? 0.5 : 1.0) * d * d;
    }
    err[static_cast<std::size_t>(p)] = s * T / M;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < n_paths; ++p) body(p);
  } else {
    for (int p = 0; p < n_paths; ++p) body(p);
  }

  quad::CompensatedSum s;
  for (double e : err) s.add(e);
  McEstimate out;
  out.estimate = s.value() / n_paths;
  quad::CompensatedSum d;
  for (double e : err) d.add((e - out.estimate) * (e - out.estimate));
  out.stderr_ = std::sqrt(d.value() / (n_paths - 1.0) / n_paths);
  return out;
}

void write_codebook_csv(std::ostream& os, const FunctionalQuantizer& q, int M, std::string_view header_line) {
  if (M < 1) throw Error(Errc::BadParameter, "codebook grid needs M >= 1");
  if (!header_line.empty()) os << header_line << '\n';
  const long long K = q.codebook_size();
  os << 't';
  for (long long c = 0; c < K; ++c) os << ",cw_" << c;
  os << '\n';
  const double T = q.reduced.horizon;
  for (int j = 0; j <= M; ++j) {
    const double t = T * j / M;
    os << format_double(t);
    for (long long c = 0; c < K; ++c) os << ',' << format_double(q.codeword(c, t));
    os << '\n';
  }
}

std::string codebook_sidecar_json(const FunctionalQuantizer& q) {
  nlohmann::ordered_json j;
  j["version"] = std::string(kVersion);
  j["budget"] = q.budget;
  j["m"] = q.reduced.m;
  j["codebook_size"] = q.codebook_size();
  j["levels_per_dim"] = q.levels_per_dim;
  j["mu"] = q.reduced.mu;
  j["distortion_sq"] = q.distortion_sq;
  j["residual_variance"] = q.residual_variance;
  j["gram_trimmed"] = q.reduced.trimmed;
  return j.dump(2) + "\n";
}

}  // namespace specgauss
