#include "specgauss/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "specgauss/error.hpp"
#include "specgauss/exec.hpp"
#include "specgauss/expansion.hpp"
#include "specgauss/fourier.hpp"
#include "specgauss/io.hpp"
#include "specgauss/quantize.hpp"
#include "specgauss/validate.hpp"

namespace specgauss::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string command;
  std::string model;
  double hurst = 0.0;
  double T = 1.0;
  double theta = 1.0;
  double alpha = 0.0;
  double mu = 0.0;
  double sigma = 1.0;
  double sigma0 = 0.0;
  int kmax = 0;
  int N = 0;
  int grid = 0;
  int paths = 0;
  int nmin = 64;
  int replicates = 200;
  long long budget = 20;
  int dims = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string input;
  std::string format;
  int threads = 0;
};

// Options shared by every subcommand.
void add_model_options(CLI::App* sub, Config& c) {
  sub->add_option("--model", c.model, "fbm | brownian | gen-ou | fou")->required();
  sub->add_option("--hurst", c.hurst, "Hurst index (fbm, fou)");
  sub->add_option("--T", c.T, "horizon")->capture_default_str();
  sub->add_option("--theta", c.theta, "gen-ou mean reversion rate")->capture_default_str();
  sub->add_option("--alpha", c.alpha, "gen-ou mean level of the drift")->capture_default_str();
  sub->add_option("--mu", c.mu, "gen-ou mean of the initial value")->capture_default_str();
  sub->add_option("--sigma", c.sigma, "gen-ou volatility")->capture_default_str();
  sub->add_option("--sigma0", c.sigma0, "gen-ou initial standard deviation (default: stationary)");
  sub->add_option("--kmax", c.kmax, "coefficients to compute");
  sub->add_option("--out", c.out, "output file (default stdout)");
  sub->add_option("--format", c.format, "output format");
  sub->add_option("--threads", c.threads, "cap on worker threads");
}

void add_stochastic_options(CLI::App* sub, Config& c) {
  sub->add_option("--seed", c.seed, "RNG seed (fallback: SPECGAUSS_SEED)");
  sub->add_option("--N", c.N, "series truncation");
}

bool given(const CLI::App* sub, const std::string& name) { return sub->count(name) > 0; }

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

void resolve_seed(const CLI::App* sub, Config& c) {
  if (given(sub, "--seed")) return;
  const char* env = std::getenv("SPECGAUSS_SEED");
  require(env != nullptr && *env != '\0', "a seed is required (--seed or SPECGAUSS_SEED)");
  try {
    std::size_t used = 0;
    c.seed = std::stoull(env, &used);
    require(used == std::string(env).size(), "");
  } catch (const std::exception&) {
    throw UsageError("SPECGAUSS_SEED is not an unsigned integer");
  }
}

// Fills defaults and range-checks everything before any computation.
void finalize(const CLI::App* sub, Config& c) {
  const std::string& cmd = c.command;
  require(c.model == "fbm" || c.model == "brownian" || c.model == "gen-ou" || c.model == "fou",
          "unknown model '" + c.model + "'");
  require(c.T > 0.0 && std::isfinite(c.T), "--T must be positive");
  if (c.model == "fbm") {
    require(given(sub, "--hurst"), "fbm needs --hurst");
    require(c.hurst > 0.0 && c.hurst < 1.0 && c.hurst != 0.5,
            "fbm needs --hurst in (0, 1) other than 0.5 (use --model brownian)");
  }
  if (c.model == "fou") {
    require(given(sub, "--hurst"), "fou needs --hurst");
    require(c.hurst > 0.0 && c.hurst < 0.5, "fou needs --hurst in (0, 0.5)");
  }
  if (c.model == "gen-ou") {
    require(c.theta > 0.0 && c.sigma > 0.0, "gen-ou needs --theta > 0 and --sigma > 0");
    if (!given(sub, "--sigma0")) c.sigma0 = c.sigma / std::sqrt(2.0 * c.theta);
    require(c.sigma0 >= 0.0, "--sigma0 must be nonnegative");
  }
  require(c.threads >= 0, "--threads must be nonnegative");

  if (cmd == "coeffs") {
    if (c.kmax == 0) c.kmax = 4096;
    if (c.format.empty()) c.format = "csv";
    require(c.format == "csv" || c.format == "json", "coeffs writes csv or json");
  } else if (cmd == "simulate" || cmd == "validate-cov") {
    if (c.N == 0) c.N = 1024;
    if (c.grid == 0) c.grid = cmd == "simulate" ? 256 : 32;
    if (c.paths == 0) c.paths = cmd == "simulate" ? 1 : 20000;
    if (c.format.empty()) c.format = cmd == "simulate" ? "csv" : "json";
    if (cmd == "simulate")
      require(c.format == "csv" || c.format == "bin", "simulate writes csv or bin");
    else
      require(c.format == "json", "validate-cov writes a json report");
    require(c.paths >= 1, "--paths must be positive");
    if (c.input.empty()) resolve_seed(sub, c);
  } else if (cmd == "rate") {
    if (c.N == 0) c.N = 4096;
    if (c.format.empty()) c.format = "json";
    require(c.format == "json", "rate writes a json report");
    require(c.nmin >= 2 && c.nmin < c.N, "need 2 <= --nmin < --N");
    require(c.replicates >= 100, "--replicates must be at least 100");
    resolve_seed(sub, c);
  } else if (cmd == "quantize") {
    if (c.N == 0) c.N = 256;
    if (c.grid == 0) c.grid = 256;
    if (c.format.empty()) c.format = "csv";
    require(c.format == "csv", "quantize writes a csv codebook (plus a json sidecar with --out)");
    require(c.budget >= 1, "--budget must be positive");
    require(!given(sub, "--dims") || c.dims >= 1, "--dims must be positive");
  }
  require(c.N >= 0 && c.kmax >= 0, "--N and --kmax must be nonnegative");
  if (cmd != "coeffs") require(c.N >= 1, "--N must be positive");
  if (cmd != "coeffs" && cmd != "rate") require(c.grid >= 1, "--grid must be positive");
  // Coefficients backing an expansion must reach its truncation.
  if (cmd != "coeffs" && c.kmax == 0) c.kmax = c.model == "fou" ? c.N : 4 * c.N;
  if (cmd != "coeffs") c.kmax = std::max(c.kmax, c.N);
}

// Canonical text of everything that determines an artifact's content.
std::uint64_t config_hash(const Config& c, const CLI::App* sub) {
  std::ostringstream os;
  os << "command=" << c.command << ";model=" << c.model << ";T=" << format_double(c.T);
  if (c.model == "fbm" || c.model == "fou") os << ";hurst=" << format_double(c.hurst);
  if (c.model == "gen-ou")
    os << ";theta=" << format_double(c.theta) << ";alpha=" << format_double(c.alpha)
       << ";mu=" << format_double(c.mu) << ";sigma=" << format_double(c.sigma)
       << ";sigma0=" << format_double(c.sigma0);
  os << ";kmax=" << c.kmax << ";N=" << c.N << ";grid=" << c.grid << ";paths=" << c.paths
     << ";format=" << c.format;
  if (c.command == "rate") os << ";nmin=" << c.nmin << ";replicates=" << c.replicates;
  if (c.command == "quantize")
    os << ";budget=" << c.budget << ";dims=" << (given(sub, "--dims") ? c.dims : 0);
  return fnv1a64(os.str());
}

OuParams ou_params(const Config& c) {
  return {.theta = c.theta, .alpha = c.alpha, .mu = c.mu, .sigma = c.sigma, .sigma0 = c.sigma0};
}

CosineSeries model_series(const Config& c, int k_max) {
  if (c.model == "fbm") return fbm_series(c.hurst, c.T, k_max);
  if (c.model == "brownian") return coeffs_closed(ClosedModel::Brownian, {}, c.T, k_max);
  if (c.model == "gen-ou")
    return coeffs_closed(ClosedModel::GeneralizedOU, {c.theta, c.sigma}, c.T, k_max);
  return coeffs_quadrature(builtin_gamma(GammaKind::StretchedExp, {.hurst = c.hurst}, c.T), k_max,
                           1e-10);
}

SeriesExpansion model_expansion(const Config& c, const CosineSeries& series, int N) {
  if (c.model == "fbm") return build_fbm(c.hurst, c.T, N, series);
  if (c.model == "brownian")
    return build_type_c(builtin_gamma(GammaKind::MinusAbs, {}, 2.0 * c.T), series, c.T, N);
  if (c.model == "gen-ou") return build_generalized_ou(ou_params(c), c.T, N);
  return build_type_b(builtin_gamma(GammaKind::StretchedExp, {.hurst = c.hurst}, c.T), series, N);
}

CovModel model_cov(const Config& c) {
  if (c.model == "fbm") return {FbmModel{c.hurst}, c.T};
  if (c.model == "brownian") return {BrownianModel{}, c.T};
  if (c.model == "gen-ou") return {GenOuModel{ou_params(c)}, c.T};
  return {TypeBModel{builtin_gamma(GammaKind::StretchedExp, {.hurst = c.hurst}, c.T)}, c.T};
}

double model_rate(const Config& c) {
  return (c.model == "fbm" || c.model == "fou") ? -c.hurst : -0.5;
}

void emit(const Config& c, std::ostream& out, const std::string& content) {
  if (c.out.empty())
    out << content;
  else
    write_file_atomic(c.out, content);
}

PathBatch read_batch(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  in.clear();
  in.seekg(0);
  if (std::string(magic, 4) == "SGPB") return read_paths_bin(in);
  return read_paths_csv(in);
}

int cmd_coeffs(const Config& c, std::ostream& out) {
  const CosineSeries series = model_series(c, c.kmax);
  if (c.format == "csv") {
    std::ostringstream os;
    write_series_csv(os, series);
    emit(c, out, os.str());
    return kExitOk;
  }
  nlohmann::ordered_json j;
  j["version"] = std::string(kVersion);
  j["source"] = series.source_label;
  j["method"] = to_string(series.method);
  j["horizon"] = series.horizon;
  j["k_max"] = series.k_max;
  j["has_c0"] = series.has_c0;
  j["values"] = series.values;
  j["error_bounds"] = series.error_bounds;
  emit(c, out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_simulate(const Config& c, const CLI::App* sub, std::ostream& out) {
  const SeriesExpansion exp = model_expansion(c, model_series(c, c.kmax), c.N);
  const PathBatch batch = sample_paths_fast(exp, c.grid, c.paths, c.seed);
  std::ostringstream os;
  if (c.format == "csv")
    write_paths_csv(os, batch, provenance_line(c.seed, config_hash(c, sub)));
  else
    write_paths_bin(os, batch);
  emit(c, out, os.str());
  return kExitOk;
}

int cmd_validate_cov(const Config& c, std::ostream& out) {
  PathBatch batch;
  if (c.input.empty()) {
    const SeriesExpansion exp = model_expansion(c, model_series(c, c.kmax), c.N);
    batch = sample_paths_fast(exp, c.grid, c.paths, c.seed);
  } else {
    batch = read_batch(c.input);
  }
  const std::vector<CheckRecord> checks = covariance_checks(model_cov(c), batch);
  emit(c, out, validation_report_json(checks));
  for (const auto& check : checks)
    if (!check.pass) return kExitCheckFailed;
  return kExitOk;
}

int cmd_rate(const Config& c, std::ostream& out) {
  std::vector<int> Ns;
  for (long long n = c.nmin; n <= c.N; n *= 2) Ns.push_back(static_cast<int>(n));
  require(Ns.size() >= 2, "--nmin to --N must span at least one doubling");
  RateProbeResult r;
  if (c.model == "fbm") {
    r = rate_probe_fbm(c.hurst, c.T, Ns, c.replicates, c.seed);
  } else {
    const int n_ref = 32 * Ns.back();
    const SeriesExpansion ref = model_expansion(c, model_series(c, std::max(c.kmax, n_ref)), n_ref);
    r = rate_probe(ref, Ns, c.replicates, 16 * Ns.back(), c.seed, model_rate(c));
  }
  const double bound = 0.15;
  const double gap = std::abs(r.fitted_slope - r.reference_slope);
  const std::vector<CheckRecord> checks{{"slope", gap, bound, gap <= bound}};

  nlohmann::ordered_json j = nlohmann::ordered_json::parse(validation_report_json(checks));
  j["seed"] = c.seed;
  j["Ns"] = r.Ns;
  j["sup_error"] = r.sup_err_estimates;
  j["std_error"] = r.std_errors;
  j["fitted_slope"] = r.fitted_slope;
  j["reference_slope"] = r.reference_slope;
  j["replicates"] = r.replicate_count;
  emit(c, out, j.dump(2) + "\n");
  return checks.front().pass ? kExitOk : kExitCheckFailed;
}

int cmd_quantize(const Config& c, const CLI::App* sub, std::ostream& out) {
  const CosineSeries series = model_series(c, c.kmax);
  const SeriesExpansion exp = model_expansion(c, series, c.N);
  const std::optional<int> dims = given(sub, "--dims") ? std::optional<int>(c.dims) : std::nullopt;
  const FunctionalQuantizer q = product_quantizer(exp, c.budget, dims, &series);
  std::ostringstream os;
  write_codebook_csv(os, q, c.grid);
  emit(c, out, os.str());
  if (!c.out.empty()) write_file_atomic(c.out + ".json", codebook_sidecar_json(q));
  return kExitOk;
}

class ThreadLimitGuard {
 public:
  explicit ThreadLimitGuard(int n) : previous_(thread_limit()) { set_thread_limit(n); }
  ~ThreadLimitGuard() { set_thread_limit(previous_); }
  ThreadLimitGuard(const ThreadLimitGuard&) = delete;
  ThreadLimitGuard& operator=(const ThreadLimitGuard&) = delete;

 private:
  int previous_;
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Gaussian process simulation by trigonometric series", "specgauss"};
  app.require_subcommand(1, 1);

  CLI::App* coeffs = app.add_subcommand("coeffs", "cosine coefficients of the model");
  CLI::App* simulate = app.add_subcommand("simulate", "sample paths on a uniform grid");
  CLI::App* validate = app.add_subcommand("validate-cov", "empirical vs analytic covariance");
  CLI::App* rate = app.add_subcommand("rate", "Monte Carlo uniform convergence rate");
  CLI::App* quantize = app.add_subcommand("quantize", "product functional quantizer codebook");

  for (CLI::App* sub : {coeffs, simulate, validate, rate, quantize}) add_model_options(sub, c);
  for (CLI::App* sub : {simulate, validate, rate, quantize}) add_stochastic_options(sub, c);
  for (CLI::App* sub : {simulate, validate, quantize})
    sub->add_option("--grid", c.grid, "uniform grid intervals");
  for (CLI::App* sub : {simulate, validate})
    sub->add_option("--paths", c.paths, "number of paths");
  validate->add_option("--input", c.input, "check an existing simulate artifact (csv or bin)");
  rate->add_option("--nmin", c.nmin, "smallest truncation (powers of two up to --N)")
      ->capture_default_str();
  rate->add_option("--replicates", c.replicates, "Monte Carlo replicates")->capture_default_str();
  quantize->add_option("--budget", c.budget, "codebook size cap")->capture_default_str();
  quantize->add_option("--dims", c.dims, "reduced dimension (default ceil(log2 budget))");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  c.command = sub->get_name();
  try {
    finalize(sub, c);
    ThreadLimitGuard threads(c.threads);
    if (c.command == "coeffs") return cmd_coeffs(c, out);
    if (c.command == "simulate") return cmd_simulate(c, sub, out);
    if (c.command == "validate-cov") return cmd_validate_cov(c, out);
    if (c.command == "rate") return cmd_rate(c, out);
    return cmd_quantize(c, sub, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numerical(e.code()) ? kExitNumerical : kExitUsage;
  }
}

}  // namespace specgauss::cli
