#include "trig_synth.hpp"

#include <fftw3.h>

#include <mutex>
#include <vector>

#include "specgauss/error.hpp"

namespace specgauss::detail {

namespace {
// FFTW planning is not thread safe; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
constexpr unsigned kFlags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
}  // namespace

TrigSynth::TrigSynth(int length) : length_(length) {
  if (length < 2) throw Error(Errc::BadParameter, "trig synthesis needs length >= 2");
  std::vector<double> in(static_cast<std::size_t>(length) + 1), out(in.size());
  std::lock_guard lock(planner_mutex());
  sine_plan_ = fftw_plan_r2r_1d(length - 1, in.data(), out.data(), FFTW_RODFT00, kFlags);
  cosine_plan_ = fftw_plan_r2r_1d(length + 1, in.data(), out.data(), FFTW_REDFT00, kFlags);
  if (!sine_plan_ || !cosine_plan_) throw Error(Errc::BadParameter, "FFTW planning failed");
}

TrigSynth::~TrigSynth() {
  std::lock_guard lock(planner_mutex());
  if (sine_plan_) fftw_destroy_plan(static_cast<fftw_plan>(sine_plan_));
  if (cosine_plan_) fftw_destroy_plan(static_cast<fftw_plan>(cosine_plan_));
}

void TrigSynth::sine(std::span<const double> a, std::span<double> out) const {
  const auto L = static_cast<std::size_t>(length_);
  // RODFT00 of size L-1: Y_j = 2 sum_k X_k sin(pi (j+1)(k+1) / L).
  fftw_execute_r2r(static_cast<fftw_plan>(sine_plan_), const_cast<double*>(a.data() + 1),
                   out.data() + 1);
  out[0] = 0.0;
  for (std::size_t j = 1; j < L; ++j) out[j] *= 0.5;
  out[L] = 0.0;
}

void TrigSynth::cosine(std::span<const double> b, std::span<double> out) const {
  const auto L = static_cast<std::size_t>(length_);
  // REDFT00 of size L+1: Y_j = X_0 + (-1)^j X_L + 2 sum_{k=1}^{L-1} X_k cos(pi j k / L).
  fftw_execute_r2r(static_cast<fftw_plan>(cosine_plan_), const_cast<double*>(b.data()), out.data());
  for (std::size_t j = 0; j <= L; ++j) {
    const double parity = (j % 2 == 0) ? 1.0 : -1.0;
    out[j] = 0.5 * (out[j] + b[0] + parity * b[L]);
  }
}

}  // namespace specgauss::detail
