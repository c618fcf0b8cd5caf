#pragma once

// Fast evaluation of finite sine and cosine sums on the uniform grid
// phi_j = pi j / L, j = 0..L, backed by FFTW's DST-I / DCT-I.

#include <span>

namespace specgauss::detail {

class TrigSynth {
 public:
  explicit TrigSynth(int length);
  ~TrigSynth();
  TrigSynth(const TrigSynth&) = delete;
  TrigSynth& operator=(const TrigSynth&) = delete;

  int length() const { return length_; }

  /// out[j] = sum_{k=1}^{L-1} a[k] sin(pi k j / L) for j = 0..L (a.size() == L+1,
  /// a[0] and a[L] ignored). Endpoints are exactly zero.
  void sine(std::span<const double> a, std::span<double> out) const;

  /// out[j] = sum_{k=0}^{L} b[k] cos(pi k j / L) for j = 0..L.
  void cosine(std::span<const double> b, std::span<double> out) const;

 private:
  int length_;
  void* sine_plan_ = nullptr;
  void* cosine_plan_ = nullptr;
};

}  // namespace specgauss::detail
