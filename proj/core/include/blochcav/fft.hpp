#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <fftw3.h>

namespace blochcav {

/// Owns an aligned complex buffer and a forward/backward FFTW plan pair.
/// Plans are created with FFTW_ESTIMATE so that repeated runs execute the
/// same algorithm and produce bit-identical output. Planning is serialized
/// internally; executing distinct FftWorkspace objects concurrently is safe.
class FftWorkspace {
 public:
  explicit FftWorkspace(std::size_t n);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
  FftWorkspace(FftWorkspace&& other) noexcept;
  FftWorkspace& operator=(FftWorkspace&&) = delete;

  [[nodiscard]] std::size_t size() const { return n_; }
  [[nodiscard]] std::span<std::complex<double>> data() {
    return {reinterpret_cast<std::complex<double>*>(buffer_), n_};
  }

  /// Unnormalized sum_j x_j exp(-2 pi i j m / n), in place.
  void forward();
  /// Unnormalized sum_m X_m exp(+2 pi i j m / n), in place.
  void backward();

 private:
  std::size_t n_ = 0;
  fftw_complex* buffer_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

}  // namespace blochcav
