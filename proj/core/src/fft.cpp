#include "blochcav/fft.hpp"

#include <mutex>
#include <new>

namespace blochcav {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftWorkspace::FftWorkspace(std::size_t n) : n_(n) {
  std::lock_guard lock(planner_mutex());
  buffer_ = fftw_alloc_complex(n);
  if (buffer_ == nullptr) throw std::bad_alloc();
  const int len = static_cast<int>(n);
  forward_ = fftw_plan_dft_1d(len, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
  backward_ = fftw_plan_dft_1d(len, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
  for (std::size_t j = 0; j < n; ++j) buffer_[j][0] = buffer_[j][1] = 0.0;
}

FftWorkspace::FftWorkspace(FftWorkspace&& other) noexcept
    : n_(other.n_), buffer_(other.buffer_), forward_(other.forward_), backward_(other.backward_) {
  other.buffer_ = nullptr;
  other.forward_ = nullptr;
  other.backward_ = nullptr;
  other.n_ = 0;
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
  if (buffer_) fftw_free(buffer_);
}

void FftWorkspace::forward() { fftw_execute(forward_); }
void FftWorkspace::backward() { fftw_execute(backward_); }

}  // namespace blochcav
