#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

namespace lrdbreak {

namespace detail {

// FFTW's planner is not re-entrant; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace detail

/// Forward complex DFT, X_k = sum_j x_j exp(-2 pi i j k / n), of any length.
class ForwardFft {
 public:
  explicit ForwardFft(std::size_t n)
      : n_(n), buffer_(fftw_alloc_complex(n)) {
    std::lock_guard lock(detail::fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buffer_.get(), buffer_.get(),
                             FFTW_FORWARD, FFTW_ESTIMATE);
  }

  ~ForwardFft() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }

  ForwardFft(const ForwardFft&) = delete;
  ForwardFft& operator=(const ForwardFft&) = delete;

  std::size_t size() const { return n_; }

  /// Transforms `data` in place; data.size() must equal size().
  void operator()(std::span<std::complex<double>> data) {
    auto* raw = buffer_.get();
    for (std::size_t i = 0; i < n_; ++i) {
      raw[i][0] = data[i].real();
      raw[i][1] = data[i].imag();
    }
    fftw_execute(plan_);
    for (std::size_t i = 0; i < n_; ++i) data[i] = {raw[i][0], raw[i][1]};
  }

 private:
  std::size_t n_;
  std::unique_ptr<fftw_complex, detail::FftwFree> buffer_;
  fftw_plan plan_{};
};

}  // namespace lrdbreak
