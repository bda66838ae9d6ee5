#pragma once

// Thin RAII layer over FFTW's real-to-complex transforms.
//
// Conventions: forward carries no factor, inverse carries no factor either
// (callers divide by N). Only the non-negative half of the spectrum
// (N/2 + 1 coefficients) crosses this boundary.

#include <complex>
#include <cstddef>
#include <span>

namespace fwlab::detail {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return n_; }
  std::size_t half_size() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> in, std::span<std::complex<double>> out);
  // Input is read as a Hermitian half spectrum; it is not modified.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  std::size_t n_;
  double* real_buf_ = nullptr;
  void* cplx_buf_ = nullptr;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

// Per-thread cached transform for size n.
RealFft& real_fft(std::size_t n);

}  // namespace fwlab::detail
