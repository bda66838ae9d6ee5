#include "fwlab/fft_backend.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace fwlab::detail {
namespace {

// The FFTW planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
  if (n < 2) throw std::invalid_argument("RealFft: size must be >= 2");
  std::lock_guard lock(planner_mutex());
  real_buf_ = fftw_alloc_real(n);
  auto* cbuf = fftw_alloc_complex(n / 2 + 1);
  cplx_buf_ = cbuf;
  if (real_buf_ == nullptr || cbuf == nullptr) throw std::bad_alloc();
  // FFTW_ESTIMATE keeps plan selection, and therefore rounding, identical run to run.
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_buf_, cbuf, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), cbuf, real_buf_,
                                       FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr)
    throw std::runtime_error("RealFft: FFTW planning failed");
}

RealFft::~RealFft() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
  fftw_free(real_buf_);
  fftw_free(cplx_buf_);
}

void RealFft::forward(std::span<const double> in, std::span<std::complex<double>> out) {
  std::copy(in.begin(), in.end(), real_buf_);
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const auto* c = reinterpret_cast<const std::complex<double>*>(cplx_buf_);
  std::copy(c, c + half_size(), out.begin());
}

void RealFft::inverse(std::span<const std::complex<double>> in, std::span<double> out) {
  auto* c = reinterpret_cast<std::complex<double>*>(cplx_buf_);
  std::copy(in.begin(), in.begin() + static_cast<std::ptrdiff_t>(half_size()), c);
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_buf_, real_buf_ + n_, out.begin());
}

RealFft& real_fft(std::size_t n) {
  thread_local std::map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, std::make_unique<RealFft>(n)).first;
  return *it->second;
}

}  // namespace fwlab::detail
