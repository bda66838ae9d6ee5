#pragma once

// Periodic grid, discrete Fourier analysis, Fourier multipliers and
// dealiased products on [-L, L).
//
// Transform normalization: the forward DFT carries no factor, the inverse
// carries 1/N. Continuum quantities are recovered with the dx weight:
//   ||f||_{L^2}^2 = dx * sum_m f_m^2 = (dx / N) * sum_k |c_k|^2,
//   f_hat(xi_k)   = dx * (-1)^k * c_k        (grid starts at x = -L).
//
// Spectra are stored in FFT order: index k in [0, N/2) is mode k, index k in
// [N/2, N) is mode k - N. Index N/2 is the unpaired Nyquist mode -N/2.

#include <complex>
#include <concepts>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include "fwlab/errors.hpp"

namespace fwlab {

using Complex = std::complex<double>;

class GridSpec {
 public:
  GridSpec(double half_length, std::size_t n_points);

  double half_length() const noexcept { return half_length_; }
  std::size_t size() const noexcept { return n_; }
  double dx() const noexcept { return 2.0 * half_length_ / static_cast<double>(n_); }

  double x(std::size_t m) const noexcept { return -half_length_ + static_cast<double>(m) * dx(); }
  std::ptrdiff_t mode(std::size_t idx) const noexcept {
    return idx < n_ / 2 ? static_cast<std::ptrdiff_t>(idx)
                        : static_cast<std::ptrdiff_t>(idx) - static_cast<std::ptrdiff_t>(n_);
  }
  double frequency(std::size_t idx) const noexcept {
    return std::numbers::pi * static_cast<double>(mode(idx)) / half_length_;
  }
  double frequency_of_mode(std::ptrdiff_t k) const noexcept {
    return std::numbers::pi * static_cast<double>(k) / half_length_;
  }

  double nyquist() const noexcept {
    return std::numbers::pi * static_cast<double>(n_) / (2.0 * half_length_);
  }
  /// Largest frequency kept by the 2/3 rule.
  double dealias_cutoff() const noexcept { return nyquist() * 2.0 / 3.0; }
  /// Modes with |k| > this are zeroed by the 2/3 rule.
  std::size_t dealias_mode_limit() const noexcept { return n_ / 3; }

  std::vector<double> coordinates() const;
  std::vector<double> frequencies() const;

  bool operator==(const GridSpec&) const = default;

 private:
  double half_length_;
  std::size_t n_;
};

/// Real periodic function held as samples together with its DFT.
///
/// Both representations are kept valid at all times. Only the non-negative
/// half of the (Hermitian) spectrum is stored; spectrum() expands it.
class Field {
 public:
  explicit Field(GridSpec grid);

  static Field from_samples(GridSpec grid, std::vector<double> samples);
  /// Full N-coefficient spectrum in FFT order. A non-Hermitian input yields
  /// the real part of its inverse transform.
  static Field from_spectrum(GridSpec grid, std::span<const Complex> coeffs);
  /// Non-negative half (N/2 + 1 coefficients), read as Hermitian.
  static Field from_half_spectrum(GridSpec grid, std::vector<Complex> half);

  template <std::invocable<double> F>
  static Field from_function(GridSpec grid, F&& f) {
    std::vector<double> s(grid.size());
    for (std::size_t m = 0; m < s.size(); ++m) s[m] = static_cast<double>(f(grid.x(m)));
    return from_samples(grid, std::move(s));
  }

  /// Field whose continuum Fourier transform, sampled on the grid
  /// frequencies, is fhat. This is the periodization of the inverse
  /// transform of fhat; fhat must satisfy fhat(-xi) = conj(fhat(xi)).
  static Field from_continuum_transform(GridSpec grid, const std::function<Complex(double)>& fhat);

  const GridSpec& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return samples_.size(); }

  std::span<const double> samples() const noexcept { return samples_; }
  double operator[](std::size_t m) const noexcept { return samples_[m]; }

  std::span<const Complex> half_spectrum() const noexcept { return half_; }
  std::vector<Complex> spectrum() const;
  /// dx * (-1)^k * c_k, the continuum transform at the grid frequency of index idx.
  Complex continuum_transform(std::size_t idx) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double a, Field f) { return f *= a; }
  friend Field operator*(Field f, double a) { return f *= a; }

 private:
  Field(GridSpec grid, std::vector<double> samples, std::vector<Complex> half);
  void require_same_grid(const Field& other, const char* what) const;

  GridSpec grid_;
  std::vector<double> samples_;
  std::vector<Complex> half_;
};

std::vector<Complex> to_spectrum(const Field& f);
Field to_samples(std::span<const Complex> coeffs, const GridSpec& grid);

/// Values m(xi_k) of a Fourier symbol on the grid frequencies (FFT order).
class FourierMultiplier {
 public:
  /// General complex symbol; applying it yields the real part of the result.
  static FourierMultiplier from_symbol(const GridSpec& grid, const std::function<Complex(double)>& symbol);
  /// Symbol with m(-xi) = conj(m(xi)); throws ContractViolation otherwise.
  static FourierMultiplier real_output(const GridSpec& grid, const std::function<Complex(double)>& symbol);

  static FourierMultiplier identity(const GridSpec& grid);
  /// i*xi, the exact derivative.
  static FourierMultiplier derivative(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  std::span<const Complex> values() const noexcept { return values_; }
  bool is_real_output() const noexcept { return real_output_; }

 private:
  FourierMultiplier(GridSpec grid, std::vector<Complex> values, bool real_output)
      : grid_(grid), values_(std::move(values)), real_output_(real_output) {}

  GridSpec grid_;
  std::vector<Complex> values_;
  bool real_output_;
};

/// Output coefficient k = m(xi_k) * input coefficient k; the Nyquist mode is zeroed.
Field multiplier_apply(const FourierMultiplier& m, const Field& f);

/// Zero modes above the 2/3 cutoff and the Nyquist mode, in place on a half spectrum.
void truncate_two_thirds(std::span<Complex> half);

/// Pointwise product with the 2/3 rule applied to both factors and the result.
Field dealiased_product(const Field& f, const Field& g);

inline constexpr std::size_t kDefaultOversampling = 4;

/// p must be 2 or +infinity. The L^inf norm uses oversampled_sup with the default factor.
double lp_norm(const Field& f, double p);

/// Max |f| of the trigonometric interpolant. The interpolant is sampled on a grid
/// `factor` times finer and, for factor > 1, every sampled maximum that could hide the
/// true crest is refined by Newton's method. factor = 1 is the plain grid maximum.
double oversampled_sup(const Field& f, std::size_t factor = kDefaultOversampling);

/// Same, straight from a half spectrum (no Field needed).
double oversampled_sup(const GridSpec& grid, std::span<const Complex> half, std::size_t factor);

/// max_k |c_k - conj(c_{-k})| over a full spectrum, skipping the unpaired Nyquist mode.
double hermitian_defect(std::span<const Complex> full_spectrum);

}  // namespace fwlab
