#include "fwlab/spectral_core.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fwlab/fft_backend.hpp"

namespace fwlab {

GridSpec::GridSpec(double half_length, std::size_t n_points) : half_length_(half_length), n_(n_points) {
  if (!(half_length > 0.0) || !std::isfinite(half_length))
    throw ContractViolation("GridSpec: half_length must be positive and finite");
  if (n_points < 16 || !std::has_single_bit(n_points))
    throw ContractViolation("GridSpec: N must be a power of two >= 16, got " + std::to_string(n_points));
}

std::vector<double> GridSpec::coordinates() const {
  std::vector<double> xs(n_);
  for (std::size_t m = 0; m < n_; ++m) xs[m] = x(m);
  return xs;
}

std::vector<double> GridSpec::frequencies() const {
  std::vector<double> xi(n_);
  for (std::size_t k = 0; k < n_; ++k) xi[k] = frequency(k);
  return xi;
}

// ---------------------------------------------------------------------------

Field::Field(GridSpec grid) : grid_(grid), samples_(grid.size(), 0.0), half_(grid.size() / 2 + 1) {}

Field::Field(GridSpec grid, std::vector<double> samples, std::vector<Complex> half)
    : grid_(grid), samples_(std::move(samples)), half_(std::move(half)) {}

Field Field::from_samples(GridSpec grid, std::vector<double> samples) {
  if (samples.size() != grid.size())
    throw ContractViolation("Field: " + std::to_string(samples.size()) + " samples for a grid of " +
                            std::to_string(grid.size()));
  std::vector<Complex> half(grid.size() / 2 + 1);
  detail::real_fft(grid.size()).forward(samples, half);
  return Field(grid, std::move(samples), std::move(half));
}

Field Field::from_half_spectrum(GridSpec grid, std::vector<Complex> half) {
  const std::size_t n = grid.size();
  if (half.size() != n / 2 + 1)
    throw ContractViolation("Field: half spectrum has " + std::to_string(half.size()) + " coefficients, expected " +
                            std::to_string(n / 2 + 1));
  half.front().imag(0.0);
  half.back().imag(0.0);
  std::vector<double> samples(n);
  detail::real_fft(n).inverse(half, samples);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : samples) v *= inv_n;
  return Field(grid, std::move(samples), std::move(half));
}

Field Field::from_spectrum(GridSpec grid, std::span<const Complex> coeffs) {
  const std::size_t n = grid.size();
  if (coeffs.size() != n)
    throw ContractViolation("Field: spectrum has " + std::to_string(coeffs.size()) +
                            " coefficients for a grid of " + std::to_string(n));
  std::vector<Complex> half(n / 2 + 1);
  half[0] = coeffs[0].real();
  for (std::size_t k = 1; k < n / 2; ++k) half[k] = 0.5 * (coeffs[k] + std::conj(coeffs[n - k]));
  half[n / 2] = coeffs[n / 2].real();
  return from_half_spectrum(grid, std::move(half));
}

Field Field::from_continuum_transform(GridSpec grid, const std::function<Complex(double)>& fhat) {
  const std::size_t n = grid.size();
  std::vector<Complex> half(n / 2 + 1);
  const double inv_dx = 1.0 / grid.dx();
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    half[k] = sign * inv_dx * fhat(grid.frequency(k));
  }
  // Unpaired Nyquist mode left at zero.
  return from_half_spectrum(grid, std::move(half));
}

std::vector<Complex> Field::spectrum() const {
  const std::size_t n = size();
  std::vector<Complex> full(n);
  for (std::size_t k = 0; k <= n / 2; ++k) full[k] = half_[k];
  for (std::size_t k = n / 2 + 1; k < n; ++k) full[k] = std::conj(half_[n - k]);
  return full;
}

Complex Field::continuum_transform(std::size_t idx) const {
  const std::size_t n = size();
  if (idx >= n) throw ContractViolation("Field::continuum_transform: index out of range");
  const Complex c = idx <= n / 2 ? half_[idx] : std::conj(half_[n - idx]);
  const double sign = (idx % 2 == 0) ? 1.0 : -1.0;
  return sign * grid_.dx() * c;
}

void Field::require_same_grid(const Field& other, const char* what) const {
  if (!(grid_ == other.grid_)) throw ContractViolation(std::string(what) + ": grid mismatch");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(other, "Field::operator+=");
  for (std::size_t m = 0; m < samples_.size(); ++m) samples_[m] += other.samples_[m];
  for (std::size_t k = 0; k < half_.size(); ++k) half_[k] += other.half_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(other, "Field::operator-=");
  for (std::size_t m = 0; m < samples_.size(); ++m) samples_[m] -= other.samples_[m];
  for (std::size_t k = 0; k < half_.size(); ++k) half_[k] -= other.half_[k];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& v : samples_) v *= a;
  for (Complex& c : half_) c *= a;
  return *this;
}

std::vector<Complex> to_spectrum(const Field& f) { return f.spectrum(); }

Field to_samples(std::span<const Complex> coeffs, const GridSpec& grid) { return Field::from_spectrum(grid, coeffs); }

// ---------------------------------------------------------------------------

FourierMultiplier FourierMultiplier::from_symbol(const GridSpec& grid, const std::function<Complex(double)>& symbol) {
  std::vector<Complex> v(grid.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = symbol(grid.frequency(k));
  return FourierMultiplier(grid, std::move(v), false);
}

FourierMultiplier FourierMultiplier::real_output(const GridSpec& grid, const std::function<Complex(double)>& symbol) {
  auto m = from_symbol(grid, symbol);
  double scale = 0.0;
  for (const Complex& c : m.values_) scale = std::max(scale, std::abs(c));
  const double defect = hermitian_defect(m.values_);
  if (defect > 1e-14 * std::max(scale, 1.0))
    throw ContractViolation("FourierMultiplier::real_output: symbol violates m(-xi) = conj(m(xi)) by " +
                            std::to_string(defect));
  m.real_output_ = true;
  return m;
}

FourierMultiplier FourierMultiplier::identity(const GridSpec& grid) {
  return real_output(grid, [](double) { return Complex(1.0, 0.0); });
}

FourierMultiplier FourierMultiplier::derivative(const GridSpec& grid) {
  return real_output(grid, [](double xi) { return Complex(0.0, xi); });
}

Field multiplier_apply(const FourierMultiplier& m, const Field& f) {
  if (!(m.grid() == f.grid())) throw ContractViolation("multiplier_apply: grid mismatch");
  const std::size_t n = f.size();
  if (m.is_real_output()) {
    std::vector<Complex> half(f.half_spectrum().begin(), f.half_spectrum().end());
    const auto mv = m.values();
    for (std::size_t k = 0; k < n / 2; ++k) half[k] *= mv[k];
    half[n / 2] = 0.0;
    return Field::from_half_spectrum(f.grid(), std::move(half));
  }
  auto full = f.spectrum();
  const auto mv = m.values();
  for (std::size_t k = 0; k < n; ++k) full[k] *= mv[k];
  full[n / 2] = 0.0;
  return Field::from_spectrum(f.grid(), full);
}

void truncate_two_thirds(std::span<Complex> half) {
  const std::size_t n = 2 * (half.size() - 1);
  const std::size_t kmax = n / 3;
  for (std::size_t k = kmax + 1; k < half.size(); ++k) half[k] = 0.0;
  half.back() = 0.0;
}

Field dealiased_product(const Field& f, const Field& g) {
  if (!(f.grid() == g.grid())) throw ContractViolation("dealiased_product: grid mismatch");
  const GridSpec& grid = f.grid();
  const std::size_t n = grid.size();
  auto& fft = detail::real_fft(n);

  std::vector<Complex> fh(f.half_spectrum().begin(), f.half_spectrum().end());
  std::vector<Complex> gh(g.half_spectrum().begin(), g.half_spectrum().end());
  truncate_two_thirds(fh);
  truncate_two_thirds(gh);
  std::vector<double> fs(n), gs(n);
  fft.inverse(fh, fs);
  fft.inverse(gh, gs);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  for (std::size_t m = 0; m < n; ++m) fs[m] *= gs[m] * scale;
  std::vector<Complex> ph(n / 2 + 1);
  fft.forward(fs, ph);
  truncate_two_thirds(ph);
  return Field::from_half_spectrum(grid, std::move(ph));
}

namespace {

// Mode evaluations one sup refinement may spend before it settles for the sampled maxima.
constexpr std::size_t kRefineBudget = std::size_t{1} << 21;
// Steps between exact re-anchorings of the e^{i k theta} recurrence.
constexpr std::size_t kAnchor = 64;

// The interpolant p(u) = (1/n) sum_k Re(a_k e^{2 pi i k u / n}) on a contiguous band of
// modes, with a_k already carrying the factor 2 for the conjugate partner.
struct Trig {
  std::size_t n;
  std::size_t k0;
  std::vector<Complex> a;

  // p, p', p'' at u = m0 + r, in grid-index units.
  std::array<double, 3> eval(std::size_t m0, double r) const {
    const double w = 2.0 * std::numbers::pi / static_cast<double>(n);
    double p = 0.0, dp = 0.0, ddp = 0.0;
    Complex z, step = std::polar(1.0, w * (static_cast<double>(m0 % n) + r));
    for (std::size_t j = 0; j < a.size(); ++j) {
      const std::size_t k = k0 + j;
      if (j % kAnchor == 0) {
        // Integer reduction of k m0 keeps the phase exact for any grid position.
        const double whole = static_cast<double>((k % n) * (m0 % n) % n);
        z = std::polar(1.0, w * (whole + static_cast<double>(k) * r));
      }
      const Complex v = a[j] * z;
      const double om = w * static_cast<double>(k);
      p += v.real();
      dp -= om * v.imag();
      ddp -= om * om * v.real();
      z *= step;
    }
    const double inv = 1.0 / static_cast<double>(n);
    return {p * inv, dp * inv, ddp * inv};
  }
};

// Newton on p' from the sample at u = m0 + r0, kept within `reach` of the start.
double refine_peak(const Trig& t, std::size_t m0, double r0, double reach, double sign) {
  double r = r0;
  double best = sign * t.eval(m0, r)[0];
  for (int it = 0; it < 8; ++it) {
    const auto [p, dp, ddp] = t.eval(m0, r);
    if (!(sign * ddp < 0.0)) break;
    const double next = std::clamp(r - dp / ddp, r0 - reach, r0 + reach);
    const double value = sign * t.eval(m0, next)[0];
    if (!(value >= best)) break;
    best = value;
    const bool settled = std::abs(next - r) < 1e-13;
    r = next;
    if (settled) break;
  }
  return best;
}

}  // namespace

double oversampled_sup(const GridSpec& grid, std::span<const Complex> half, std::size_t factor) {
  if (factor == 0) throw ContractViolation("oversampled_sup: factor must be >= 1");
  const std::size_t n = grid.size();
  if (half.size() != n / 2 + 1) throw ContractViolation("oversampled_sup: half spectrum length mismatch");
  const std::size_t big = n * factor;
  std::vector<Complex> padded(big / 2 + 1, Complex(0.0, 0.0));
  std::copy(half.begin(), half.begin() + static_cast<std::ptrdiff_t>(n / 2), padded.begin());
  // The Nyquist coefficient stands for both +N/2 and -N/2 once padded.
  padded[n / 2] = factor == 1 ? half[n / 2] : 0.5 * half[n / 2];
  std::vector<double> s(big);
  detail::real_fft(big).inverse(padded, s);
  double mx = 0.0;
  for (double v : s) mx = std::max(mx, std::abs(v));
  if (factor == 1 || mx == 0.0) return mx / static_cast<double>(n);

  // The samples sit within half a fine spacing of every crest, so a crest can only beat
  // the sampled max near samples above mx (1 - tol), with tol from Bernstein's inequality.
  std::size_t k0 = 0, k1 = 0;
  bool any = false;
  for (std::size_t k = 0; k <= n / 2; ++k)
    if (padded[k] != Complex(0.0, 0.0)) {
      if (!any) k0 = k;
      k1 = k;
      any = true;
    }
  const double spacing = 1.0 / static_cast<double>(factor);
  const double om_max = 2.0 * std::numbers::pi * static_cast<double>(k1) / static_cast<double>(n);
  const double tol = std::min(1.0, 0.5 * std::pow(0.5 * om_max * spacing, 2)) + 1e-12;

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < big; ++i) {
    const double v = std::abs(s[i]);
    if (v < mx * (1.0 - tol)) continue;
    if (v >= std::abs(s[(i + big - 1) % big]) && v >= std::abs(s[(i + 1) % big])) candidates.push_back(i);
  }
  const std::size_t width = k1 - k0 + 1;
  // Each refinement costs at most 17 evaluations of the band.
  const std::size_t affordable = std::max<std::size_t>(1, kRefineBudget / (17 * width));
  if (candidates.size() > affordable) {
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(affordable), candidates.end(),
                      [&](std::size_t x, std::size_t y) { return std::abs(s[x]) > std::abs(s[y]); });
    candidates.resize(affordable);
  }

  Trig t{n, k0, std::vector<Complex>(padded.begin() + static_cast<std::ptrdiff_t>(k0),
                                     padded.begin() + static_cast<std::ptrdiff_t>(k1 + 1))};
  for (std::size_t j = 0; j < t.a.size(); ++j)
    if (k0 + j != 0) t.a[j] *= 2.0;
  double best = mx / static_cast<double>(n);
  for (std::size_t i : candidates) {
    const std::size_t m0 = i / factor;
    const double r0 = static_cast<double>(i % factor) * spacing;
    best = std::max(best, refine_peak(t, m0, r0, spacing, s[i] < 0.0 ? -1.0 : 1.0));
  }
  return best;
}

double oversampled_sup(const Field& f, std::size_t factor) {
  if (factor == 0) throw ContractViolation("oversampled_sup: factor must be >= 1");
  if (factor == 1) {
    double mx = 0.0;
    for (double v : f.samples()) mx = std::max(mx, std::abs(v));
    return mx;
  }
  return oversampled_sup(f.grid(), f.half_spectrum(), factor);
}

double lp_norm(const Field& f, double p) {
  if (p == 2.0) {
    double acc = 0.0;
    for (double v : f.samples()) acc += v * v;
    return std::sqrt(f.grid().dx() * acc);
  }
  if (std::isinf(p) && p > 0.0) return oversampled_sup(f, kDefaultOversampling);
  throw UnsupportedParameter("lp_norm: p must be 2 or infinity, got " + std::to_string(p));
}

double hermitian_defect(std::span<const Complex> full) {
  const std::size_t n = full.size();
  double d = n > 0 ? std::abs(full[0].imag()) : 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k == n) continue;
    d = std::max(d, std::abs(full[k] - std::conj(full[n - k])));
  }
  return d;
}

}  // namespace fwlab
