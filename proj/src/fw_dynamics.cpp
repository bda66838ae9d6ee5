#include "fwlab/fw_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fwlab/fft_backend.hpp"

namespace fwlab {

std::string_view to_string(ModelKind m) { return m == ModelKind::fw ? "fw" : "ch"; }

ModelKind parse_model(std::string_view name) {
  if (name == "fw" || name == "FW") return ModelKind::fw;
  if (name == "ch" || name == "CH") return ModelKind::ch;
  throw UnsupportedParameter("unknown model '" + std::string(name) + "' (expected fw or ch)");
}

const Snapshot& Trajectory::at(double t) const {
  for (const auto& s : snapshots)
    if (std::abs(s.t - t) <= 1e-12 * std::max(1.0, std::abs(t))) return s;
  throw ContractViolation("Trajectory::at: no snapshot at t=" + std::to_string(t));
}

namespace {

std::string blowup_message(double t, double norm, double threshold) {
  std::ostringstream os;
  os.precision(6);
  os << "blow-up guard: ||u||_{B^1_inf,1} = " << norm << " exceeds " << threshold << " at t = " << t;
  return os.str();
}

}  // namespace

BlowUpError::BlowUpError(double time_reached, double norm, double threshold, std::shared_ptr<const Trajectory> partial)
    : std::runtime_error(blowup_message(time_reached, norm, threshold)),
      time_reached_(time_reached),
      norm_(norm),
      threshold_(threshold),
      partial_(std::move(partial)) {}

FourierMultiplier nonlocal_multiplier(const GridSpec& grid) {
  return FourierMultiplier::real_output(grid, [](double xi) { return Complex(0.0, xi / (1.0 + xi * xi)); });
}

Field nonlocal_term(const Field& u) { return multiplier_apply(nonlocal_multiplier(u.grid()), u); }

namespace {

// Right-hand side on the half spectrum with reusable work buffers. Both
// solve() and rhs() go through here, so v0 and the integrator agree exactly.
class SpectralRhs {
 public:
  SpectralRhs(const GridSpec& grid, ModelKind model)
      : n_(grid.size()),
        model_(model),
        fft_(detail::real_fft(n_)),
        xi_(n_ / 2 + 1),
        nonlocal_(n_ / 2 + 1),
        trunc_(n_ / 2 + 1),
        dtrunc_(n_ / 2 + 1),
        prod_hat_(n_ / 2 + 1),
        quad_hat_(n_ / 2 + 1),
        u_(n_),
        ux_(n_),
        prod_(n_) {
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      xi_[k] = grid.frequency_of_mode(static_cast<std::ptrdiff_t>(k));
      nonlocal_[k] = xi_[k] / (1.0 + xi_[k] * xi_[k]);
    }
  }

  void operator()(std::span<const Complex> uh, std::span<Complex> out) {
    std::copy(uh.begin(), uh.end(), trunc_.begin());
    truncate_two_thirds(trunc_);
    for (std::size_t k = 0; k <= n_ / 2; ++k) dtrunc_[k] = Complex(0.0, xi_[k]) * trunc_[k];
    fft_.inverse(trunc_, u_);
    fft_.inverse(dtrunc_, ux_);
    const double inv_n = 1.0 / static_cast<double>(n_);
    for (std::size_t m = 0; m < n_; ++m) {
      u_[m] *= inv_n;
      ux_[m] *= inv_n;
      prod_[m] = u_[m] * ux_[m];
    }
    fft_.forward(prod_, prod_hat_);
    truncate_two_thirds(prod_hat_);

    if (model_ == ModelKind::fw) {
      for (std::size_t k = 0; k < n_ / 2; ++k)
        out[k] = -1.5 * prod_hat_[k] + Complex(0.0, nonlocal_[k]) * uh[k];
    } else {
      for (std::size_t m = 0; m < n_; ++m) prod_[m] = u_[m] * u_[m] + 0.5 * ux_[m] * ux_[m];
      fft_.forward(prod_, quad_hat_);
      truncate_two_thirds(quad_hat_);
      for (std::size_t k = 0; k < n_ / 2; ++k)
        out[k] = -prod_hat_[k] - Complex(0.0, nonlocal_[k]) * quad_hat_[k];
    }
    out[0].imag(0.0);
    out[n_ / 2] = 0.0;
  }

 private:
  std::size_t n_;
  ModelKind model_;
  detail::RealFft& fft_;
  std::vector<double> xi_;
  std::vector<double> nonlocal_;
  std::vector<Complex> trunc_, dtrunc_, prod_hat_, quad_hat_;
  std::vector<double> u_, ux_, prod_;
};

bool all_finite(std::span<const Complex> v) {
  for (const Complex& c : v)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

Field rhs(ModelKind model, const Field& u) {
  SpectralRhs f(u.grid(), model);
  std::vector<Complex> out(u.size() / 2 + 1);
  f(u.half_spectrum(), out);
  return Field::from_half_spectrum(u.grid(), std::move(out));
}

Field v0(const Field& u0) { return rhs(ModelKind::fw, u0); }

double energy_functional(const DyadicPartition& part, const Field& u0) {
  const double a = lp_norm(u0, std::numeric_limits<double>::infinity());
  const auto b = block_norms(part, u0, std::numeric_limits<double>::infinity());
  return 1.0 + a * (besov_from_blocks(b, 2.0, 1.0) + a * besov_from_blocks(b, 3.0, 1.0));
}

Trajectory solve(const Field& u0, ModelKind model, const SolverConfig& config) {
  const GridSpec& grid = u0.grid();
  if (!(config.final_time >= 0.0) || !std::isfinite(config.final_time))
    throw ContractViolation("solve: final time must be finite and >= 0");
  if (!(config.cfl_safety > 0.0 && config.cfl_safety <= 1.0))
    throw ContractViolation("solve: cfl_safety must lie in (0, 1]");

  const auto part = partition_for(grid);
  const double sup0 = lp_norm(u0, std::numeric_limits<double>::infinity());
  const double dt_max = config.cfl_safety * grid.dx() / std::max(1.0, sup0);

  Trajectory traj;
  traj.model = model;
  traj.config = config;
  if (config.dt <= 0.0) {
    traj.config.dt = dt_max;
  } else if (config.dt > dt_max * (1.0 + 1e-12)) {
    throw ContractViolation("solve: dt=" + std::to_string(config.dt) + " exceeds cfl_safety*dx/max(1,sup|u0|)=" +
                            std::to_string(dt_max));
  }
  const double b1_0 = b1_inf1(*part, u0);
  if (config.blowup_threshold <= 0.0) {
    if (!(config.blowup_factor > 0.0)) throw ContractViolation("solve: blowup_factor must be positive");
    traj.config.blowup_threshold = config.blowup_factor * b1_0;
  }
  const double threshold = traj.config.blowup_threshold;

  std::vector<double> times;
  for (double t : config.snapshot_times) {
    if (!(t >= 0.0) || t > config.final_time * (1.0 + 1e-12))
      throw ContractViolation("solve: snapshot time " + std::to_string(t) + " outside [0, T]");
    if (t > 0.0) times.push_back(std::min(t, config.final_time));
  }
  if (config.final_time > 0.0) times.push_back(config.final_time);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-14 * std::max(1.0, b); }),
              times.end());
  traj.config.snapshot_times = times;

  traj.snapshots.push_back({0.0, u0, lp_norm(u0, 2.0), b1_0});

  const std::size_t half = grid.size() / 2 + 1;
  std::vector<Complex> state(u0.half_spectrum().begin(), u0.half_spectrum().end());
  std::vector<Complex> k1(half), k2(half), k3(half), k4(half), tmp(half);
  SpectralRhs f(grid, model);

  auto abort_with = [&](double t, double norm) {
    throw BlowUpError(t, norm, threshold, std::make_shared<const Trajectory>(traj));
  };

  double t_now = 0.0;
  for (double t_next : times) {
    const double span = t_next - t_now;
    const auto steps =
        static_cast<std::size_t>(std::max(1.0, std::ceil(span / traj.config.dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) {
      f(state, k1);
      for (std::size_t k = 0; k < half; ++k) tmp[k] = state[k] + 0.5 * h * k1[k];
      f(tmp, k2);
      for (std::size_t k = 0; k < half; ++k) tmp[k] = state[k] + 0.5 * h * k2[k];
      f(tmp, k3);
      for (std::size_t k = 0; k < half; ++k) tmp[k] = state[k] + h * k3[k];
      f(tmp, k4);
      for (std::size_t k = 0; k < half; ++k) state[k] += (h / 6.0) * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
      ++traj.steps;
      if (!all_finite(state)) abort_with(t_now + h * static_cast<double>(s + 1), std::numeric_limits<double>::infinity());
    }
    t_now = t_next;
    Field u = Field::from_half_spectrum(grid, state);
    const double b1 = b1_inf1(*part, u);
    const double l2 = lp_norm(u, 2.0);
    traj.snapshots.push_back({t_now, std::move(u), l2, b1});
    if (b1 > threshold) abort_with(t_now, b1);
  }
  return traj;
}

Field peakon_exact(double t, const GridSpec& grid, PeakonOrientation orientation) {
  const double L = grid.half_length();
  if (!(kPeakonSpeed * std::abs(t) < 0.5 * L))
    throw DomainViolation("peakon_exact: crest at " + std::to_string(kPeakonSpeed * t) +
                          " is too close to the periodic seam (need |4t/3| < L/2 = " + std::to_string(0.5 * L) + ")");
  const double sign = orientation == PeakonOrientation::stated ? 1.0 : -1.0;
  const double crest = sign * kPeakonSpeed * t;
  return Field::from_function(grid, [&](double x) {
    double d = x - crest;
    d -= 2.0 * L * std::floor((d + L) / (2.0 * L));
    return sign * kPeakonAmplitude * std::exp(-0.5 * std::abs(d));
  });
}

}  // namespace fwlab
