#pragma once

// Time integration of
//   FW:  u_t + (3/2) u u_x =  d_x (1 - d_xx)^{-1} u
//   CH:  u_t +       u u_x = -d_x (1 - d_xx)^{-1} (u^2 + u_x^2 / 2)
// on the periodic grid, plus the exact peaked wave and the first-order
// expansion field v0.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fwlab/littlewood_paley.hpp"
#include "fwlab/spectral_core.hpp"

namespace fwlab {

enum class ModelKind { fw, ch };

std::string_view to_string(ModelKind m);
ModelKind parse_model(std::string_view name);

struct SolverConfig {
  double dt = 0.0;  ///< <= 0 selects cfl_safety * dx / max(1, sup|u0|)
  double final_time = 0.0;
  double cfl_safety = 0.25;
  double blowup_threshold = 0.0;  ///< absolute cap on ||u||_{B^1_{inf,1}}; <= 0 uses blowup_factor
  double blowup_factor = 100.0;   ///< cap relative to the initial norm
  std::vector<double> snapshot_times;
};

struct Snapshot {
  double t;
  Field u;
  double l2;
  double b1;  ///< ||u||_{B^1_{inf,1}}
};

struct Trajectory {
  ModelKind model = ModelKind::fw;
  SolverConfig config;  ///< with dt and blowup_threshold resolved
  std::vector<Snapshot> snapshots;
  std::size_t steps = 0;

  /// Snapshot recorded at exactly t (to rounding); throws ContractViolation otherwise.
  const Snapshot& at(double t) const;
  const Snapshot& back() const { return snapshots.back(); }
};

/// Raised when ||u||_{B^1_{inf,1}} exceeds the threshold at a snapshot, or the
/// state stops being finite. Carries everything recorded up to that point.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double time_reached, double norm, double threshold, std::shared_ptr<const Trajectory> partial);

  double time_reached() const noexcept { return time_reached_; }
  double norm() const noexcept { return norm_; }
  double threshold() const noexcept { return threshold_; }
  const Trajectory& partial() const noexcept { return *partial_; }

 private:
  double time_reached_;
  double norm_;
  double threshold_;
  std::shared_ptr<const Trajectory> partial_;
};

/// Symbol i*xi / (1 + xi^2) of d_x (1 - d_xx)^{-1}.
FourierMultiplier nonlocal_multiplier(const GridSpec& grid);
Field nonlocal_term(const Field& u);

Field rhs(ModelKind model, const Field& u);

/// Classical four-stage Runge-Kutta. Steps are shortened so that every
/// snapshot time (and final_time) is hit exactly; t = 0 is always recorded.
Trajectory solve(const Field& u0, ModelKind model, const SolverConfig& config);

/// d_x (1 - d_xx)^{-1} u0 - (3/2) u0 d_x u0; identical to rhs(ModelKind::fw, u0).
Field v0(const Field& u0);

/// 1 + ||u0||_inf (||u0||_{B^2_{inf,1}} + ||u0||_inf ||u0||_{B^3_{inf,1}})
double energy_functional(const DyadicPartition& part, const Field& u0);

inline constexpr double kPeakonAmplitude = 8.0 / 9.0;
inline constexpr double kPeakonSpeed = 4.0 / 3.0;

/// stated:    (8/9) e^{-|x - 4t/3|/2}
/// reflected: -(8/9) e^{-|x + 4t/3|/2}, the image under u(t,x) -> -u(t,-x).
///
/// The reflected profile is the peaked travelling wave of the FW equation in
/// the sign convention above; the stated one travels under the opposite sign
/// of the nonlocal term.
enum class PeakonOrientation { stated, reflected };

/// Samples of the peaked wave with x - ct wrapped into [-L, L). Requires (4/3)|t| < L/2.
Field peakon_exact(double t, const GridSpec& grid, PeakonOrientation orientation = PeakonOrientation::stated);

}  // namespace fwlab
