#pragma once

// Numerical experiments: the high/low frequency sequences f_n, g_n, and the
// runs that measure expansion rates, non-uniform dependence, continuity,
// Lipschitz stability and conservation. Every threshold a run judges by is
// carried in its ExperimentReport next to the verdict.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fwlab/fw_dynamics.hpp"
#include "fwlab/littlewood_paley.hpp"
#include "fwlab/spectral_core.hpp"

namespace fwlab {

inline constexpr double kSequenceFrequency = 17.0 / 12.0;  // f_n oscillates at (17/12) 2^n
inline constexpr double kProfileInner = 0.25;               // phi_hat = 1 on |xi| <= 1/4
inline constexpr double kProfileOuter = 0.5;                // phi_hat = 0 on |xi| >= 1/2

// ---------------------------------------------------------------------------
// Reports

struct Measurement {
  std::string label;
  double t = std::numeric_limits<double>::quiet_NaN();
  std::optional<int> n;
  std::string quantity;
  double value = 0.0;
};

struct DerivedConstant {
  std::string name;
  double value = 0.0;
  std::string provenance;
};

/// A pass/fail statement. Absent bounds are NaN.
struct Verdict {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  bool strict = false;  ///< bounds exclusive
  std::string provenance;

  static Verdict at_most(std::string name, double measured, double upper, std::string provenance, bool strict = false);
  static Verdict at_least(std::string name, double measured, double lower, std::string provenance, bool strict = false);
  static Verdict within(std::string name, double measured, double lower, double upper, std::string provenance);

  std::string describe_bound() const;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<std::pair<std::string, std::string>> parameters;
  std::vector<Measurement> measurements;
  std::vector<DerivedConstant> constants;
  std::vector<Verdict> verdicts;
  std::vector<std::string> notes;

  bool passed() const;
  void param(std::string key, std::string value) { parameters.emplace_back(std::move(key), std::move(value)); }
  void measure(std::string label, double t, std::optional<int> n, std::string quantity, double value) {
    measurements.push_back({std::move(label), t, n, std::move(quantity), value});
  }
  std::optional<double> constant(std::string_view name) const;
  const Verdict* verdict(std::string_view name) const;
};

// ---------------------------------------------------------------------------
// Sequences

/// Spatial profile whose continuum transform is the bump 1 on |xi| <= 1/4, 0 on |xi| >= 1/2.
Field make_phi_profile(const GridSpec& grid);

/// Largest n whose f_n band (17/12) 2^n + 1/2 stays under the 2/3 cutoff; -1 if none.
int max_resolvable_n(const GridSpec& grid);
void require_resolvable(int n, const GridSpec& grid);

/// 2^{-n} phi(x) sin((17/12) 2^n x), built as the exact periodization through its transform.
Field make_fn(int n, const GridSpec& grid);
/// (12/17) 2^{-n} phi(x).
Field make_gn(int n, const GridSpec& grid);

struct SequencePair {
  int n;
  Field f;
  Field g;
  Field phi_profile;
};

SequencePair make_sequence_pair(int n, const GridSpec& grid);

// ---------------------------------------------------------------------------
// Random corpus

struct RandomFieldOptions {
  double band = 32.0;         ///< spectrum supported in |xi| <= band
  double b1_target = 0.25;    ///< rescale to this ||.||_{B^1_{inf,1}}; <= 0 leaves raw amplitudes
};

/// Seeded band-limited field, coefficients ~ N(0,1) (1 + xi^2)^{-1}, zero mean.
Field random_band_limited(const DyadicPartition& part, std::uint64_t seed, std::uint64_t index,
                          const RandomFieldOptions& opts = {});

// ---------------------------------------------------------------------------
// Slope fits

struct SlopeFit {
  std::vector<double> log_x;
  std::vector<double> log_y;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< root-mean-square deviation in log y
};

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Runs

/// Maximum number of worker threads used by the runs; 0 means hardware concurrency.
void set_experiment_threads(unsigned threads);

struct Lemma41Options {
  std::vector<int> n_range{5, 6, 7, 8, 9};
  std::vector<double> sigma_list{1.0, 2.0, 3.0};
};

ExperimentReport run_lemma41_scalings(const DyadicPartition& part, const Lemma41Options& opts = {});

/// min over n of ||g_n d_x f_n||_{B^1_{inf,inf}} together with the per-n values.
std::pair<double, std::vector<double>> measure_m1(const DyadicPartition& part, std::span<const int> n_range);

struct PeakonOptions {
  double final_time = 1.0;
  int snapshot_count = 11;
  bool include_reflected = true;
};

ExperimentReport run_peakon(const GridSpec& grid, const SolverConfig& base, const PeakonOptions& opts = {});

ExperimentReport run_conservation(const Field& u0, const SolverConfig& base, std::string u0_label = "u0",
                                  int snapshot_count = 11);

ExperimentReport run_taylor(const Field& u0, std::span<const double> t_list, const SolverConfig& base,
                            std::string u0_label = "u0");

struct NonuniformOptions {
  std::vector<int> n_range{5, 6, 7, 8, 9};
  std::vector<double> t_list{0.01, 0.02, 0.05, 0.1};
  std::optional<double> m1_hat;  ///< measured if absent
};

ExperimentReport run_nonuniform(const DyadicPartition& part, const SolverConfig& base, const NonuniformOptions& opts = {});

ExperimentReport run_continuity(const DyadicPartition& part, const Field& u0, std::span<const int> n_list, double t_eval,
                                const SolverConfig& base, std::string u0_label = "u0");

struct LipschitzOptions {
  int pair_count = 20;
  std::vector<double> perturbation_scales{1e-2, 1e-3, 1e-4};
  double t_eval = 0.1;
  std::uint64_t seed = 20231;
};

ExperimentReport run_lipschitz_linf(const DyadicPartition& part, const SolverConfig& base, const LipschitzOptions& opts = {});

ExperimentReport run_ch_contrast(const DyadicPartition& part, int n, std::span<const double> t_list, const SolverConfig& base);

struct InequalityOptions {
  int corpus_size = 100;
  std::uint64_t seed = 7;
  double s = 1.0;
  double bound = 50.0;
};

ExperimentReport run_inequality_probes(const DyadicPartition& part, const InequalityOptions& opts = {});

/// Log-spaced times from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace fwlab
