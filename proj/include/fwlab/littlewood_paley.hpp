#pragma once

// Dyadic partition of unity, Littlewood-Paley blocks and Besov norms.
//
// chi is a smooth even window equal to 1 on |xi| <= 3/4 and 0 on |xi| >= 4/3;
// the annulus window is phi(xi) = chi(xi/2) - chi(xi). With these,
//   Delta_{-1} = chi(D),  Delta_j = phi(2^{-j} D)  (j >= 0),
//   S_j = sum_{q=-1}^{j-1} Delta_q = chi(2^{-j} D),
// and chi + sum_{j=0}^{J} phi(2^{-j} .) = chi(2^{-J-1} .) telescopes exactly.

#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fwlab/spectral_core.hpp"

namespace fwlab {

/// Even profile equal to 1 on |xi| <= r0 and 0 on |xi| >= r1, with a C-infinity
/// monotone transition built from the normalized integral of exp(-1/(1-s^2)).
class BumpProfile {
 public:
  BumpProfile(double inner_radius, double outer_radius);

  double inner_radius() const noexcept { return r0_; }
  double outer_radius() const noexcept { return r1_; }
  double operator()(double xi) const;

  /// Fraction of the bump mass on [-1, s]: 0 at s = -1, 1/2 at s = 0, 1 at s = 1.
  static double transition(double s);

 private:
  double r0_;
  double r1_;
};

BumpProfile build_bump(double inner_radius, double outer_radius);

class DyadicPartition {
 public:
  explicit DyadicPartition(const GridSpec& grid);

  const GridSpec& grid() const noexcept { return grid_; }
  /// Largest block index whose annulus meets the grid band, i.e. (3/4) 2^j < xi_Nyquist.
  int j_max() const noexcept { return j_max_; }

  double chi(double xi) const { return chi_(xi); }
  double phi(double xi) const { return chi_(0.5 * xi) - chi_(xi); }

  /// Window of Delta_j on the half-spectrum indices 0..N/2, for -1 <= j <= j_max.
  std::span<const double> block_window(int j) const;
  /// Window chi(2^{-j} .) of S_j on the half spectrum, j >= 0.
  std::span<const double> low_pass_window(int j) const;

  /// max_k |chi + sum_j phi_j - 1| over every grid frequency.
  double partition_of_unity_defect() const;

 private:
  GridSpec grid_;
  BumpProfile chi_;
  int j_max_;
  std::vector<std::vector<double>> scaled_chi_;  // chi(2^{-j} xi_k), j = 0..j_max+1
  std::vector<std::vector<double>> blocks_;      // j = -1..j_max stored at j+1
};

DyadicPartition build_partition(const GridSpec& grid);

/// Shared, lazily built partition for a grid. Thread-safe.
std::shared_ptr<const DyadicPartition> partition_for(const GridSpec& grid);

struct BesovIndex {
  double s = 1.0;
  double p = 2.0;  // 2 or +inf
  double r = 1.0;  // 1 or +inf
};

Field dyadic_block(const DyadicPartition& part, const Field& f, int j);
Field low_pass(const DyadicPartition& part, const Field& f, int j);

struct BlockSpectrum {
  std::vector<std::pair<int, Field>> blocks;
  Field sum() const;
};

BlockSpectrum decompose(const DyadicPartition& part, const Field& f);

/// ||Delta_j f||_{L^p} for j = -1..j_max (entry j+1). L^inf uses oversampled sup.
std::vector<double> block_norms(const DyadicPartition& part, const Field& f, double p,
                                std::size_t oversampling = kDefaultOversampling);

/// Combine block norms into the weighted l^r sum of 2^{js} ||Delta_j f||.
double besov_from_blocks(std::span<const double> norms, double s, double r);

double besov_norm(const DyadicPartition& part, const Field& f, const BesovIndex& idx);
double besov_norm(const Field& f, const BesovIndex& idx);

inline double b1_inf1(const DyadicPartition& part, const Field& f) {
  return besov_norm(part, f, {1.0, std::numeric_limits<double>::infinity(), 1.0});
}

enum class InequalityKind { product, interpolation, algebra };

/// LHS / RHS with the constant dropped.
///   product:       ||fg||_{B^s_{inf,1}} / (||f||_{B^s} ||g||_inf + ||g||_{B^s} ||f||_inf)
///   interpolation: ||f||_{B^1_{inf,1}} / (||f||_{B^0_{inf,inf}}^{1/2} ||f||_{B^2_{inf,inf}}^{1/2})
///   algebra:       ||fg||_X / (||f||_X ||g||_X),  X = B^s_{inf,1} with norm B^s + L^inf
double inequality_ratio(const DyadicPartition& part, InequalityKind kind, const Field& f,
                        const std::optional<Field>& g = std::nullopt, double s = 1.0);

}  // namespace fwlab
