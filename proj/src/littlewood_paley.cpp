#include "fwlab/littlewood_paley.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace fwlab {
namespace {

// Integral of exp(-1/(1-t^2)) over [-1, s], s in [-1, 0].
double left_mass(double s) {
  if (s <= -1.0) return 0.0;
  auto integrand = [](double t) {
    const double d = 1.0 - t * t;
    return d <= 0.0 ? 0.0 : std::exp(-1.0 / d);
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -1.0, s, 12, 1e-13);
}

double total_mass() {
  static const double z = 2.0 * left_mass(0.0);
  return z;
}

bool is_infinite(double v) { return std::isinf(v) && v > 0.0; }

void validate_index(const BesovIndex& idx) {
  if (!(idx.p == 2.0 || is_infinite(idx.p)))
    throw UnsupportedParameter("besov_norm: p must be 2 or infinity, got " + std::to_string(idx.p));
  if (!(idx.r == 1.0 || is_infinite(idx.r)))
    throw UnsupportedParameter("besov_norm: r must be 1 or infinity, got " + std::to_string(idx.r));
  if (!std::isfinite(idx.s)) throw UnsupportedParameter("besov_norm: s must be finite");
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BumpProfile::BumpProfile(double inner_radius, double outer_radius) : r0_(inner_radius), r1_(outer_radius) {
  if (!(inner_radius > 0.0) || !(inner_radius < outer_radius))
    throw ContractViolation("BumpProfile: need 0 < r0 < r1");
}

double BumpProfile::transition(double s) {
  if (s <= -1.0) return 0.0;
  if (s >= 1.0) return 1.0;
  // Evaluating from the nearer end keeps the transition exactly antisymmetric about 1/2.
  if (s <= 0.0) return left_mass(s) / total_mass();
  return 1.0 - left_mass(-s) / total_mass();
}

double BumpProfile::operator()(double xi) const {
  const double a = std::abs(xi);
  if (a <= r0_) return 1.0;
  if (a >= r1_) return 0.0;
  const double s = 2.0 * (a - r0_) / (r1_ - r0_) - 1.0;
  if (s <= 0.0) return 1.0 - left_mass(s) / total_mass();
  return left_mass(-s) / total_mass();
}

BumpProfile build_bump(double inner_radius, double outer_radius) { return BumpProfile(inner_radius, outer_radius); }

// ---------------------------------------------------------------------------

DyadicPartition::DyadicPartition(const GridSpec& grid) : grid_(grid), chi_(0.75, 4.0 / 3.0), j_max_(-1) {
  const double nyq = grid.nyquist();
  while (0.75 * std::exp2(j_max_ + 1) < nyq) ++j_max_;

  const std::size_t half = grid.size() / 2 + 1;
  scaled_chi_.assign(static_cast<std::size_t>(j_max_ + 2), std::vector<double>(half));
  for (int j = 0; j <= j_max_ + 1; ++j) {
    const double scale = std::exp2(-j);
    auto& w = scaled_chi_[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < half; ++k) w[k] = chi_(scale * std::abs(grid.frequency_of_mode(static_cast<std::ptrdiff_t>(k))));
  }

  blocks_.assign(static_cast<std::size_t>(j_max_ + 2), std::vector<double>(half));
  blocks_[0] = scaled_chi_[0];
  for (int j = 0; j <= j_max_; ++j) {
    auto& b = blocks_[static_cast<std::size_t>(j + 1)];
    const auto& hi = scaled_chi_[static_cast<std::size_t>(j + 1)];
    const auto& lo = scaled_chi_[static_cast<std::size_t>(j)];
    for (std::size_t k = 0; k < half; ++k) b[k] = hi[k] - lo[k];
  }
}

std::span<const double> DyadicPartition::block_window(int j) const {
  if (j < -1 || j > j_max_)
    throw ContractViolation("dyadic block index " + std::to_string(j) + " outside [-1, " + std::to_string(j_max_) +
                            "]");
  return blocks_[static_cast<std::size_t>(j + 1)];
}

std::span<const double> DyadicPartition::low_pass_window(int j) const {
  if (j < 0) throw ContractViolation("low-pass index must be >= 0, got " + std::to_string(j));
  // Beyond j_max + 1 the window is identically one on the grid; that slot already is.
  return scaled_chi_[static_cast<std::size_t>(std::min(j, j_max_ + 1))];
}

double DyadicPartition::partition_of_unity_defect() const {
  const std::size_t half = grid_.size() / 2 + 1;
  double worst = 0.0;
  for (std::size_t k = 0; k < half; ++k) {
    double sum = 0.0;
    for (const auto& b : blocks_) sum += b[k];
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

DyadicPartition build_partition(const GridSpec& grid) { return DyadicPartition(grid); }

std::shared_ptr<const DyadicPartition> partition_for(const GridSpec& grid) {
  static std::mutex mutex;
  static std::map<std::pair<double, std::size_t>, std::shared_ptr<const DyadicPartition>> cache;
  std::lock_guard lock(mutex);
  auto key = std::make_pair(grid.half_length(), grid.size());
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<const DyadicPartition>(grid)).first;
  return it->second;
}

// ---------------------------------------------------------------------------

namespace {

Field apply_window(const Field& f, std::span<const double> w) {
  std::vector<Complex> half(f.half_spectrum().begin(), f.half_spectrum().end());
  for (std::size_t k = 0; k < half.size(); ++k) half[k] *= w[k];
  half.back() = 0.0;
  return Field::from_half_spectrum(f.grid(), std::move(half));
}

void require_grid(const DyadicPartition& part, const Field& f, const char* what) {
  if (!(part.grid() == f.grid())) throw ContractViolation(std::string(what) + ": field and partition grids differ");
}

}  // namespace

Field dyadic_block(const DyadicPartition& part, const Field& f, int j) {
  require_grid(part, f, "dyadic_block");
  return apply_window(f, part.block_window(j));
}

Field low_pass(const DyadicPartition& part, const Field& f, int j) {
  require_grid(part, f, "low_pass");
  return apply_window(f, part.low_pass_window(j));
}

Field BlockSpectrum::sum() const {
  if (blocks.empty()) throw ContractViolation("BlockSpectrum::sum: no blocks");
  Field acc = blocks.front().second;
  for (std::size_t i = 1; i < blocks.size(); ++i) acc += blocks[i].second;
  return acc;
}

BlockSpectrum decompose(const DyadicPartition& part, const Field& f) {
  require_grid(part, f, "decompose");
  BlockSpectrum out;
  out.blocks.reserve(static_cast<std::size_t>(part.j_max() + 2));
  for (int j = -1; j <= part.j_max(); ++j) out.blocks.emplace_back(j, dyadic_block(part, f, j));
  return out;
}

std::vector<double> block_norms(const DyadicPartition& part, const Field& f, double p, std::size_t oversampling) {
  require_grid(part, f, "block_norms");
  if (!(p == 2.0 || is_infinite(p)))
    throw UnsupportedParameter("block_norms: p must be 2 or infinity, got " + std::to_string(p));
  const GridSpec& grid = f.grid();
  const std::size_t n = grid.size();
  const auto src = f.half_spectrum();
  std::vector<double> norms;
  norms.reserve(static_cast<std::size_t>(part.j_max() + 2));
  std::vector<Complex> half(src.size());
  for (int j = -1; j <= part.j_max(); ++j) {
    const auto w = part.block_window(j);
    bool any = false;
    for (std::size_t k = 0; k < half.size(); ++k) {
      half[k] = w[k] * src[k];
      any = any || half[k] != Complex(0.0, 0.0);
    }
    half.back() = 0.0;
    if (!any) {
      norms.push_back(0.0);
      continue;
    }
    if (p == 2.0) {
      double acc = std::norm(half[0]);
      for (std::size_t k = 1; k < n / 2; ++k) acc += 2.0 * std::norm(half[k]);
      norms.push_back(std::sqrt(grid.dx() * acc / static_cast<double>(n)));
    } else {
      norms.push_back(oversampled_sup(grid, half, oversampling));
    }
  }
  return norms;
}

double besov_from_blocks(std::span<const double> norms, double s, double r) {
  double acc = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const int j = static_cast<int>(i) - 1;
    const double term = std::exp2(j * s) * norms[i];
    acc = is_infinite(r) ? std::max(acc, term) : acc + term;
  }
  return acc;
}

double besov_norm(const DyadicPartition& part, const Field& f, const BesovIndex& idx) {
  validate_index(idx);
  return besov_from_blocks(block_norms(part, f, idx.p), idx.s, idx.r);
}

double besov_norm(const Field& f, const BesovIndex& idx) { return besov_norm(*partition_for(f.grid()), f, idx); }

double inequality_ratio(const DyadicPartition& part, InequalityKind kind, const Field& f,
                        const std::optional<Field>& g, double s) {
  auto ratio = [](double num, double den) {
    if (!(den > 0.0)) throw DegenerateInput("inequality_ratio: zero denominator");
    return num / den;
  };
  switch (kind) {
    case InequalityKind::interpolation: {
      const auto b = block_norms(part, f, kInf);
      const double lhs = besov_from_blocks(b, 1.0, 1.0);
      return ratio(lhs, std::sqrt(besov_from_blocks(b, 0.0, kInf) * besov_from_blocks(b, 2.0, kInf)));
    }
    case InequalityKind::product:
    case InequalityKind::algebra: {
      if (!g) throw ContractViolation("inequality_ratio: product and algebra need a second field");
      const Field fg = dealiased_product(f, *g);
      const double bf = besov_from_blocks(block_norms(part, f, kInf), s, 1.0);
      const double bg = besov_from_blocks(block_norms(part, *g, kInf), s, 1.0);
      const double bfg = besov_from_blocks(block_norms(part, fg, kInf), s, 1.0);
      const double lf = lp_norm(f, kInf);
      const double lg = lp_norm(*g, kInf);
      if (kind == InequalityKind::product) return ratio(bfg, bf * lg + bg * lf);
      return ratio(bfg + lp_norm(fg, kInf), (bf + lf) * (bg + lg));
    }
  }
  throw ContractViolation("inequality_ratio: unknown kind");
}

}  // namespace fwlab
