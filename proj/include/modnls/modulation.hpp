#pragma once

#include <atomic>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace modnls {

enum class Interpolation { PiecewiseLinear };

/// Uniformly sampled scalar modulation w(t), linearly interpolated between
/// samples. Immutable once built; safe to share between threads.
class ModulationPath {
 public:
  ModulationPath(double t0, double dt, std::vector<double> values, std::string label = {},
                 std::optional<std::uint64_t> seed = {}, std::optional<double> hurst = {});

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  double t_end() const noexcept { return t0_ + static_cast<double>(values_.size() - 1) * dt_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double node_time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  Interpolation interp() const noexcept { return Interpolation::PiecewiseLinear; }

  const std::string& label() const noexcept { return label_; }
  std::optional<std::uint64_t> seed() const noexcept { return seed_; }
  std::optional<double> hurst() const noexcept { return hurst_; }
  /// Content hash of (t0, dt, values); identifies the path inside a PhiCache.
  std::uint64_t id() const noexcept { return id_; }

  /// Linear interpolation; throws InvalidArgument outside [t0, t_end].
  double operator()(double t) const;

  /// Index of the segment [node i, node i+1] that contains t, taking the
  /// segment to the right at interior nodes.
  std::size_t segment_of(double t) const noexcept;

  /// Clamps t to the span when it lies within rounding distance of it,
  /// otherwise throws.
  double checked_time(double t) const;

 private:
  double t0_;
  double dt_;
  std::vector<double> values_;
  std::string label_;
  std::optional<std::uint64_t> seed_;
  std::optional<double> hurst_;
  std::uint64_t id_;
};

/// Zero-start fractional Brownian motion on a uniform grid of n nodes.
/// Increments are drawn by circulant embedding of the fractional Gaussian
/// noise covariance, with dense Cholesky as fallback.
ModulationPath gen_fbm(double hurst, std::size_t n, double dt, std::uint64_t seed, double t0 = 0.0);

/// w(t) = slope * (t - t0) on a uniform grid of n nodes.
ModulationPath gen_linear(double slope, std::size_t n, double dt, double t0 = 0.0);

/// Centered moving average of width `width`, sampled on the same grid.
ModulationPath mollify(const ModulationPath& path, double width);

/// Same grid, values shifted by a constant.
ModulationPath shifted(const ModulationPath& path, double offset);

/// sup over grid nodes of |a(t) - b(t)|; both paths must share the grid.
double sup_gap(const ModulationPath& a, const ModulationPath& b);

/// Φ_{s,t}(a) for argument values arg_step * j, j = -half_range..half_range,
/// on a fixed interval. values[j + half_range].
struct PhiTable {
  double s = 0;
  double t = 0;
  double arg_step = 0;
  int half_range = 0;
  std::vector<std::complex<double>> values;

  const std::complex<double>& at(int j) const { return values[static_cast<std::size_t>(j + half_range)]; }
};

/// Memo of Φ values for one path. Concurrent reads are safe; writes take an
/// exclusive lock. Whole tables are evicted first-in first-out once the byte
/// budget is exceeded.
class PhiCache {
 public:
  explicit PhiCache(std::size_t max_bytes = std::size_t{64} << 20);

  std::optional<std::complex<double>> find(std::uint64_t path_id, double s, double t, double a) const;
  void store(std::uint64_t path_id, double s, double t, double a, std::complex<double> value);

  /// Table of Φ_{s,t}(arg_step * j) for |j| <= half_range, built on miss.
  std::shared_ptr<const PhiTable> table(const ModulationPath& path, double s, double t,
                                        double arg_step, int half_range);

  std::size_t hits() const noexcept;
  std::size_t misses() const noexcept;
  double hit_rate() const noexcept;
  void clear();

 private:
  using PointKey = std::tuple<std::uint64_t, double, double, double>;
  using TableKey = std::tuple<std::uint64_t, double, double, double, int>;

  std::size_t max_bytes_;
  mutable std::shared_mutex mutex_;
  std::map<PointKey, std::complex<double>> points_;
  std::map<TableKey, std::shared_ptr<const PhiTable>> tables_;
  std::vector<TableKey> table_order_;
  std::size_t table_bytes_ = 0;
  mutable std::atomic<std::size_t> hits_{0};
  mutable std::atomic<std::size_t> misses_{0};
};

/// Exact Φ^w_{s,t}(a) = ∫_s^t e^{i a w(r)} dr for the piecewise-linear path.
std::complex<double> phi(const ModulationPath& path, double s, double t, double a);
std::complex<double> phi(const ModulationPath& path, double s, double t, double a, PhiCache& cache);

/// Builds a PhiTable directly, without caching.
PhiTable make_phi_table(const ModulationPath& path, double s, double t, double arg_step, int half_range);

struct IrregularityEstimate {
  double rho = 0;
  double gamma = 0;
  /// Max over scanned (a, s, t); a lower bound of the true norm.
  double norm_estimate = 0;
  double a_grid_max = 0;
  std::size_t pair_count = 0;
  double argmax_a = 0;
  double argmax_s = 0;
  double argmax_t = 0;
};

/// Scans (1+|a|)^rho |Φ_{s,t}(a)| / |t-s|^gamma over a_grid and over pairs of
/// grid nodes i*stride < j*stride.
IrregularityEstimate irregularity_norm(const ModulationPath& path, double rho, double gamma,
                                       std::span<const double> a_grid, std::size_t pair_stride);

/// `points` values evenly spaced on [-a_max, a_max].
std::vector<double> symmetric_a_grid(double a_max, std::size_t points);

}  // namespace modnls
