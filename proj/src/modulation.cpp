#include "modnls/modulation.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>

#include "modnls/error.hpp"
#include "modnls/fft.hpp"
#include "modnls/numeric.hpp"

namespace modnls {
namespace {

std::uint64_t fnv_mix(std::uint64_t h, double x) {
  auto bits = std::bit_cast<std::uint64_t>(x);
  for (int b = 0; b < 8; ++b) {
    h ^= (bits >> (8 * b)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// One linear piece [u, u + duration] of the path restricted to [s, t].
struct Piece {
  double w_left;
  double slope;
  double duration;
};

std::vector<Piece> pieces(const ModulationPath& path, double s, double t) {
  std::vector<Piece> out;
  if (t <= s) return out;
  const auto v = path.values();
  const std::size_t first = path.segment_of(s);
  std::size_t last = path.segment_of(t);
  if (last > first && path.node_time(last) >= t) --last;
  for (std::size_t i = first; i <= last; ++i) {
    const double left = path.node_time(i);
    const double u = i == first ? s : left;
    const double w = i == last ? t : path.node_time(i + 1);
    if (w <= u) continue;
    const double m = (v[i + 1] - v[i]) / path.dt();
    out.push_back({v[i] + m * (u - left), m, w - u});
  }
  return out;
}

std::complex<double> sum_pieces(const std::vector<Piece>& ps, double a) {
  CompensatedSum<std::complex<double>> acc;
  for (const auto& p : ps) {
    const double phase = a * p.w_left;
    acc.add(std::complex<double>(std::cos(phase), std::sin(phase)) * p.duration *
            expm1_ratio(a * p.slope * p.duration));
  }
  return acc.value();
}

void validate_grid(std::size_t n, double dt) {
  if (n < 2) throw InvalidArgument("modulation path needs at least 2 samples");
  if (!(dt > 0) || !std::isfinite(dt)) throw InvalidArgument("modulation path needs dt > 0");
}

}  // namespace

ModulationPath::ModulationPath(double t0, double dt, std::vector<double> values, std::string label,
                               std::optional<std::uint64_t> seed, std::optional<double> hurst)
    : t0_(t0), dt_(dt), values_(std::move(values)), label_(std::move(label)), seed_(seed), hurst_(hurst) {
  validate_grid(values_.size(), dt_);
  for (double x : values_) {
    if (!std::isfinite(x)) throw InvalidArgument("modulation path has non-finite sample");
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv_mix(h, t0_);
  h = fnv_mix(h, dt_);
  for (double x : values_) h = fnv_mix(h, x);
  id_ = h;
}

std::size_t ModulationPath::segment_of(double t) const noexcept {
  const double x = std::floor((t - t0_) / dt_);
  if (!(x > 0)) return 0;
  const auto i = static_cast<std::size_t>(x);
  return std::min(i, values_.size() - 2);
}

double ModulationPath::checked_time(double t) const {
  const double slack = 1e-12 * std::max({1.0, std::abs(t0_), std::abs(t_end())});
  if (!(t >= t0_ - slack) || !(t <= t_end() + slack)) {
    throw InvalidArgument("time " + std::to_string(t) + " outside modulation span [" +
                          std::to_string(t0_) + ", " + std::to_string(t_end()) + "]");
  }
  return std::clamp(t, t0_, t_end());
}

double ModulationPath::operator()(double t) const {
  t = checked_time(t);
  const std::size_t i = segment_of(t);
  const double frac = (t - node_time(i)) / dt_;
  return values_[i] + frac * (values_[i + 1] - values_[i]);
}

ModulationPath gen_fbm(double hurst, std::size_t n, double dt, std::uint64_t seed, double t0) {
  if (!(hurst > 0 && hurst < 1)) throw InvalidArgument("fBm Hurst index must lie in (0,1)");
  validate_grid(n, dt);

  const std::size_t m = n - 1;  // number of increments
  const double scale = std::pow(dt, 2 * hurst);
  auto autocov = [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    return 0.5 * scale *
           (std::pow(kk + 1, 2 * hurst) + std::pow(std::abs(kk - 1), 2 * hurst) - 2 * std::pow(kk, 2 * hurst));
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> increments(m);

  const std::size_t big = 2 * m;
  std::vector<std::complex<double>> row(big);
  for (std::size_t k = 0; k <= m; ++k) row[k] = autocov(k);
  for (std::size_t k = m + 1; k < big; ++k) row[k] = row[big - k];
  fft::forward(row);

  double lambda_max = 0;
  double lambda_min = 0;
  for (const auto& l : row) {
    lambda_max = std::max(lambda_max, l.real());
    lambda_min = std::min(lambda_min, l.real());
  }

  if (lambda_min >= -1e-10 * lambda_max) {
    std::vector<std::complex<double>> w(big);
    for (std::size_t k = 0; k < big; ++k) {
      const double a = normal(rng);
      const double b = normal(rng);
      const double amp = std::sqrt(std::max(row[k].real(), 0.0) / static_cast<double>(big));
      w[k] = {amp * a, amp * b};
    }
    fft::forward(w);
    for (std::size_t k = 0; k < m; ++k) increments[k] = w[k].real();
  } else {
    Eigen::MatrixXd cov(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) cov(i, j) = autocov(i > j ? i - j : j - i);
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericalFailure("embedding", "fBm: circulant embedding not nonnegative and Cholesky failed");
    }
    Eigen::VectorXd z(m);
    for (std::size_t i = 0; i < m; ++i) z(i) = normal(rng);
    Eigen::VectorXd x = llt.matrixL() * z;
    for (std::size_t i = 0; i < m; ++i) increments[i] = x(i);
  }

  std::vector<double> values(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) values[i + 1] = values[i] + increments[i];
  return ModulationPath(t0, dt, std::move(values), "fbm", seed, hurst);
}

ModulationPath gen_linear(double slope, std::size_t n, double dt, double t0) {
  validate_grid(n, dt);
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = slope * (static_cast<double>(i) * dt);
  return ModulationPath(t0, dt, std::move(values), "linear");
}

ModulationPath mollify(const ModulationPath& path, double width) {
  if (!(width >= 0)) throw InvalidArgument("mollify: width must be nonnegative");
  const auto v = path.values();
  const std::size_t n = v.size();
  const auto half = static_cast<std::size_t>(std::floor(0.5 * width / path.dt() + 1e-9));
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + v[i];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, i + half);
    out[i] = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
  }
  return ModulationPath(path.t0(), path.dt(), std::move(out), path.label() + "-mollified", path.seed(),
                        path.hurst());
}

ModulationPath shifted(const ModulationPath& path, double offset) {
  std::vector<double> out(path.values().begin(), path.values().end());
  for (double& x : out) x += offset;
  return ModulationPath(path.t0(), path.dt(), std::move(out), path.label() + "-shifted", path.seed(),
                        path.hurst());
}

double sup_gap(const ModulationPath& a, const ModulationPath& b) {
  if (a.size() != b.size() || a.dt() != b.dt() || a.t0() != b.t0()) {
    throw InvalidArgument("sup_gap: paths must share the same grid");
  }
  double gap = 0;
  for (std::size_t i = 0; i < a.size(); ++i) gap = std::max(gap, std::abs(a.values()[i] - b.values()[i]));
  return gap;
}

std::complex<double> phi(const ModulationPath& path, double s, double t, double a) {
  s = path.checked_time(s);
  t = path.checked_time(t);
  if (t < s) throw InvalidArgument("phi: requires s <= t");
  if (a == 0) return {t - s, 0.0};
  const auto value = sum_pieces(pieces(path, s, t), std::abs(a));
  return a < 0 ? std::conj(value) : value;
}

std::complex<double> phi(const ModulationPath& path, double s, double t, double a, PhiCache& cache) {
  if (auto hit = cache.find(path.id(), s, t, a)) return *hit;
  const auto value = phi(path, s, t, a);
  cache.store(path.id(), s, t, a, value);
  return value;
}

PhiTable make_phi_table(const ModulationPath& path, double s, double t, double arg_step, int half_range) {
  s = path.checked_time(s);
  t = path.checked_time(t);
  if (t < s) throw InvalidArgument("phi table: requires s <= t");
  if (half_range < 0) throw InvalidArgument("phi table: negative range");
  PhiTable table{s, t, arg_step, half_range, {}};
  table.values.resize(2 * static_cast<std::size_t>(half_range) + 1);
  const auto ps = pieces(path, s, t);
  table.values[static_cast<std::size_t>(half_range)] = {t - s, 0.0};
  for (int j = 1; j <= half_range; ++j) {
    const auto value = sum_pieces(ps, std::abs(arg_step) * j);
    const auto pos = arg_step >= 0 ? value : std::conj(value);
    table.values[static_cast<std::size_t>(half_range + j)] = pos;
    table.values[static_cast<std::size_t>(half_range - j)] = std::conj(pos);
  }
  return table;
}

PhiCache::PhiCache(std::size_t max_bytes) : max_bytes_(max_bytes) {}

std::optional<std::complex<double>> PhiCache::find(std::uint64_t path_id, double s, double t, double a) const {
  std::shared_lock lock(mutex_);
  auto it = points_.find({path_id, s, t, a});
  if (it == points_.end()) {
    ++misses_;
    return std::nullopt;
  }
  ++hits_;
  return it->second;
}

void PhiCache::store(std::uint64_t path_id, double s, double t, double a, std::complex<double> value) {
  std::unique_lock lock(mutex_);
  if (points_.size() * 48 > max_bytes_) points_.clear();
  points_.emplace(PointKey{path_id, s, t, a}, value);
}

std::shared_ptr<const PhiTable> PhiCache::table(const ModulationPath& path, double s, double t, double arg_step,
                                                int half_range) {
  const TableKey key{path.id(), s, t, arg_step, half_range};
  {
    std::shared_lock lock(mutex_);
    if (auto it = tables_.find(key); it != tables_.end()) {
      ++hits_;
      return it->second;
    }
  }
  ++misses_;
  auto built = std::make_shared<const PhiTable>(make_phi_table(path, s, t, arg_step, half_range));
  const std::size_t bytes = built->values.size() * sizeof(std::complex<double>);
  std::unique_lock lock(mutex_);
  if (auto it = tables_.find(key); it != tables_.end()) return it->second;
  std::size_t evict = 0;
  while (table_bytes_ + bytes > max_bytes_ && evict < table_order_.size()) {
    auto it = tables_.find(table_order_[evict]);
    table_bytes_ -= it->second->values.size() * sizeof(std::complex<double>);
    tables_.erase(it);
    ++evict;
  }
  table_order_.erase(table_order_.begin(), table_order_.begin() + static_cast<std::ptrdiff_t>(evict));
  tables_.emplace(key, built);
  table_order_.push_back(key);
  table_bytes_ += bytes;
  return built;
}

std::size_t PhiCache::hits() const noexcept { return hits_; }
std::size_t PhiCache::misses() const noexcept { return misses_; }

double PhiCache::hit_rate() const noexcept {
  const double total = static_cast<double>(hits_ + misses_);
  return total > 0 ? static_cast<double>(hits_) / total : 0.0;
}

void PhiCache::clear() {
  std::unique_lock lock(mutex_);
  points_.clear();
  tables_.clear();
  table_order_.clear();
  table_bytes_ = 0;
}

std::vector<double> symmetric_a_grid(double a_max, std::size_t points) {
  if (points == 0) throw InvalidArgument("a-grid needs at least one point");
  if (!(a_max >= 0)) throw InvalidArgument("a-grid extent must be nonnegative");
  if (points == 1) return {0.0};
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = -a_max + 2.0 * a_max * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  if (points % 2 == 1) grid[points / 2] = 0.0;
  return grid;
}

IrregularityEstimate irregularity_norm(const ModulationPath& path, double rho, double gamma,
                                       std::span<const double> a_grid, std::size_t pair_stride) {
  if (!(rho >= 0)) throw InvalidArgument("irregularity: rho must be >= 0");
  if (!(gamma > 0 && gamma <= 1)) throw InvalidArgument("irregularity: gamma must lie in (0,1]");
  if (a_grid.empty()) throw InvalidArgument("irregularity: empty a-grid");
  if (pair_stride < 1) throw InvalidArgument("irregularity: stride must be >= 1");

  const auto v = path.values();
  const std::size_t nodes = (v.size() - 1) / pair_stride + 1;
  const double step = path.dt() * static_cast<double>(pair_stride);

  // Pairs are at uniform separations, so |t-s|^{-gamma} depends only on j-i.
  std::vector<double> inv_len(nodes);
  std::vector<double> length(nodes);
  for (std::size_t d = 1; d < nodes; ++d) {
    length[d] = step * static_cast<double>(d);
    inv_len[d] = std::pow(length[d], -gamma);
  }

  std::vector<double> abs_grid;
  for (double a : a_grid) abs_grid.push_back(std::abs(a));
  std::sort(abs_grid.begin(), abs_grid.end());
  abs_grid.erase(std::unique(abs_grid.begin(), abs_grid.end()), abs_grid.end());

  IrregularityEstimate est;
  est.rho = rho;
  est.gamma = gamma;
  est.a_grid_max = abs_grid.back();
  est.pair_count = nodes * (nodes - 1) / 2;

  std::vector<std::complex<double>> prefix(nodes);
  for (double a : abs_grid) {
    const double weight = std::pow(1.0 + a, rho);
    double best = 0;
    std::size_t bi = 0, bj = 0;
    if (a == 0) {
      // |Φ(0)| = t - s exactly.
      for (std::size_t d = 1; d < nodes; ++d) {
        const double r = length[d] * inv_len[d];
        if (r > best) {
          best = r;
          bi = 0;
          bj = d;
        }
      }
    } else {
      prefix[0] = 0;
      CompensatedSum<std::complex<double>> acc;
      for (std::size_t k = 1; k < nodes; ++k) {
        for (std::size_t seg = (k - 1) * pair_stride; seg < k * pair_stride; ++seg) {
          const double m = (v[seg + 1] - v[seg]) / path.dt();
          const double phase = a * v[seg];
          acc.add(std::complex<double>(std::cos(phase), std::sin(phase)) * path.dt() *
                  expm1_ratio(a * m * path.dt()));
        }
        prefix[k] = acc.value();
      }
      double best_sq = 0;
      for (std::size_t i = 0; i + 1 < nodes; ++i) {
        const auto ci = prefix[i];
        for (std::size_t j = i + 1; j < nodes; ++j) {
          const auto diff = prefix[j] - ci;
          const double w = inv_len[j - i];
          const double r2 = std::norm(diff) * w * w;
          if (r2 > best_sq) {
            best_sq = r2;
            bi = i;
            bj = j;
          }
        }
      }
      best = std::sqrt(best_sq);
    }
    const double value = weight * best;
    if (value > est.norm_estimate) {
      est.norm_estimate = value;
      est.argmax_a = a;
      est.argmax_s = path.node_time(bi * pair_stride);
      est.argmax_t = path.node_time(bj * pair_stride);
    }
  }
  return est;
}

}  // namespace modnls
