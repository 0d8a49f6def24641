#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace modnls {

using Vector = std::vector<std::complex<double>>;

double norm(const Vector& x);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator*(std::complex<double> c, const Vector& a);
Vector& operator+=(Vector& a, const Vector& b);

/// A Hölder path of (possibly nonlinear) maps, given through its increments
/// X_{s,t}(x).
struct OperatorPath {
  std::function<Vector(double s, double t, const Vector& x)> eval;
  /// Hölder exponent in time.
  double gamma = 1.0;
  /// Polynomial growth order of the local Lipschitz constant.
  int growth_M = 0;
  /// Constant of the Hölder-Lipschitz estimate, if known (0 = unknown).
  double norm_bound = 0.0;
  /// True when X_{s,t} = X_t - X_s for some path X_t, so that increments are
  /// additive over adjacent intervals.
  bool integral_derived = false;
};

/// Discrete path on an ordered time grid, linearly interpolated in between.
class HolderPath {
 public:
  HolderPath(std::vector<double> grid, std::vector<Vector> nodes, double holder_exponent);

  const std::vector<double>& grid() const noexcept { return grid_; }
  const std::vector<Vector>& nodes() const noexcept { return nodes_; }
  double holder_exponent() const noexcept { return holder_exponent_; }
  std::size_t size() const noexcept { return grid_.size(); }
  std::size_t dim() const noexcept { return nodes_.front().size(); }

  Vector at(double t) const;
  double sup_norm() const;
  /// sup over all node pairs of |g_t - g_s| / |t - s|^exponent.
  double holder_seminorm(double exponent) const;
  /// Same, restricted to adjacent nodes.
  double adjacent_holder_audit(double exponent) const;

 private:
  std::vector<double> grid_;
  std::vector<Vector> nodes_;
  double holder_exponent_;
};

struct SewingParams {
  int max_depth = 20;
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  /// Richardson order applied across dyadic levels (0 = plain Riemann sums).
  int extrapolation_order = 2;
};

struct YoungIntegral {
  Vector value;
  /// Dyadic level at which the gap criterion was met.
  int depth = 0;
  /// Gap between the last two levels.
  double last_gap = 0;
};

/// ∫_s^t X_{du}(g_u) as the limit of left-point Riemann sums on dyadic
/// partitions of [s,t].
YoungIntegral young_integral(const OperatorPath& X, const HolderPath& g, double s, double t,
                             const SewingParams& params = {});

/// (1 - 2^{1-gamma-rho})^{-1}; throws unless gamma + rho > 1.
double sewing_constant(double gamma, double rho);

/// Right-hand side of the sewing estimate for the remainder on [s,t].
double sewing_bound(double gamma, double rho, int growth_M, double x_constant, double g_holder, double g_sup,
                    double t_minus_s);

struct ProbeDomain {
  std::size_t dim = 1;
  double radius = 1.0;
  double t_min = 0.0;
  double t_max = 1.0;
  /// Time pairs and argument pairs are probed on a probes x probes grid.
  std::size_t probes = 64;
  std::uint64_t seed = 1;
};

/// Random-probe estimate (a lower bound) of
/// sup |X_{st}(x) - X_{st}(y)| / (|t-s|^gamma (1+|x|+|y|)^M |x-y|).
double probe_holder_lipschitz(const OperatorPath& X, const ProbeDomain& domain);

struct PicardWindow {
  std::size_t start_index = 0;
  std::size_t intervals = 0;
  int iterations = 0;
  double contraction = 0;
};

struct PicardSolution {
  HolderPath path;
  std::vector<PicardWindow> windows;
};

/// Picard iteration psi <- psi_0 + ∫_0^. X_{dσ}(psi_σ) on a uniform grid of
/// `grid_intervals` cells over [0,T], patched over windows that are halved
/// until the measured contraction factor falls below 1/2.
PicardSolution picard_solve(const OperatorPath& X, const Vector& psi0, double T, const SewingParams& params,
                            int max_iter, std::size_t grid_intervals = 256, bool single_window = false);

/// Explicit scheme psi_i = psi_{i-1} + X_{t_{i-1} t_i}(psi_{i-1}) with t_i = iT/n.
HolderPath euler_solve(const OperatorPath& X, const Vector& psi0, double T, std::size_t n);

struct ConvergenceRow {
  std::size_t n = 0;
  double max_error = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  /// Least-squares slope of log(max_error) vs log(n); NaN if any error is 0.
  double slope = 0;
};

/// Euler errors against `reference` (exact solution as a function of time)
/// or, when absent, against Euler at 8 * max(n_list).
ConvergenceTable convergence_study(const OperatorPath& X, const Vector& psi0, double T,
                                   std::span<const std::size_t> n_list,
                                   const std::function<Vector(double)>& reference = {});

/// max over adjacent grid pairs of | |psi_s + X_{st}(psi_s)| - |psi_s| | / |t-s|^exponent.
double conservation_check(const OperatorPath& X, const HolderPath& path, double exponent);

}  // namespace modnls
