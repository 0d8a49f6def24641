#include "modnls/young.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "modnls/error.hpp"
#include "modnls/numeric.hpp"

namespace modnls {

double norm(const Vector& x) {
  double s = 0;
  for (const auto& c : x) s += std::norm(c);
  return std::sqrt(s);
}

Vector operator+(const Vector& a, const Vector& b) {
  Vector out(a);
  out += b;
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vector operator*(std::complex<double> c, const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

Vector& operator+=(Vector& a, const Vector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

HolderPath::HolderPath(std::vector<double> grid, std::vector<Vector> nodes, double holder_exponent)
    : grid_(std::move(grid)), nodes_(std::move(nodes)), holder_exponent_(holder_exponent) {
  if (grid_.empty() || grid_.size() != nodes_.size()) {
    throw InvalidArgument("HolderPath: grid and nodes must be nonempty and of equal length");
  }
  for (std::size_t i = 1; i < grid_.size(); ++i) {
    if (!(grid_[i] > grid_[i - 1])) throw InvalidArgument("HolderPath: grid must be increasing");
  }
}

Vector HolderPath::at(double t) const {
  const double slack = 1e-12 * std::max({1.0, std::abs(grid_.front()), std::abs(grid_.back())});
  if (t < grid_.front() - slack || t > grid_.back() + slack) {
    throw InvalidArgument("HolderPath: time outside grid span");
  }
  if (t <= grid_.front()) return nodes_.front();
  if (t >= grid_.back()) return nodes_.back();
  auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - grid_.begin());
  const std::size_t i = j - 1;
  if (t == grid_[i]) return nodes_[i];
  const double lambda = (t - grid_[i]) / (grid_[j] - grid_[i]);
  Vector out(nodes_[i].size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = nodes_[i][k] + lambda * (nodes_[j][k] - nodes_[i][k]);
  return out;
}

double HolderPath::sup_norm() const {
  double s = 0;
  for (const auto& x : nodes_) s = std::max(s, norm(x));
  return s;
}

double HolderPath::holder_seminorm(double exponent) const {
  double best = 0;
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    for (std::size_t j = i + 1; j < grid_.size(); ++j) {
      const double r = norm(nodes_[j] - nodes_[i]) / std::pow(grid_[j] - grid_[i], exponent);
      best = std::max(best, r);
    }
  }
  return best;
}

double HolderPath::adjacent_holder_audit(double exponent) const {
  double best = 0;
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    best = std::max(best, norm(nodes_[i + 1] - nodes_[i]) / std::pow(grid_[i + 1] - grid_[i], exponent));
  }
  return best;
}

double sewing_constant(double gamma, double rho) {
  if (!(gamma + rho > 1)) throw InvalidArgument("sewing: exponents must satisfy gamma + rho > 1");
  return 1.0 / (1.0 - std::pow(2.0, 1.0 - gamma - rho));
}

double sewing_bound(double gamma, double rho, int growth_M, double x_constant, double g_holder, double g_sup,
                    double t_minus_s) {
  return sewing_constant(gamma, rho) * x_constant * g_holder * std::pow(1.0 + g_sup, growth_M) *
         std::pow(t_minus_s, gamma + rho);
}

YoungIntegral young_integral(const OperatorPath& X, const HolderPath& g, double s, double t,
                             const SewingParams& params) {
  if (!(X.gamma + g.holder_exponent() > 1)) {
    throw InvalidArgument("young_integral: exponents not summable (gamma + rho <= 1)");
  }
  if (params.max_depth < 1 || !(params.abs_tol > 0) || !(params.rel_tol > 0)) {
    throw InvalidArgument("young_integral: invalid sewing parameters");
  }
  if (!(t >= s)) throw InvalidArgument("young_integral: requires s <= t");
  if (t == s) return {Vector(g.dim(), 0.0), 0, 0.0};

  const int order_cap = std::max(0, params.extrapolation_order);
  // romberg[j] holds the order-j extrapolant of the previous level.
  std::vector<Vector> previous;
  Vector estimate_prev;
  double gap = std::numeric_limits<double>::infinity();

  for (int level = 0; level <= params.max_depth; ++level) {
    const std::size_t cells = std::size_t{1} << level;
    const double h = (t - s) / static_cast<double>(cells);
    Vector sum(g.dim(), 0.0);
    double left = s;
    for (std::size_t i = 0; i < cells; ++i) {
      const double right = i + 1 == cells ? t : s + h * static_cast<double>(i + 1);
      sum += X.eval(left, right, g.at(left));
      left = right;
    }

    std::vector<Vector> current{std::move(sum)};
    const int order = std::min(level, order_cap);
    for (int j = 1; j <= order; ++j) {
      const double factor = 1.0 / (std::pow(2.0, j) - 1.0);
      Vector next = current[j - 1] + factor * (current[j - 1] - previous[j - 1]);
      current.push_back(std::move(next));
    }
    Vector estimate = current.back();

    if (level > 0) {
      gap = norm(estimate - estimate_prev);
      if (gap <= params.abs_tol + params.rel_tol * norm(estimate)) {
        return {std::move(estimate), level, gap};
      }
    }
    previous = std::move(current);
    estimate_prev = std::move(estimate);
  }
  std::ostringstream msg;
  msg << "young_integral: max depth " << params.max_depth << " reached without stabilization on [" << s << ", "
      << t << "], last gap " << gap;
  throw NumericalFailure("not_stabilized", msg.str(), t);
}

double probe_holder_lipschitz(const OperatorPath& X, const ProbeDomain& domain) {
  if (domain.probes == 0 || domain.dim == 0 || !(domain.t_max > domain.t_min)) {
    throw InvalidArgument("probe: invalid domain");
  }
  std::mt19937_64 rng(domain.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double span = domain.t_max - domain.t_min;

  std::vector<std::pair<double, double>> times;
  for (std::size_t i = 0; i < domain.probes; ++i) {
    const double len = span * std::pow(10.0, -4.0 * unit(rng));
    const double s = domain.t_min + (span - len) * unit(rng);
    times.emplace_back(s, std::min(domain.t_max, s + len));
  }
  std::vector<std::pair<Vector, Vector>> args;
  for (std::size_t i = 0; i < domain.probes; ++i) {
    Vector x(domain.dim), d(domain.dim);
    for (auto& c : x) c = {normal(rng), normal(rng)};
    for (auto& c : d) c = {normal(rng), normal(rng)};
    const double rx = domain.radius * unit(rng) / std::max(norm(x), 1e-300);
    const double rd = domain.radius * std::pow(10.0, -3.0 * unit(rng)) / std::max(norm(d), 1e-300);
    x = std::complex<double>(rx) * x;
    Vector y = x + std::complex<double>(rd) * d;
    args.emplace_back(std::move(x), std::move(y));
  }

  double best = 0;
  for (const auto& [s, t] : times) {
    if (!(t > s)) continue;
    const double tfac = std::pow(t - s, X.gamma);
    for (const auto& [x, y] : args) {
      const double dxy = norm(x - y);
      if (dxy == 0) continue;
      const double denom = tfac * std::pow(1.0 + norm(x) + norm(y), X.growth_M) * dxy;
      best = std::max(best, norm(X.eval(s, t, x) - X.eval(s, t, y)) / denom);
    }
  }
  return best;
}

namespace {

// sup norm plus C^{1/2} seminorm of a - b over a window of nodes.
double half_holder_distance(const std::vector<double>& grid, const std::vector<Vector>& a,
                            const std::vector<Vector>& b, std::size_t lo, std::size_t hi) {
  std::vector<Vector> diff;
  diff.reserve(hi - lo + 1);
  double sup = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    diff.push_back(a[i] - b[i]);
    sup = std::max(sup, norm(diff.back()));
  }
  double semi = 0;
  for (std::size_t i = 0; i < diff.size(); ++i) {
    for (std::size_t j = i + 1; j < diff.size(); ++j) {
      semi = std::max(semi, norm(diff[j] - diff[i]) / std::sqrt(grid[lo + j] - grid[lo + i]));
    }
  }
  return sup + semi;
}

void check_finite(const Vector& x, double t) {
  const double n = norm(x);
  if (!std::isfinite(n) || n > 1e12) {
    std::ostringstream msg;
    msg << "norm blow-up (" << n << ") at t=" << t;
    throw NumericalFailure("diverged", msg.str(), t);
  }
}

}  // namespace

PicardSolution picard_solve(const OperatorPath& X, const Vector& psi0, double T, const SewingParams& params,
                            int max_iter, std::size_t grid_intervals, bool single_window) {
  if (!(X.gamma > 0.5)) throw InvalidArgument("picard_solve: requires gamma > 1/2");
  if (!(T > 0) || grid_intervals < 1 || max_iter < 1) throw InvalidArgument("picard_solve: invalid arguments");

  std::vector<double> grid(grid_intervals + 1);
  for (std::size_t i = 0; i <= grid_intervals; ++i) {
    grid[i] = T * static_cast<double>(i) / static_cast<double>(grid_intervals);
  }
  std::vector<Vector> psi(grid_intervals + 1, psi0);
  std::vector<PicardWindow> windows;

  std::size_t start = 0;
  while (start < grid_intervals) {
    std::size_t width = grid_intervals - start;
    bool done = false;
    while (!done) {
      if (width < 1) {
        throw NumericalFailure("no_contraction", "picard_solve: window shrank below the grid spacing",
                               grid[start]);
      }
      const std::size_t end = start + width;
      std::vector<Vector> iterate(psi);
      for (std::size_t i = start + 1; i <= end; ++i) iterate[i] = psi[start];

      double prev_dist = 0;
      double contraction = 0;
      bool halve = false;
      for (int it = 1; it <= max_iter; ++it) {
        std::vector<double> wgrid(grid.begin() + static_cast<std::ptrdiff_t>(start),
                                  grid.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        std::vector<Vector> wnodes(iterate.begin() + static_cast<std::ptrdiff_t>(start),
                                   iterate.begin() + static_cast<std::ptrdiff_t>(end) + 1);
        HolderPath g(std::move(wgrid), std::move(wnodes), 0.5);

        std::vector<Vector> next(iterate);
        Vector acc = psi[start];
        for (std::size_t i = start; i < end; ++i) {
          acc += young_integral(X, g, grid[i], grid[i + 1], params).value;
          check_finite(acc, grid[i + 1]);
          next[i + 1] = acc;
        }
        const double dist = half_holder_distance(grid, next, iterate, start, end);
        iterate = std::move(next);
        if (it >= 2 && prev_dist > 0) {
          const double ratio = dist / prev_dist;
          contraction = std::max(contraction, ratio);
          if (ratio >= 0.5 && dist > params.abs_tol) {
            halve = true;
            break;
          }
        }
        prev_dist = dist;
        if (dist < params.abs_tol) {
          for (std::size_t i = start + 1; i <= end; ++i) psi[i] = iterate[i];
          windows.push_back({start, width, it, contraction});
          done = true;
          break;
        }
        if (it == max_iter) {
          std::ostringstream msg;
          msg << "picard_solve: max_iter " << max_iter << " exceeded on window starting at t=" << grid[start]
              << " (last distance " << dist << ")";
          throw NumericalFailure("max_iter", msg.str(), grid[start]);
        }
      }
      if (halve) width /= 2;
    }
    start += width;
    if (single_window) {
      grid.resize(start + 1);
      psi.resize(start + 1);
      break;
    }
  }
  return {HolderPath(std::move(grid), std::move(psi), 0.5), std::move(windows)};
}

HolderPath euler_solve(const OperatorPath& X, const Vector& psi0, double T, std::size_t n) {
  if (n < 1) throw InvalidArgument("euler_solve: n must be >= 1");
  if (!(T > 0)) throw InvalidArgument("euler_solve: T must be positive");
  std::vector<double> grid(n + 1);
  std::vector<Vector> nodes;
  nodes.reserve(n + 1);
  nodes.push_back(psi0);
  grid[0] = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    grid[i] = T * static_cast<double>(i) / static_cast<double>(n);
    Vector next = nodes.back() + X.eval(grid[i - 1], grid[i], nodes.back());
    check_finite(next, grid[i]);
    nodes.push_back(std::move(next));
  }
  return HolderPath(std::move(grid), std::move(nodes), 0.5);
}

ConvergenceTable convergence_study(const OperatorPath& X, const Vector& psi0, double T,
                                   std::span<const std::size_t> n_list,
                                   const std::function<Vector(double)>& reference) {
  if (n_list.size() < 3) throw InvalidArgument("convergence_study: need at least 3 resolutions");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw InvalidArgument("convergence_study: n_list must be ascending");
  }
  std::optional<HolderPath> fine;
  const std::size_t n_ref = 8 * n_list.back();
  if (!reference) {
    for (auto n : n_list) {
      if (n_ref % n != 0) throw InvalidArgument("convergence_study: each n must divide 8*max(n)");
    }
    fine = euler_solve(X, psi0, T, n_ref);
  }

  ConvergenceTable table;
  std::vector<double> ns, errs;
  bool any_zero = false;
  for (auto n : n_list) {
    const HolderPath coarse = euler_solve(X, psi0, T, n);
    double err = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      const Vector ref = reference ? reference(coarse.grid()[i]) : fine->nodes()[i * (n_ref / n)];
      err = std::max(err, norm(coarse.nodes()[i] - ref));
    }
    table.rows.push_back({n, err});
    ns.push_back(static_cast<double>(n));
    errs.push_back(err);
    any_zero = any_zero || err == 0;
  }
  table.slope = any_zero ? std::numeric_limits<double>::quiet_NaN() : fit_loglog_slope(ns, errs);
  return table;
}

double conservation_check(const OperatorPath& X, const HolderPath& path, double exponent) {
  double worst = 0;
  const auto& grid = path.grid();
  const auto& nodes = path.nodes();
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double base = norm(nodes[i]);
    const double moved = norm(nodes[i] + X.eval(grid[i], grid[i + 1], nodes[i]));
    worst = std::max(worst, std::abs(moved - base) / std::pow(grid[i + 1] - grid[i], exponent));
  }
  return worst;
}

}  // namespace modnls
