#include "modnls/strichartz_line.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "modnls/error.hpp"
#include "modnls/fft.hpp"
#include "modnls/numeric.hpp"

namespace modnls {

BoxField::BoxField(std::size_t grid_points, double box_length)
    : BoxField(grid_points, box_length, Vector(grid_points)) {}

BoxField::BoxField(std::size_t grid_points, double box_length, Vector values)
    : box_length_(box_length), values_(std::move(values)) {
  if (grid_points < 2 || (grid_points & (grid_points - 1)) != 0) {
    throw InvalidArgument("BoxField: grid_points must be a power of two");
  }
  if (!(box_length > 0)) throw InvalidArgument("BoxField: box length must be positive");
  if (values_.size() != grid_points) throw InvalidArgument("BoxField: value count does not match grid");
}

BoxField BoxField::from_function(std::size_t grid_points, double box_length,
                                 const std::function<std::complex<double>(double)>& f) {
  BoxField out(grid_points, box_length);
  for (std::size_t j = 0; j < grid_points; ++j) out.values_[j] = f(out.x(j));
  return out;
}

BoxField BoxField::from_spectrum(std::size_t grid_points, double box_length, Vector spectrum) {
  if (spectrum.size() != grid_points) throw InvalidArgument("BoxField: spectrum size does not match grid");
  fft::backward(spectrum);
  return BoxField(grid_points, box_length, std::move(spectrum));
}

double BoxField::xi(std::size_t j) const noexcept {
  const std::size_t M = values_.size();
  const double k = j < M / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(M);
  return 2 * std::numbers::pi * k / box_length_;
}

Vector BoxField::spectrum() const {
  Vector c(values_);
  fft::forward(c);
  const double inv = 1.0 / static_cast<double>(c.size());
  for (auto& v : c) v *= inv;
  return c;
}

double BoxField::lp_norm(double p) const {
  if (!(p >= 1)) throw InvalidArgument("lp_norm: p must be >= 1");
  CompensatedSum<double> acc;
  for (const auto& v : values_) acc.add(std::pow(std::abs(v), p));
  return std::pow(acc.value() * dx(), 1.0 / p);
}

double BoxField::spectral_l2_norm() const {
  double s = 0;
  for (const auto& c : spectrum()) s += std::norm(c);
  return std::sqrt(box_length_ * s);
}

double BoxField::h1_norm() const {
  const Vector c = spectrum();
  double s = 0;
  for (std::size_t j = 0; j < c.size(); ++j) s += (1 + xi(j) * xi(j)) * std::norm(c[j]);
  return std::sqrt(box_length_ * s);
}

double BoxField::homogeneous_sobolev(double s) const {
  const Vector c = spectrum();
  double acc = 0;
  for (std::size_t j = 1; j < c.size(); ++j) acc += std::pow(std::abs(xi(j)), 2 * s) * std::norm(c[j]);
  return std::sqrt(box_length_ * acc);
}

double BoxField::boundary_mass() const {
  double inside = 0, outside = 0;
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double a = std::abs(values_[j]);
    if (std::abs(x(j)) >= 0.4 * box_length_) {
      outside = std::max(outside, a);
    } else {
      inside = std::max(inside, a);
    }
  }
  const double peak = std::max(inside, outside);
  return peak == 0 ? 0.0 : outside / peak;
}

BoxField operator+(const BoxField& a, const BoxField& b) {
  if (a.grid_points() != b.grid_points() || a.box_length() != b.box_length()) {
    throw InvalidArgument("BoxField: grid mismatch");
  }
  return BoxField(a.grid_points(), a.box_length(), a.values() + b.values());
}

BoxField operator*(std::complex<double> c, const BoxField& a) {
  return BoxField(a.grid_points(), a.box_length(), c * a.values());
}

namespace {

// Multiplies spectrum c by e^{-i xi^2 w} in place.
void phase_multiply(const BoxField& layout, Vector& c, double w) {
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double xi = layout.xi(j);
    c[j] *= std::polar(1.0, -xi * xi * w);
  }
}

double trapezoid(std::span<const double> f, double h) {
  if (f.size() < 2) return 0.0;
  CompensatedSum<double> acc;
  for (std::size_t i = 0; i < f.size(); ++i) acc.add((i == 0 || i + 1 == f.size() ? 0.5 : 1.0) * f[i]);
  return acc.value() * h;
}

// Spectrum of |u|^mu u, evaluated on a 3/2-padded grid.
Vector power_nonlinearity(const Vector& c, double mu) {
  const std::size_t M = c.size();
  const std::size_t P = 3 * M / 2;
  Vector padded(P);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t idx = j < M / 2 ? j : P - (M - j);
    padded[idx] = c[j];
  }
  fft::backward(padded);
  for (auto& u : padded) u *= std::pow(std::abs(u), mu);
  fft::forward(padded);
  Vector out(M);
  const double inv = 1.0 / static_cast<double>(P);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t idx = j < M / 2 ? j : P - (M - j);
    out[j] = padded[idx] * inv;
  }
  return out;
}

double spectral_norm(const BoxField& layout, const Vector& c, double h1_weight) {
  double s = 0;
  for (std::size_t j = 0; j < c.size(); ++j) s += (1 + h1_weight * layout.xi(j) * layout.xi(j)) * std::norm(c[j]);
  return std::sqrt(layout.box_length() * s);
}

struct StepFailure {};

}  // namespace

BoxField propagate(const BoxField& field, double w_value) {
  Vector c = field.spectrum();
  phase_multiply(field, c, w_value);
  return BoxField::from_spectrum(field.grid_points(), field.box_length(), std::move(c));
}

std::vector<BoxField> duhamel(const ModulationPath& w, const std::function<BoxField(double)>& source, double T,
                              std::size_t quad_points) {
  if (quad_points < 1) throw InvalidArgument("duhamel: quad_points must be >= 1");
  if (!(T > 0)) throw InvalidArgument("duhamel: T must be positive");
  const double h = T / static_cast<double>(quad_points);
  std::vector<BoxField> out;
  Vector acc, previous;
  for (std::size_t m = 0; m <= quad_points; ++m) {
    const double t = m == quad_points ? T : h * static_cast<double>(m);
    const double wt = w(w.checked_time(t));
    const BoxField psi = source(t);
    Vector c = psi.spectrum();
    phase_multiply(psi, c, -wt);
    if (m == 0) {
      acc.assign(c.size(), 0.0);
    } else {
      for (std::size_t j = 0; j < c.size(); ++j) acc[j] += 0.5 * h * (previous[j] + c[j]);
    }
    previous = std::move(c);
    Vector result(acc);
    phase_multiply(psi, result, wt);
    out.push_back(BoxField::from_spectrum(psi.grid_points(), psi.box_length(), std::move(result)));
  }
  return out;
}

double mixed_norm(const std::vector<BoxField>& fields, double T, double p) {
  if (fields.size() < 2) throw InvalidArgument("mixed_norm: need at least two time samples");
  std::vector<double> f;
  f.reserve(fields.size());
  for (const auto& u : fields) f.push_back(std::pow(u.lp_norm(2 * p), p));
  return std::pow(trapezoid(f, T / static_cast<double>(fields.size() - 1)), 1.0 / p);
}

double l1l2_norm(const std::vector<BoxField>& fields, double T) {
  if (fields.size() < 2) throw InvalidArgument("l1l2_norm: need at least two time samples");
  std::vector<double> f;
  for (const auto& u : fields) f.push_back(u.l2_norm());
  return trapezoid(f, T / static_cast<double>(fields.size() - 1));
}

StrichartzFit strichartz_fit(const ModulationPath& w, const std::function<BoxField(double)>& source, double p,
                             const std::vector<double>& T_list, std::size_t quad_points, double smoothing_alpha) {
  if (!(p > 2 && p <= 5)) throw InvalidArgument("strichartz_fit: p must lie in (2, 5]");
  if (T_list.size() < 3) throw InvalidArgument("strichartz_fit: need at least 3 values of T");
  StrichartzFit fit;
  std::vector<double> Ts, ratios;
  for (double T : T_list) {
    std::vector<BoxField> sources;
    for (std::size_t m = 0; m <= quad_points; ++m) {
      sources.push_back(source(m == quad_points ? T : T * static_cast<double>(m) / static_cast<double>(quad_points)));
    }
    StrichartzRow row;
    row.T = T;
    row.source_norm = l1l2_norm(sources, T);
    if (!(row.source_norm > 0)) throw InvalidArgument("strichartz_fit: zero source");
    const auto fields = duhamel(w, source, T, quad_points);
    row.duhamel_norm = mixed_norm(fields, T, p);
    row.ratio = row.duhamel_norm / row.source_norm;
    if (smoothing_alpha > 0) {
      std::vector<double> f;
      for (const auto& u : fields) {
        Vector density(u.values().size());
        for (std::size_t j = 0; j < density.size(); ++j) density[j] = std::norm(u.values()[j]);
        const double v = BoxField(u.grid_points(), u.box_length(), std::move(density))
                             .homogeneous_sobolev(smoothing_alpha / 2);
        f.push_back(v * v);
      }
      row.smoothing = std::sqrt(trapezoid(f, T / static_cast<double>(quad_points)));
    }
    fit.max_constant = std::max(fit.max_constant, row.ratio);
    Ts.push_back(T);
    ratios.push_back(row.ratio);
    fit.rows.push_back(row);
  }
  fit.slope = fit_loglog_slope(Ts, ratios);
  return fit;
}

double free_mixed_norm(const ModulationPath& w, const BoxField& u0, double p, double T, std::size_t quad_points) {
  if (quad_points < 1) throw InvalidArgument("free_mixed_norm: quad_points must be >= 1");
  const Vector c0 = u0.spectrum();
  std::vector<BoxField> fields;
  for (std::size_t m = 0; m <= quad_points; ++m) {
    const double t = m == quad_points ? T : T * static_cast<double>(m) / static_cast<double>(quad_points);
    Vector c(c0);
    phase_multiply(u0, c, w(w.checked_time(t)));
    fields.push_back(BoxField::from_spectrum(u0.grid_points(), u0.box_length(), std::move(c)));
  }
  return mixed_norm(fields, T, p);
}

namespace {

LineSolution mild_attempt(const ModulationPath& w, const BoxField& u0, double mu, double T, std::size_t n,
                          double tol, double sign) {
  const std::size_t M = u0.grid_points();
  const double h = T / static_cast<double>(n);
  const std::complex<double> coef(0.0, 0.5 * h * sign);

  // Interaction-frame spectra: v = U_t^{-1} u, F = U_t^{-1} (|u|^mu u).
  const auto to_frame = [&](Vector c, double wt) {
    phase_multiply(u0, c, -wt);
    return c;
  };
  const auto from_frame = [&](Vector v, double wt) {
    phase_multiply(u0, v, wt);
    return v;
  };

  LineSolution sol;
  sol.final_field = u0;
  double w_prev = w(w.checked_time(0.0));
  Vector v = to_frame(u0.spectrum(), w_prev);
  Vector F = to_frame(power_nonlinearity(from_frame(v, w_prev), mu), w_prev);
  sol.times.push_back(0.0);
  sol.l2.push_back(spectral_norm(u0, v, 0.0));
  sol.h1.push_back(spectral_norm(u0, v, 1.0));

  for (std::size_t i = 1; i <= n; ++i) {
    const double t = i == n ? T : h * static_cast<double>(i);
    const double wt = w(w.checked_time(t));
    Vector guess(M);
    for (std::size_t j = 0; j < M; ++j) guess[j] = v[j] + 2.0 * coef * F[j];
    Vector F_new;
    double prev_diff = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      F_new = to_frame(power_nonlinearity(from_frame(guess, wt), mu), wt);
      Vector next(M);
      double diff = 0, size = 0;
      for (std::size_t j = 0; j < M; ++j) {
        next[j] = v[j] + coef * (F[j] + F_new[j]);
        diff += std::norm(next[j] - guess[j]);
        size += std::norm(next[j]);
      }
      diff = std::sqrt(diff);
      size = std::sqrt(size);
      guess = std::move(next);
      if (diff <= tol * size) {
        converged = true;
        break;
      }
      if (it >= 3 && diff >= prev_diff) break;
      prev_diff = diff;
    }
    if (!converged) throw StepFailure{};
    F = to_frame(power_nonlinearity(from_frame(guess, wt), mu), wt);
    v = std::move(guess);

    const double l2 = spectral_norm(u0, v, 0.0);
    if (!std::isfinite(l2) || l2 > 1e12) {
      std::ostringstream msg;
      msg << "mild_solve_power: norm blow-up at t=" << t;
      throw NumericalFailure("diverged", msg.str(), t);
    }
    sol.times.push_back(t);
    sol.l2.push_back(l2);
    sol.h1.push_back(spectral_norm(u0, v, 1.0));
    if (i % 16 == 0 || i == n) {
      const BoxField u = BoxField::from_spectrum(M, u0.box_length(), from_frame(v, wt));
      if (!u.guard_ok()) {
        std::ostringstream msg;
        msg << "mild_solve_power: field reached the box boundary at t=" << t;
        throw NumericalFailure("guard", msg.str(), t);
      }
      if (i == n) sol.final_field = u;
    }
  }
  sol.steps_used = n;
  return sol;
}

}  // namespace

LineSolution mild_solve_power(const ModulationPath& w, const BoxField& u0, double mu, double T,
                              std::size_t n_steps, double fixed_point_tol, double sign) {
  if (!(mu > 1 && mu <= 4)) throw InvalidArgument("mild_solve_power: mu must lie in (1, 4]");
  if (!(T > 0) || n_steps < 1 || !(fixed_point_tol > 0)) throw InvalidArgument("mild_solve_power: invalid arguments");
  if (!u0.guard_ok()) throw InvalidArgument("mild_solve_power: initial data violates the box guard");
  std::size_t n = n_steps;
  for (int halvings = 0; halvings <= 8; ++halvings, n *= 2) {
    try {
      LineSolution sol = mild_attempt(w, u0, mu, T, n, fixed_point_tol, sign);
      sol.halvings = halvings;
      return sol;
    } catch (const StepFailure&) {
    }
  }
  throw NumericalFailure("no_contraction", "mild_solve_power: fixed point failed after 8 step halvings", 0.0);
}

GNResult gn_check(const BoxField& f, double p, double eps) {
  if (!(p > 2)) throw InvalidArgument("gn_check: p must exceed 2");
  if (!(eps > 0)) throw InvalidArgument("gn_check: eps must be positive");
  GNResult r;
  r.s = 0.5 - 1.0 / p + eps / 2;
  r.theta = (2 * p - 2) / ((2 + eps) * p - 2);
  r.lhs = f.lp_norm(p);
  if (!(r.lhs > 0)) throw InvalidArgument("gn_check: zero field");
  r.rhs = std::pow(f.lp_norm(1.0), 1 - r.theta) * std::pow(f.homogeneous_sobolev(r.s), r.theta);
  r.ratio = r.lhs / r.rhs;
  return r;
}

}  // namespace modnls
