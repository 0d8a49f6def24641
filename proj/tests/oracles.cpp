#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include "modnls/fft.hpp"

namespace oracle {

namespace {

std::complex<double> trapezoid_level(const modnls::ModulationPath& w, double s, double t, double a, int cells) {
  // Breakpoints: s, interior path nodes, t.
  std::vector<double> breaks{s};
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double x = w.node_time(i);
    if (x > s && x < t) breaks.push_back(x);
  }
  breaks.push_back(t);
  std::complex<double> total = 0;
  for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
    const double lo = breaks[b], hi = breaks[b + 1];
    const double h = (hi - lo) / cells;
    std::complex<double> acc = 0.5 * (std::polar(1.0, a * w(lo)) + std::polar(1.0, a * w(hi)));
    for (int j = 1; j < cells; ++j) acc += std::polar(1.0, a * w(lo + j * h));
    total += acc * h;
  }
  return total;
}

}  // namespace

std::complex<double> phi_trapezoid(const modnls::ModulationPath& w, double s, double t, double a, int oversample) {
  std::vector<std::complex<double>> R;
  for (int cells = oversample / 8; cells <= oversample; cells *= 2) R.push_back(trapezoid_level(w, s, t, a, cells));
  for (std::size_t order = 1; order < R.size(); ++order) {
    const double f = std::pow(4.0, static_cast<double>(order));
    for (std::size_t i = R.size() - 1; i >= order; --i) R[i] = (f * R[i] - R[i - 1]) / (f - 1);
  }
  return R.back();
}

modnls::FourierState cubic_bruteforce(const modnls::FourierState& p1, const modnls::FourierState& p2,
                                      const modnls::FourierState& p3,
                                      const std::function<std::complex<double>(double)>& Phi) {
  const int N = p1.cutoff();
  modnls::FourierState out(N, p1.box_length());
  for (int k1 = -N; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      for (int k3 = -N; k3 <= N; ++k3) {
        const int k = -k1 + k2 + k3;
        if (std::abs(k) > N) continue;
        const double xi = out.wavenumber(k), xi2 = out.wavenumber(k2), xi3 = out.wavenumber(k3);
        out[k] += Phi(2 * (xi - xi2) * (xi - xi3)) * std::conj(p1[k1]) * p2[k2] * p3[k3];
      }
    }
  }
  return out;
}

modnls::FourierState dnls_bruteforce(const modnls::FourierState& p1, const modnls::FourierState& p2,
                                     const modnls::FourierState& p3, double theta,
                                     const std::function<std::complex<double>(double)>& Phi) {
  const int N = p1.cutoff();
  modnls::FourierState out(N, p1.box_length());
  for (int k1 = -N; k1 <= N; ++k1) {
    for (int k2 = -N; k2 <= N; ++k2) {
      for (int k3 = -N; k3 <= N; ++k3) {
        const int k = -k1 + k2 + k3;
        if (std::abs(k) > N || k2 == k || k3 == k || k1 * k2 * k3 == 0) continue;
        const double xi = out.wavenumber(k), xi2 = out.wavenumber(k2), xi3 = out.wavenumber(k3);
        const std::complex<double> symbol = std::pow(std::complex<double>(0.0, xi), theta);
        out[k] += symbol * Phi(2 * (xi - xi2) * (xi - xi3)) * std::conj(p1[k1]) * p2[k2] * p3[k3];
      }
    }
  }
  return out;
}

std::complex<double> phi_linear_closed_form(double s, double t, double a) {
  if (a == 0) return t - s;
  return (std::polar(1.0, a * t) - std::polar(1.0, a * s)) / std::complex<double>(0.0, a);
}

std::complex<double> gaussian_free(double x, double t, double sigma) {
  const std::complex<double> d = sigma * sigma + std::complex<double>(0.0, 2 * t);
  return std::sqrt(sigma * sigma / d) * std::exp(-x * x / (2.0 * d));
}

modnls::BoxField split_step(const modnls::BoxField& u0, double mu, double T, std::size_t steps, double sign) {
  const std::size_t M = u0.grid_points();
  const double h = T / static_cast<double>(steps);
  std::vector<std::complex<double>> u = u0.values();
  const auto nonlinear = [&](double dt) {
    for (auto& v : u) v *= std::polar(1.0, sign * dt * std::pow(std::abs(v), mu));
  };
  for (std::size_t n = 0; n < steps; ++n) {
    nonlinear(h / 2);
    modnls::fft::forward(u);
    for (std::size_t j = 0; j < M; ++j) {
      const double k = j < M / 2 ? double(j) : double(j) - double(M);
      const double xi = 2 * std::numbers::pi * k / u0.box_length();
      u[j] *= std::polar(1.0 / static_cast<double>(M), -xi * xi * h);
    }
    modnls::fft::backward(u);
    nonlinear(h / 2);
  }
  return modnls::BoxField(M, u0.box_length(), u);
}

namespace {
double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol) return left + right + (left + right - whole) / 15;
  return simpson_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}
}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 40);
}

double fgn_autocovariance(double hurst, int k) {
  const double h2 = 2 * hurst;
  return 0.5 * (std::pow(std::abs(k + 1.0), h2) + std::pow(std::abs(k - 1.0), h2) - 2 * std::pow(std::abs(double(k)), h2));
}

}  // namespace oracle
