#include "modnls/nls_torus.hpp"

#include <cmath>

#include "modnls/error.hpp"
#include "modnls/fft.hpp"
#include "modnls/numeric.hpp"

namespace modnls {

namespace {

void check_arguments(const XOperatorSpec& spec, double s, double t, const FourierState& a, const FourierState& b,
                     const FourierState& c) {
  if (!spec.modulation) throw InvalidArgument("operator: spec has no modulation path");
  if (a.cutoff() != spec.cutoff_N || b.cutoff() != spec.cutoff_N || c.cutoff() != spec.cutoff_N) {
    throw InvalidArgument("operator: cutoff mismatch between spec and states");
  }
  if (a.box_length() != spec.box_length || b.box_length() != spec.box_length ||
      c.box_length() != spec.box_length) {
    throw InvalidArgument("operator: box length mismatch between spec and states");
  }
  if (!(s <= t)) throw InvalidArgument("operator: requires s <= t");
  spec.modulation->checked_time(s);
  spec.modulation->checked_time(t);
}

int reachable_half_range(int N) { return 4 * N * N; }

// (i xi)^theta on the principal branch.
std::complex<double> derivative_symbol(double xi, double theta) {
  if (xi == 0) return 0.0;
  const double phase = (xi > 0 ? 1.0 : -1.0) * std::numbers::pi * theta / 2;
  return std::pow(std::abs(xi), theta) * std::polar(1.0, phase);
}

// conj(u1) u2 u3 truncated to |k| <= N, via FFT on a grid free of aliasing
// for the retained modes.
FourierState cubic_product(const FourierState& u1, const FourierState& u2, const FourierState& u3) {
  const int N = u1.cutoff();
  const std::size_t M = fft::next_pow2(static_cast<std::size_t>(4 * N + 2));
  const auto load = [&](const FourierState& f) {
    Vector grid(M);
    for (int k = -N; k <= N; ++k) {
      grid[static_cast<std::size_t>((k + static_cast<long>(M)) % static_cast<long>(M))] = f[k];
    }
    fft::backward(grid);
    return grid;
  };
  Vector g1 = load(u1), g2 = load(u2), g3 = load(u3);
  for (std::size_t j = 0; j < M; ++j) g1[j] = std::conj(g1[j]) * g2[j] * g3[j];
  fft::forward(g1);
  FourierState out(N, u1.box_length());
  const double inv = 1.0 / static_cast<double>(M);
  for (int k = -N; k <= N; ++k) {
    out[k] = g1[static_cast<std::size_t>((k + static_cast<long>(M)) % static_cast<long>(M))] * inv;
  }
  return out;
}

// Integrates sigma -> F(v(sigma)) over [s,t] given samples of the
// trigonometric polynomial F on an equispaced v-grid, v = arg_step * w.
template <class Integrand>
FourierState phase_quadrature(const XOperatorSpec& spec, double s, double t, int quad_points,
                              Integrand&& integrand) {
  const int N = spec.cutoff_N;
  FourierState out(N, spec.box_length);
  if (t == s) return out;
  if (quad_points < 2) throw InvalidArgument("oracle: quad_points must be >= 2");
  const int half = reachable_half_range(N);
  const std::size_t needed = fft::next_pow2(static_cast<std::size_t>(2 * half + 1));
  const std::size_t Q = std::max(static_cast<std::size_t>(quad_points), needed);
  const double step = resonance_step(spec);

  std::vector<Vector> samples(static_cast<std::size_t>(2 * N + 1), Vector(Q));
  for (std::size_t q = 0; q < Q; ++q) {
    const double v = 2 * std::numbers::pi * static_cast<double>(q) / static_cast<double>(Q);
    const FourierState value = integrand(v / step);
    for (int k = -N; k <= N; ++k) samples[static_cast<std::size_t>(k + N)][q] = value[k];
  }

  const PhiTable table = make_phi_table(*spec.modulation, s, t, step, half);
  const double invQ = 1.0 / static_cast<double>(Q);
  for (int k = -N; k <= N; ++k) {
    Vector& g = samples[static_cast<std::size_t>(k + N)];
    fft::forward(g);
    CompensatedSum<std::complex<double>> acc;
    for (int j = -half; j <= half; ++j) {
      const std::size_t idx = static_cast<std::size_t>((j + static_cast<long>(Q)) % static_cast<long>(Q));
      acc.add(g[idx] * invQ * table.at(j));
    }
    out[k] = acc.value();
  }
  return out;
}

}  // namespace

FourierState apply_U(const FourierState& f, double w) {
  FourierState out(f);
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) {
    const double xi = f.wavenumber(k);
    out[k] *= std::polar(1.0, -xi * xi * w);
  }
  return out;
}

FourierState apply_U_inverse(const FourierState& f, double w) { return apply_U(f, -w); }

double resonance_step(const XOperatorSpec& spec) {
  const double base = 2 * std::numbers::pi / spec.box_length;
  return 2 * base * base;
}

std::shared_ptr<const PhiTable> prefetch_phi(const XOperatorSpec& spec, double s, double t) {
  if (!spec.modulation) throw InvalidArgument("prefetch_phi: spec has no modulation path");
  const int half = reachable_half_range(spec.cutoff_N);
  if (spec.phi_cache) return spec.phi_cache->table(*spec.modulation, s, t, resonance_step(spec), half);
  return std::make_shared<const PhiTable>(make_phi_table(*spec.modulation, s, t, resonance_step(spec), half));
}

FourierState x_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                     const FourierState& psi2, const FourierState& psi3, XPart part) {
  check_arguments(spec, s, t, psi1, psi2, psi3);
  const int N = spec.cutoff_N;
  FourierState out(N, spec.box_length);
  if (t == s) return out;
  const auto table = prefetch_phi(spec, s, t);

  Vector conj1(psi1.size());
  for (std::size_t i = 0; i < conj1.size(); ++i) conj1[i] = std::conj(psi1.coeffs()[i]);
  const auto c1 = [&](int k) { return conj1[static_cast<std::size_t>(k + N)]; };

  for (int k = -N; k <= N; ++k) {
    CompensatedSum<std::complex<double>> resonant, non_resonant;
    for (int k2 = -N; k2 <= N; ++k2) {
      const std::complex<double> b = psi2[k2];
      if (b == 0.0) continue;
      const int lo = std::max(-N, k - k2 - N);
      const int hi = std::min(N, k - k2 + N);
      for (int k3 = lo; k3 <= hi; ++k3) {
        const int k1 = k2 + k3 - k;
        const std::complex<double> term = table->at((k - k2) * (k - k3)) * c1(k1) * b * psi3[k3];
        if (k2 == k || k3 == k) {
          resonant.add(term);
        } else {
          non_resonant.add(term);
        }
      }
    }
    switch (part) {
      case XPart::Full: out[k] = resonant.value() + non_resonant.value(); break;
      case XPart::Resonant: out[k] = resonant.value(); break;
      case XPart::NonResonant: out[k] = non_resonant.value(); break;
    }
  }
  return out;
}

FourierState x_oracle(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                      const FourierState& psi2, const FourierState& psi3, int quad_points) {
  check_arguments(spec, s, t, psi1, psi2, psi3);
  return phase_quadrature(spec, s, t, quad_points, [&](double w) {
    return apply_U_inverse(cubic_product(apply_U(psi1, w), apply_U(psi2, w), apply_U(psi3, w)), w);
  });
}

FourierState dnls_x_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                          const FourierState& psi2, const FourierState& psi3) {
  if (!(spec.theta > 0)) throw InvalidArgument("dnls_x_apply: theta must be positive");
  check_arguments(spec, s, t, psi1, psi2, psi3);
  const int N = spec.cutoff_N;
  FourierState out(N, spec.box_length);
  if (t == s) return out;
  const auto table = prefetch_phi(spec, s, t);

  for (int k = -N; k <= N; ++k) {
    if (k == 0) continue;
    CompensatedSum<std::complex<double>> acc;
    for (int k2 = -N; k2 <= N; ++k2) {
      if (k2 == 0 || k2 == k) continue;
      const std::complex<double> b = psi2[k2];
      if (b == 0.0) continue;
      const int lo = std::max(-N, k - k2 - N);
      const int hi = std::min(N, k - k2 + N);
      for (int k3 = lo; k3 <= hi; ++k3) {
        const int k1 = k2 + k3 - k;
        if (k3 == 0 || k3 == k || k1 == 0) continue;
        acc.add(table->at((k - k2) * (k - k3)) * std::conj(psi1[k1]) * b * psi3[k3]);
      }
    }
    out[k] = derivative_symbol(out.wavenumber(k), spec.theta) * acc.value();
  }
  return out;
}

FourierState dnls_oracle(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                         const FourierState& psi2, const FourierState& psi3, int quad_points) {
  if (!(spec.theta > 0)) throw InvalidArgument("dnls_oracle: theta must be positive");
  check_arguments(spec, s, t, psi1, psi2, psi3);
  const auto mean_free = [](FourierState f) {
    f[0] = 0.0;
    return f;
  };
  const FourierState f1 = mean_free(psi1), f2 = mean_free(psi2), f3 = mean_free(psi3);
  const std::complex<double> p12 = inner(f1, f2), p13 = inner(f1, f3);

  FourierState out = phase_quadrature(spec, s, t, quad_points, [&](double w) {
    const FourierState u1 = apply_U(f1, w), u2 = apply_U(f2, w), u3 = apply_U(f3, w);
    FourierState n = cubic_product(u1, u2, u3);
    for (int k = -spec.cutoff_N; k <= spec.cutoff_N; ++k) {
      n[k] += -p12 * u3[k] - p13 * u2[k] + std::conj(u1[k]) * u2[k] * u3[k];
    }
    return apply_U_inverse(n, w);
  });
  for (int k = -spec.cutoff_N; k <= spec.cutoff_N; ++k) {
    out[k] *= derivative_symbol(out.wavenumber(k), spec.theta);
  }
  return out;
}

FourierState operator_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                            const FourierState& psi2, const FourierState& psi3) {
  if (spec.kind == EquationKind::DerivativeNLS) return dnls_x_apply(spec, s, t, psi1, psi2, psi3);
  return x_apply(spec, s, t, psi1, psi2, psi3);
}

FourierState galerkin_project(const FourierState& state, int L) {
  if (L < 0) throw InvalidArgument("galerkin_project: L must be >= 0");
  if (L > state.cutoff()) throw InvalidArgument("galerkin_project: L exceeds the state cutoff");
  FourierState out(state);
  for (int k = -state.cutoff(); k <= state.cutoff(); ++k) {
    if (std::abs(k) > L) out[k] = 0.0;
  }
  return out;
}

double realness_defect(const XOperatorSpec& spec, double s, double t, const FourierState& phi) {
  if (spec.kind != EquationKind::CubicNLS) throw InvalidArgument("realness_defect: cubic operator only");
  return std::abs(inner(phi, x_apply(spec, s, t, phi, phi, phi)).imag());
}

}  // namespace modnls
