#pragma once

#include <memory>
#include <numbers>

#include "modnls/fourier_state.hpp"
#include "modnls/modulation.hpp"

namespace modnls {

enum class EquationKind { CubicNLS, DerivativeNLS };

/// Which part of the cubic sum to return. Resonant: k2 == k or k3 == k (X^1).
/// NonResonant: the complement (X^2). Full = Resonant + NonResonant exactly.
enum class XPart { Full, Resonant, NonResonant };

struct XOperatorSpec {
  EquationKind kind = EquationKind::CubicNLS;
  /// Derivative order, dNLS only.
  double theta = 1.0;
  int cutoff_N = 8;
  std::shared_ptr<const ModulationPath> modulation;
  std::shared_ptr<PhiCache> phi_cache;
  double box_length = 2 * std::numbers::pi;
};

/// Multiplies mode k by e^{-i xi_k^2 w}.
FourierState apply_U(const FourierState& f, double w);
/// Multiplies mode k by e^{+i xi_k^2 w}.
FourierState apply_U_inverse(const FourierState& f, double w);

/// Spacing of the resonance argument: Xi = arg_step * (k - k2)(k - k3).
double resonance_step(const XOperatorSpec& spec);

/// Builds (or fetches) the Φ table for [s,t] covering every reachable Xi.
std::shared_ptr<const PhiTable> prefetch_phi(const XOperatorSpec& spec, double s, double t);

/// Mode k = sum over -k1+k2+k3 = k of Φ_{s,t}(Xi) conj(psi1(k1)) psi2(k2) psi3(k3).
FourierState x_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                     const FourierState& psi2, const FourierState& psi3, XPart part = XPart::Full);

/// Independent evaluation of the same operator from its integral definition
/// ∫_s^t U_σ^{-1} N_N(U_σ psi1, U_σ psi2, U_σ psi3) dσ. The integrand is a
/// trigonometric polynomial in the phase v = arg_step * w(σ); it is sampled
/// at equispaced v (FFT products on a zero-padded grid), its coefficients are
/// recovered by a discrete Fourier transform, and each harmonic is integrated
/// against the piecewise-linear w. quad_points is raised to the smallest
/// power of two that resolves every harmonic.
FourierState x_oracle(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                      const FourierState& psi2, const FourierState& psi3, int quad_points);

/// Wick-ordered derivative kernel: (i xi_k)^theta times the non-resonant sum
/// restricted to k1 k2 k3 != 0. Mode 0 is zero.
FourierState dnls_x_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                          const FourierState& psi2, const FourierState& psi3);

/// Phase-sampled quadrature of the Wick-ordered nonlinearity
/// (i d)^theta [conj(f1) f2 f3 - <f1,f2> f3 - <f1,f3> f2 + diag] on mean-free
/// arguments, where diag restores the doubly subtracted k1 = k2 = k3 = k term.
FourierState dnls_oracle(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                         const FourierState& psi2, const FourierState& psi3, int quad_points);

/// Dispatches on spec.kind.
FourierState operator_apply(const XOperatorSpec& spec, double s, double t, const FourierState& psi1,
                            const FourierState& psi2, const FourierState& psi3);

/// Zeroes every mode with |k| > L.
FourierState galerkin_project(const FourierState& state, int L);

/// |Im <phi, X_{s,t}(phi, phi, phi)>|.
double realness_defect(const XOperatorSpec& spec, double s, double t, const FourierState& phi);

}  // namespace modnls
