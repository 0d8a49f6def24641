#pragma once

#include <complex>
#include <numbers>

#include "modnls/young.hpp"

namespace modnls {

/// Truncated Fourier series on a periodic box: coefficients for the modes
/// |k| <= N, wavenumber xi_k = 2 pi k / box_length.
class FourierState {
 public:
  explicit FourierState(int cutoff_N, double box_length = 2 * std::numbers::pi);
  FourierState(int cutoff_N, Vector coeffs, double box_length = 2 * std::numbers::pi);

  int cutoff() const noexcept { return cutoff_; }
  double box_length() const noexcept { return box_length_; }
  std::size_t size() const noexcept { return coeffs_.size(); }
  double wavenumber(int k) const noexcept { return 2 * std::numbers::pi * k / box_length_; }

  std::complex<double>& operator[](int k) { return coeffs_[static_cast<std::size_t>(k + cutoff_)]; }
  const std::complex<double>& operator[](int k) const { return coeffs_[static_cast<std::size_t>(k + cutoff_)]; }

  const Vector& coeffs() const noexcept { return coeffs_; }
  Vector& coeffs() noexcept { return coeffs_; }

  /// (sum_k (1 + xi_k^2)^alpha |c_k|^2)^{1/2}.
  double norm(double alpha = 0.0) const;

  /// Same field at another cutoff: zero-padded or truncated.
  FourierState embed(int new_cutoff) const;

 private:
  int cutoff_;
  double box_length_;
  Vector coeffs_;
};

/// sum_k conj(f_k) g_k; conjugate-linear in the first slot.
std::complex<double> inner(const FourierState& f, const FourierState& g);

/// H^alpha norm of a - b; both must share cutoff and box.
double distance(const FourierState& a, const FourierState& b, double alpha = 0.0);

}  // namespace modnls
