#include "modnls/fourier_state.hpp"

#include <cmath>

#include "modnls/error.hpp"

namespace modnls {

FourierState::FourierState(int cutoff_N, double box_length)
    : FourierState(cutoff_N, Vector(static_cast<std::size_t>(2 * std::max(cutoff_N, 0) + 1)), box_length) {}

FourierState::FourierState(int cutoff_N, Vector coeffs, double box_length)
    : cutoff_(cutoff_N), box_length_(box_length), coeffs_(std::move(coeffs)) {
  if (cutoff_N < 0) throw InvalidArgument("FourierState: cutoff must be >= 0");
  if (!(box_length > 0)) throw InvalidArgument("FourierState: box length must be positive");
  if (coeffs_.size() != static_cast<std::size_t>(2 * cutoff_N + 1)) {
    throw InvalidArgument("FourierState: expected 2N+1 coefficients");
  }
}

double FourierState::norm(double alpha) const {
  double s = 0;
  for (int k = -cutoff_; k <= cutoff_; ++k) {
    const double xi = wavenumber(k);
    const double weight = alpha == 0.0 ? 1.0 : std::pow(1.0 + xi * xi, alpha);
    s += weight * std::norm((*this)[k]);
  }
  return std::sqrt(s);
}

FourierState FourierState::embed(int new_cutoff) const {
  FourierState out(new_cutoff, box_length_);
  const int m = std::min(new_cutoff, cutoff_);
  for (int k = -m; k <= m; ++k) out[k] = (*this)[k];
  return out;
}

std::complex<double> inner(const FourierState& f, const FourierState& g) {
  if (f.cutoff() != g.cutoff()) throw InvalidArgument("inner: cutoff mismatch");
  std::complex<double> s = 0;
  for (int k = -f.cutoff(); k <= f.cutoff(); ++k) s += std::conj(f[k]) * g[k];
  return s;
}

double distance(const FourierState& a, const FourierState& b, double alpha) {
  if (a.cutoff() != b.cutoff()) throw InvalidArgument("distance: cutoff mismatch");
  FourierState d(a.cutoff(), a.coeffs() - b.coeffs(), a.box_length());
  return d.norm(alpha);
}

}  // namespace modnls
