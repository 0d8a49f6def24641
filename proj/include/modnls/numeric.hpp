#pragma once

#include <complex>
#include <span>
#include <vector>

namespace modnls {

/// Neumaier-compensated accumulator. Works for double and std::complex<double>
/// (real and imaginary parts are compensated independently).
template <class T>
class CompensatedSum {
 public:
  void add(const T& x) { add_impl(x); }
  T value() const { return sum_ + comp_; }

 private:
  static void step(double& s, double& c, double x) {
    const double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  void add_impl(double x) { step(sum_, comp_, x); }
  void add_impl(const std::complex<double>& x) {
    double sr = sum_.real(), si = sum_.imag();
    double cr = comp_.real(), ci = comp_.imag();
    step(sr, cr, x.real());
    step(si, ci, x.imag());
    sum_ = {sr, si};
    comp_ = {cr, ci};
  }

  T sum_{};
  T comp_{};
};

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log(y) against log(x). All entries must be positive.
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

/// (e^{iθ} - 1) / (iθ), evaluated without cancellation; 4-term Taylor
/// expansion for |θ| < 1e-4.
std::complex<double> expm1_ratio(double theta);

}  // namespace modnls
