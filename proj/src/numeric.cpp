#include "modnls/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "modnls/error.hpp"

namespace modnls {

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("fit_slope: need at least two paired samples");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) throw InvalidArgument("fit_slope: degenerate abscissae");
  return sxy / sxx;
}

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx, ly;
  lx.reserve(x.size());
  ly.reserve(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) {
      throw InvalidArgument("fit_loglog_slope: entries must be positive");
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_slope(lx, ly);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::complex<double> expm1_ratio(double theta) {
  if (std::abs(theta) < 1e-4) {
    const double t2 = theta * theta;
    return {1.0 - t2 / 6.0, theta / 2.0 - t2 * theta / 24.0};
  }
  const double half = std::sin(0.5 * theta);
  return {std::sin(theta) / theta, 2.0 * half * half / theta};
}

}  // namespace modnls
