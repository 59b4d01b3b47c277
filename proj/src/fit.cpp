#include "fit.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace ezlab::detail {

double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) return 0.0;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

PowerLawFit fit_power_law(std::span<const double> s, std::span<const double> y) {
  const std::size_t n = s.size();
  PowerLawFit best;
  double best_res = std::numeric_limits<double>::infinity();
  std::vector<double> u(n);
  constexpr int steps = 800;
  for (int g = 0; g < steps; ++g) {
    const double gamma = 0.05 + (8.0 - 0.05) * g / (steps - 1);
    double mu = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = std::pow(s[i], -gamma);
      mu += u[i];
      my += y[i];
    }
    mu /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double suu = 0.0, suy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      suu += (u[i] - mu) * (u[i] - mu);
      suy += (u[i] - mu) * (y[i] - my);
    }
    const double c = suu > 0.0 ? suy / suu : 0.0;
    const double l = my - c * mu;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = l + c * u[i] - y[i];
      res += r * r;
    }
    if (res < best_res) {
      best_res = res;
      best = {l, c, gamma};
    }
  }
  return best;
}

}  // namespace ezlab::detail
