#pragma once

// Small least-squares helpers shared by the finite-range trend estimators.

#include <span>

namespace ezlab::detail {

// Ordinary least-squares slope of y against x. Zero when x is degenerate.
double ls_slope(std::span<const double> x, std::span<const double> y);

struct PowerLawFit {
  double limit = 0.0;   // L
  double scale = 0.0;   // C
  double gamma = 0.0;
};

// Fits y ~ L + C s^-gamma by scanning gamma over [0.05, 8] and solving the
// linear problem in (L, C) for each; the residual minimiser wins.
PowerLawFit fit_power_law(std::span<const double> s, std::span<const double> y);

}  // namespace ezlab::detail
