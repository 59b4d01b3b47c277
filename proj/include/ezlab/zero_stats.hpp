#pragma once

// Counting real parts of near-real zeros in unit windows.

#include <cstddef>
#include <span>
#include <vector>

#include "ezlab/zero_model.hpp"

namespace ezlab {

// Sorted real parts of the near-real zeros; counts by binary search.
class RealPartIndex {
 public:
  RealPartIndex(const ZeroSequence& zs, const NearRealPartition& p);

  // #{k near-real : x - r <= Re mu_k <= x + r}
  std::size_t count(double x, double r = 1.0) const;
  std::span<const double> real_parts() const noexcept { return alpha_; }

 private:
  std::vector<double> alpha_;
};

std::size_t m_re(const NearRealPartition& p, const ZeroSequence& zs, double x, double r = 1.0);

struct RatioProfile {
  std::vector<double> xs;
  std::vector<std::size_t> counts;
  std::vector<double> weights;
  std::vector<double> ratios;
  double sup_ratio = 0.0;
  // Least-squares slope of ln(running max of ratio) against ln|x|, with the
  // running max taken in order of increasing |x|.
  double trend_slope = 0.0;
};

RatioProfile ratio_profile(const NearRealPartition& p, const ZeroSequence& zs, const Weight& w,
                           std::span<const double> xs);

// n log-spaced points on [x_min, x_max], plus in every gap between two of them
// the window [alpha_k, alpha_k + 2] with the largest count / l ratio (a
// maximal window always starts at a real part), plus extras inside the range.
std::vector<double> profile_probes(const RealPartIndex& index, const Weight& w, double x_min,
                                   double x_max, int n, std::span<const double> extras = {});

enum class Theorem1Verdict { bounded, unbounded_trend, inconclusive };
std::string_view to_string(Theorem1Verdict v) noexcept;

struct Theorem1Report {
  Theorem1Verdict verdict = Theorem1Verdict::inconclusive;
  RatioProfile profile;
  double x_min = 0.0;
  double x_max = 0.0;
  double threshold_slope = 0.05;
  double decades = 0.0;
};

// bounded: trend_slope <= threshold_slope.
// unbounded_trend: trend_slope > 3 threshold_slope over at least two decades.
// inconclusive: otherwise.
// Throws Error{coverage} if x_max > coverage radius - 1.
Theorem1Report theorem1_check(const NearRealPartition& p, const ZeroSequence& zs,
                              const Weight& w, double x_min, double x_max,
                              double threshold_slope = 0.05, int n_probes = 200,
                              std::span<const double> extras = {});

}  // namespace ezlab
