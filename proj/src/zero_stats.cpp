#include "ezlab/zero_stats.hpp"

#include <algorithm>
#include <cmath>

#include "ezlab/error.hpp"
#include "fit.hpp"

namespace ezlab {

RealPartIndex::RealPartIndex(const ZeroSequence& zs, const NearRealPartition& p) {
  if (p.total() != zs.size()) {
    throw Error(ErrorCode::invalid_argument, "partition does not match the sequence");
  }
  alpha_.reserve(p.near().size());
  for (std::size_t k : p.near()) alpha_.push_back(zs[k].real());
  std::sort(alpha_.begin(), alpha_.end());
}

std::size_t RealPartIndex::count(double x, double r) const {
  if (!(r > 0.0)) throw Error(ErrorCode::invalid_argument, "window radius must be > 0");
  const auto lo = std::lower_bound(alpha_.begin(), alpha_.end(), x - r);
  const auto hi = std::upper_bound(alpha_.begin(), alpha_.end(), x + r);
  return static_cast<std::size_t>(hi - lo);
}

std::size_t m_re(const NearRealPartition& p, const ZeroSequence& zs, double x, double r) {
  return RealPartIndex(zs, p).count(x, r);
}

namespace {

RatioProfile profile_from(const RealPartIndex& index, const Weight& w,
                          std::span<const double> xs) {
  RatioProfile prof;
  prof.xs.assign(xs.begin(), xs.end());
  for (double x : xs) {
    const std::size_t c = index.count(x);
    const double l = w(std::abs(x));
    prof.counts.push_back(c);
    prof.weights.push_back(l);
    prof.ratios.push_back(static_cast<double>(c) / l);
  }
  if (!prof.ratios.empty()) {
    prof.sup_ratio = *std::max_element(prof.ratios.begin(), prof.ratios.end());
  }
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(xs[a]) < std::abs(xs[b]); });
  std::vector<double> lx, ly;
  double run = 0.0;
  for (std::size_t i : order) {
    run = std::max(run, prof.ratios[i]);
    if (run > 0.0 && std::abs(xs[i]) > 0.0) {
      lx.push_back(std::log(std::abs(xs[i])));
      ly.push_back(std::log(run));
    }
  }
  prof.trend_slope = detail::ls_slope(lx, ly);
  return prof;
}

}  // namespace

RatioProfile ratio_profile(const NearRealPartition& p, const ZeroSequence& zs, const Weight& w,
                           std::span<const double> xs) {
  return profile_from(RealPartIndex(zs, p), w, xs);
}

std::vector<double> profile_probes(const RealPartIndex& index, const Weight& w, double x_min,
                                   double x_max, int n, std::span<const double> extras) {
  if (!(x_min > 0.0) || !(x_max > x_min) || n < 2) {
    throw Error(ErrorCode::invalid_argument, "profile probes need 0 < x_min < x_max and n >= 2");
  }
  std::vector<double> xs;
  const double span = std::log(x_max / x_min);
  for (int i = 0; i < n; ++i) {
    xs.push_back(i + 1 == n ? x_max : x_min * std::exp(span * i / (n - 1)));
  }
  const auto alpha = index.real_parts();
  std::vector<double> peaks;
  for (int i = 0; i + 1 < n; ++i) {
    const double lo = xs[i], hi = xs[i + 1];
    // candidates x = alpha_k + 1 with lo <= x < hi
    auto it = std::lower_bound(alpha.begin(), alpha.end(), lo - 1.0);
    double best_x = 0.0, best = -1.0;
    for (; it != alpha.end() && *it + 1.0 < hi; ++it) {
      const double x = *it + 1.0;
      if (x < lo) continue;
      const double ratio = static_cast<double>(index.count(x)) / w(std::abs(x));
      if (ratio > best) {
        best = ratio;
        best_x = x;
      }
    }
    if (best > 0.0) peaks.push_back(best_x);
  }
  xs.insert(xs.end(), peaks.begin(), peaks.end());
  for (double e : extras) {
    if (e >= x_min && e <= x_max) xs.push_back(e);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

std::string_view to_string(Theorem1Verdict v) noexcept {
  switch (v) {
    case Theorem1Verdict::bounded: return "bounded";
    case Theorem1Verdict::unbounded_trend: return "unbounded_trend";
    case Theorem1Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

Theorem1Report theorem1_check(const NearRealPartition& p, const ZeroSequence& zs,
                              const Weight& w, double x_min, double x_max,
                              double threshold_slope, int n_probes,
                              std::span<const double> extras) {
  if (!(threshold_slope > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "threshold slope must be > 0");
  }
  const double limit = zs.coverage_radius() - 1.0;
  if (x_max > limit || -x_min > limit) {
    throw Error(ErrorCode::coverage, "range [" + std::to_string(x_min) + ", " +
                                         std::to_string(x_max) +
                                         "] exceeds coverage radius - 1 = " +
                                         std::to_string(limit));
  }
  const RealPartIndex index(zs, p);
  const auto xs = profile_probes(index, w, x_min, x_max, n_probes, extras);
  Theorem1Report r;
  r.profile = profile_from(index, w, xs);
  r.x_min = x_min;
  r.x_max = x_max;
  r.threshold_slope = threshold_slope;
  r.decades = std::log10(x_max / x_min);
  const double s = r.profile.trend_slope;
  if (s <= threshold_slope) {
    r.verdict = Theorem1Verdict::bounded;
  } else if (s > 3.0 * threshold_slope && r.decades >= 2.0) {
    r.verdict = Theorem1Verdict::unbounded_trend;
  } else {
    r.verdict = Theorem1Verdict::inconclusive;
  }
  return r;
}

}  // namespace ezlab
