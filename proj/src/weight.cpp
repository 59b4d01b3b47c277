#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ezlab/error.hpp"
#include "ezlab/zero_model.hpp"
#include "fit.hpp"

namespace ezlab {

namespace {

void require_positive_finite(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0) {
    throw Error(ErrorCode::invalid_argument,
                std::string(what) + " must be positive and finite");
  }
}

}  // namespace

Weight Weight::log(double c) {
  require_positive_finite(c, "log weight c");
  return Weight(WeightFamily::log, c);
}

Weight Weight::power(double p) {
  require_positive_finite(p, "power weight p");
  return Weight(WeightFamily::power, p);
}

Weight Weight::exp_sqrt_log(double q) {
  require_positive_finite(q, "exp_sqrt_log weight q");
  return Weight(WeightFamily::exp_sqrt_log, q);
}

Weight Weight::tabulated(std::vector<std::pair<double, double>> samples) {
  if (samples.empty()) {
    throw Error(ErrorCode::invalid_argument, "tabulated weight needs at least one sample");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto [t, l] = samples[i];
    if (!std::isfinite(t) || !std::isfinite(l)) {
      throw Error(ErrorCode::non_finite, "tabulated weight sample is not finite");
    }
    if (t < 0.0) {
      throw Error(ErrorCode::invalid_argument, "tabulated weight abscissa must be >= 0");
    }
    if (l < 1.0) {
      throw Error(ErrorCode::invalid_argument, "tabulated weight value must be >= 1");
    }
    if (i > 0) {
      if (t <= samples[i - 1].first) {
        throw Error(ErrorCode::invalid_argument,
                    "tabulated weight abscissae must be strictly increasing");
      }
      if (l < samples[i - 1].second) {
        throw Error(ErrorCode::non_monotone_weight, "tabulated weight decreases at t = " +
                                                        std::to_string(t));
      }
    }
  }
  Weight w(WeightFamily::tabulated, 0.0);
  w.table_ = std::move(samples);
  return w;
}

double Weight::operator()(double t) const {
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "weight argument must be >= 0");
  }
  switch (family_) {
    case WeightFamily::log:
      return std::max(1.0, param_ * std::log(2.0 + t));
    case WeightFamily::power:
      return std::pow(1.0 + t, param_);
    case WeightFamily::exp_sqrt_log:
      return std::exp(param_ * std::sqrt(std::log(std::numbers::e + t)));
    case WeightFamily::tabulated: {
      if (t <= table_.front().first) return table_.front().second;
      if (t >= table_.back().first) return table_.back().second;
      const auto hi = std::upper_bound(
          table_.begin(), table_.end(), t,
          [](double v, const std::pair<double, double>& s) { return v < s.first; });
      const auto lo = hi - 1;
      const double f = (t - lo->first) / (hi->first - lo->first);
      return lo->second + f * (hi->second - lo->second);
    }
  }
  return 1.0;
}

std::string_view to_string(WeightFamily family) noexcept {
  switch (family) {
    case WeightFamily::log: return "log";
    case WeightFamily::power: return "power";
    case WeightFamily::exp_sqrt_log: return "exp_sqrt_log";
    case WeightFamily::tabulated: return "tabulated";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::pass ? "pass" : "fail";
}

std::string Weight::describe() const {
  std::ostringstream os;
  os << to_string(family_);
  switch (family_) {
    case WeightFamily::log: os << "(c=" << param_ << ")"; break;
    case WeightFamily::power: os << "(p=" << param_ << ")"; break;
    case WeightFamily::exp_sqrt_log: os << "(q=" << param_ << ")"; break;
    case WeightFamily::tabulated: os << "(" << table_.size() << " samples)"; break;
  }
  return os.str();
}

WeightReport check_weight(const Weight& w, double t_max, double k) {
  if (!(t_max >= 1e3) || !std::isfinite(t_max)) {
    throw Error(ErrorCode::invalid_argument, "check_weight needs t_max >= 1e3");
  }
  if (!(k > 1.0) || !std::isfinite(k)) {
    throw Error(ErrorCode::invalid_argument, "check_weight needs k > 1");
  }
  constexpr double t_min = 10.0;
  constexpr double per_decade = 40.0;
  constexpr double tol = 0.05;
  const double decades = std::log10(t_max / t_min);
  const auto n = static_cast<std::size_t>(std::lround(per_decade * decades)) + 1;

  WeightReport r;
  r.t_max = t_max;
  r.k = k;
  r.tolerance = tol;
  r.t.resize(n);
  std::vector<double> s(n), lt(n), lkt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(n - 1);
    r.t[i] = i + 1 == n ? t_max : t_min * std::pow(10.0, decades * frac);
    s[i] = std::log(r.t[i]);
    lt[i] = w(r.t[i]);
    lkt[i] = w(k * r.t[i]);
    if (lkt[i] < lt[i] || (i > 0 && lt[i] < lt[i - 1])) {
      throw Error(ErrorCode::non_monotone_weight,
                  "weight decreases near t = " + std::to_string(r.t[i]));
    }
  }

  r.growth_ratio.resize(n);
  r.sub_root_ratio.resize(n);
  r.doubling_ratio.resize(n);
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.growth_ratio[i] = s[i] / lt[i];
    phi[i] = std::log(lt[i]);
    r.sub_root_ratio[i] = phi[i] / s[i];
    r.doubling_ratio[i] = lkt[i] / lt[i];
  }

  // d ln l / d ln t; the grid is uniform in s.
  std::vector<double> dphi(n);
  const double h = s[1] - s[0];
  dphi[0] = (phi[1] - phi[0]) / h;
  dphi[n - 1] = (phi[n - 1] - phi[n - 2]) / (s[n - 1] - s[n - 2]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    dphi[i] = (phi[i + 1] - phi[i - 1]) / (s[i + 1] - s[i - 1]);
  }

  const double t_tail = t_max / 100.0 * (1.0 - 1e-12);
  const auto first =
      static_cast<std::size_t>(std::lower_bound(r.t.begin(), r.t.end(), t_tail) - r.t.begin());
  const std::span<const double> tail_s(s.data() + first, n - first);
  std::vector<double> log_s(tail_s.size()), log_g3(tail_s.size()), log_g5(tail_s.size());
  for (std::size_t i = 0; i < tail_s.size(); ++i) {
    log_s[i] = std::log(tail_s[i]);
    log_g3[i] = std::log(r.growth_ratio[first + i]);
    log_g5[i] = std::log(r.doubling_ratio[first + i]);
  }
  const auto tail = [&](const std::vector<double>& v) {
    return std::span<const double>(v.data() + first, n - first);
  };
  constexpr double inf = std::numeric_limits<double>::infinity();

  auto& g3 = r.growth;
  g3.sup_ratio = *std::max_element(r.growth_ratio.begin(), r.growth_ratio.end());
  g3.value_at_t_max = r.growth_ratio.back();
  g3.trend = detail::ls_slope(log_s, log_g3);
  if (g3.trend < -tol) {
    g3.limit_estimate = 0.0;
  } else if (g3.trend <= tol) {
    g3.limit_estimate = std::max(0.0, detail::fit_power_law(tail_s, tail(r.growth_ratio)).limit);
  } else {
    g3.limit_estimate = inf;
  }
  g3.verdict = g3.trend <= tol ? Verdict::pass : Verdict::fail;

  auto& g4 = r.sub_root;
  g4.sup_ratio = *std::max_element(r.sub_root_ratio.begin(), r.sub_root_ratio.end());
  g4.value_at_t_max = r.sub_root_ratio.back();
  const auto fit4 = detail::fit_power_law(tail_s, tail(dphi));
  g4.trend = fit4.gamma;
  g4.limit_estimate = std::max(0.0, fit4.limit);
  g4.verdict = g4.limit_estimate < 0.5 - tol ? Verdict::pass : Verdict::fail;

  auto& g5 = r.doubling;
  g5.sup_ratio = *std::max_element(r.doubling_ratio.begin(), r.doubling_ratio.end());
  g5.value_at_t_max = r.doubling_ratio.back();
  g5.trend = detail::ls_slope(log_s, log_g5);
  g5.limit_estimate =
      g5.trend <= tol
          ? std::max(1.0, detail::fit_power_law(tail_s, tail(r.doubling_ratio)).limit)
          : inf;
  g5.verdict = g5.trend <= tol ? Verdict::pass : Verdict::fail;
  return r;
}

}  // namespace ezlab
