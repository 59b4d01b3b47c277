#include "ezlab/invertibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ezlab/error.hpp"

namespace ezlab {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

struct Probe {
  double x = 0.0;
  double value = neg_inf;
  double threshold = 0.0;
  bool ok = false;  // converged evaluation
  double margin() const { return ok ? value - threshold : neg_inf; }
  bool passes() const { return ok && value >= threshold; }
};

struct Outcome {
  Probe best;
  bool found = false;
  bool issue = false;
};

// Searches [x - W, x + W] for a converged point with value >= thr(x'). Grid
// points are visited nearest-first and the first success wins; otherwise the
// best local maxima of value - thr are refined by golden-section search.
template <class Thr>
Outcome search_segment(const LogModulusFunction& f, double x, double W, Thr thr,
                       const SearchOptions& opt) {
  if (!(W > 0.0) || !std::isfinite(W)) {
    throw Error(ErrorCode::invalid_argument, "search window must be positive and finite");
  }
  const double step = std::max(opt.min_step, 2.0 * W / opt.cells);
  auto M = static_cast<long>(std::floor(W / step));
  while (M > 0 && M * step > W) --M;

  Outcome out;
  bool saw_bad = false;
  const auto eval = [&](double xp) {
    Probe p;
    p.x = xp;
    p.threshold = thr(xp);
    const LogModulusResult r = f.at(Complex(xp, 0.0));
    p.value = r.value;
    p.ok = r.status == EvalStatus::converged;
    if (r.status == EvalStatus::non_converged) saw_bad = true;
    if (p.margin() > out.best.margin()) out.best = p;
    return p;
  };

  std::vector<Probe> grid(static_cast<std::size_t>(2 * M + 1));
  bool first = true;
  for (long d = 0; d <= M; ++d) {
    for (long s : {1L, -1L}) {
      if (d == 0 && s < 0) continue;
      const long i = s * d;
      const Probe p = eval(x + static_cast<double>(i) * step);
      if (first) {
        out.best = p;
        first = false;
      }
      grid[static_cast<std::size_t>(i + M)] = p;
      if (p.passes()) {
        out.best = p;
        out.found = true;
        return out;
      }
    }
  }

  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = grid[i].margin();
    if (g == neg_inf) continue;
    const double left = i > 0 ? grid[i - 1].margin() : neg_inf;
    const double right = i + 1 < grid.size() ? grid[i + 1].margin() : neg_inf;
    if (g >= left && g >= right) maxima.push_back(i);
  }
  std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) {
    return grid[a].margin() > grid[b].margin();
  });
  if (maxima.size() > static_cast<std::size_t>(opt.refine_candidates)) {
    maxima.resize(static_cast<std::size_t>(opt.refine_candidates));
  }
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i : maxima) {
    const double lo_x = std::max(x - W, grid[i].x - step);
    const double hi_x = std::min(x + W, grid[i].x + step);
    double a = lo_x, b = hi_x;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    Probe pc = eval(c), pd = eval(d);
    for (int it = 0; it < opt.golden_iterations; ++it) {
      for (const Probe* p : {&pc, &pd}) {
        if (p->passes() && std::abs(p->x - x) <= W) {
          out.best = *p;
          out.found = true;
          return out;
        }
      }
      if (pc.margin() >= pd.margin()) {
        b = d;
        d = c;
        pd = pc;
        c = b - invphi * (b - a);
        pc = eval(c);
      } else {
        a = c;
        c = d;
        pc = pd;
        d = a + invphi * (b - a);
        pd = eval(d);
      }
    }
    for (const Probe* p : {&pc, &pd}) {
      if (p->passes() && std::abs(p->x - x) <= W) {
        out.best = *p;
        out.found = true;
        return out;
      }
    }
  }
  out.issue = saw_bad;
  return out;
}

double sd_threshold(double a, double xp) { return -a * std::log(a + std::abs(xp)); }
double sd_window(double a, double x) { return a * std::log(2.0 + std::abs(x)); }

void check_a(double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorCode::invalid_argument, "a must be positive and finite");
  }
}

SDWitness to_witness(double x, const Outcome& o) {
  SDWitness w;
  w.x = x;
  w.x_prime = o.best.x;
  w.log_mod = o.best.value;
  w.threshold = o.best.threshold;
  w.found = o.found;
  w.evaluator_issue = !o.found && o.issue;
  return w;
}

bool valid_at(const SDWitness& w, double a) {
  return w.found && std::abs(w.x - w.x_prime) <= sd_window(a, w.x) &&
         w.log_mod >= sd_threshold(a, w.x_prime);
}

}  // namespace

std::size_t SlowDecreaseReport::issues() const noexcept {
  return static_cast<std::size_t>(std::count_if(
      probes.begin(), probes.end(), [](const SDWitness& w) { return w.evaluator_issue; }));
}

SDWitness sd_witness(const LogModulusFunction& f, double x, double a, const SearchOptions& opt) {
  check_a(a);
  if (!std::isfinite(x)) throw Error(ErrorCode::non_finite, "probe must be finite");
  const Outcome o = search_segment(
      f, x, sd_window(a, x), [a](double xp) { return sd_threshold(a, xp); }, opt);
  return to_witness(x, o);
}

SlowDecreaseReport sd_scan(const LogModulusFunction& f, std::span<const double> xs, double a,
                           const SearchOptions& opt) {
  if (xs.empty()) throw Error(ErrorCode::invalid_argument, "sd_scan needs at least one probe");
  check_a(a);
  SlowDecreaseReport r;
  r.a = a;
  r.x_min = *std::min_element(xs.begin(), xs.end());
  r.x_max = *std::max_element(xs.begin(), xs.end());
  std::size_t found = 0;
  for (double x : xs) {
    r.probes.push_back(sd_witness(f, x, a, opt));
    if (r.probes.back().found) ++found;
  }
  r.pass_fraction = static_cast<double>(found) / static_cast<double>(xs.size());
  return r;
}

namespace {

class Fitter {
 public:
  Fitter(const LogModulusFunction& f, std::span<const double> xs, const SearchOptions& opt)
      : f_(f), xs_(xs.begin(), xs.end()), opt_(opt), cache_(xs.size()) {
    for (std::size_t i = 0; i < xs_.size(); ++i) order_.push_back(i);
  }

  // With fail_fast the scan stops at the first failing probe, which is then
  // tried first next time.
  bool scan(double a, bool fail_fast, SlowDecreaseReport& rep) {
    ++scans;
    std::vector<SDWitness> results(xs_.size());
    std::vector<bool> done(xs_.size(), false);
    bool pass = true;
    for (std::size_t pos = 0; pos < order_.size(); ++pos) {
      const std::size_t i = order_[pos];
      SDWitness w;
      if (cache_[i] && valid_at(*cache_[i], a)) {
        w = *cache_[i];
        w.threshold = sd_threshold(a, w.x_prime);
      } else {
        w = sd_witness(f_, xs_[i], a, opt_);
        if (w.found) cache_[i] = w;
      }
      results[i] = w;
      done[i] = true;
      if (!w.found) {
        pass = false;
        if (fail_fast) {
          order_.erase(order_.begin() + static_cast<std::ptrdiff_t>(pos));
          order_.insert(order_.begin(), i);
          return false;
        }
      }
    }
    rep = SlowDecreaseReport{};
    rep.a = a;
    rep.x_min = *std::min_element(xs_.begin(), xs_.end());
    rep.x_max = *std::max_element(xs_.begin(), xs_.end());
    std::size_t found = 0;
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      rep.probes.push_back(results[i]);
      if (results[i].found) ++found;
    }
    rep.pass_fraction = static_cast<double>(found) / static_cast<double>(xs_.size());
    return pass;
  }

  int scans = 0;

 private:
  const LogModulusFunction& f_;
  std::vector<double> xs_;
  SearchOptions opt_;
  std::vector<std::optional<SDWitness>> cache_;
  std::vector<std::size_t> order_;
};

}  // namespace

FitResult fit_a(const LogModulusFunction& f, std::span<const double> xs, const FitOptions& opt) {
  if (xs.empty()) throw Error(ErrorCode::invalid_argument, "fit_a needs at least one probe");
  check_a(opt.a_floor);
  check_a(opt.a_max);
  if (opt.a_floor > opt.a_max) {
    throw Error(ErrorCode::invalid_argument, "a_floor must not exceed a_max");
  }
  if (!(opt.rel_resolution > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "rel_resolution must be > 0");
  }
  Fitter fit(f, xs, opt.search);
  FitResult res;
  SlowDecreaseReport rep;
  if (!fit.scan(opt.a_max, false, rep)) {
    res.found = false;
    res.a = opt.a_max;
    res.report = std::move(rep);
    res.scans = fit.scans;
    return res;
  }
  res.found = true;
  res.report = rep;
  double lo = opt.a_floor, hi = opt.a_max;
  if (fit.scan(opt.a_floor, true, rep)) {
    res.a = opt.a_floor;
    res.report = std::move(rep);
    res.scans = fit.scans;
    return res;
  }
  while (hi / lo > 1.0 + opt.rel_resolution) {
    const double mid = std::sqrt(lo * hi);
    if (fit.scan(mid, true, rep)) {
      hi = mid;
      res.report = rep;
    } else {
      lo = mid;
    }
  }
  res.a = hi;
  res.scans = fit.scans;
  return res;
}

FitResult fit_a(const LogModulusFunction& f, double x_min, double x_max, int n_probes,
                double a_max) {
  if (!(x_min >= 2.0)) throw Error(ErrorCode::invalid_argument, "fit_a needs x_min >= 2");
  FitOptions opt;
  opt.a_max = a_max;
  const auto xs = log_probes(x_min, x_max, n_probes);
  return fit_a(f, xs, opt);
}

std::vector<double> log_probes(double x_min, double x_max, int n) {
  if (!(x_min > 0.0) || !(x_max >= x_min) || !std::isfinite(x_max) || n < 1) {
    throw Error(ErrorCode::invalid_argument, "log_probes needs 0 < x_min <= x_max and n >= 1");
  }
  std::vector<double> xs;
  if (n == 1) return {x_min};
  const double ratio = std::log(x_max / x_min);
  for (int i = 0; i < n; ++i) {
    xs.push_back(i + 1 == n ? x_max : x_min * std::exp(ratio * i / (n - 1)));
  }
  return xs;
}

std::vector<double> nested_log_probes(double x_max, int per_decade, double anchor) {
  if (!(anchor > 0.0) || !(x_max >= anchor) || per_decade < 1) {
    throw Error(ErrorCode::invalid_argument,
                "nested_log_probes needs 0 < anchor <= x_max and per_decade >= 1");
  }
  std::vector<double> xs;
  for (int i = 0;; ++i) {
    const double x = anchor * std::pow(10.0, static_cast<double>(i) / per_decade);
    if (x > x_max * (1.0 + 1e-12)) break;
    xs.push_back(x);
  }
  return xs;
}

std::vector<double> merge_probes(std::vector<double> probes, std::span<const double> extras,
                                 double lo, double hi) {
  for (double e : extras) {
    if (e >= lo && e <= hi) probes.push_back(e);
  }
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  return probes;
}

std::string_view to_string(Prop1Mode m) noexcept {
  return m == Prop1Mode::real_interval ? "real" : "disc";
}

Prop1Witness prop1_witness(const LogModulusFunction& f1, double x, double m1, const Weight& w,
                           Prop1Mode mode, const SearchOptions& opt) {
  if (!(std::abs(x) > 2.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::invalid_argument, "prop1_witness needs |x| > 2");
  }
  if (!(m1 > 0.0) || !std::isfinite(m1)) {
    throw Error(ErrorCode::invalid_argument, "M1 must be positive and finite");
  }
  const double W = m1 * w(std::abs(x));
  const auto bound = [&](double modulus) { return -m1 * w(modulus); };
  Prop1Witness out;
  out.x = x;
  if (mode == Prop1Mode::real_interval) {
    const Outcome o = search_segment(
        f1, x, W, [&](double xp) { return bound(std::abs(xp)); }, opt);
    out.z_prime = Complex(o.best.x, 0.0);
    out.log_mod = o.best.value;
    out.bound = o.best.threshold;
    out.found = o.found;
    out.evaluator_issue = !o.found && o.issue;
    return out;
  }

  constexpr int radii = 64, angles = 64;
  bool saw_bad = false;
  double best_margin = neg_inf;
  bool have_best = false;
  for (int ri = 0; ri <= radii; ++ri) {
    const double r = W * ri / radii;
    const int na = ri == 0 ? 1 : angles;
    for (int ai = 0; ai < na; ++ai) {
      const double th = 2.0 * std::numbers::pi * ai / angles;
      const Complex z = Complex(x, 0.0) + std::polar(r, th);
      const LogModulusResult res = f1.at(z);
      const double b = bound(std::abs(z));
      const bool ok = res.status == EvalStatus::converged;
      if (res.status == EvalStatus::non_converged) saw_bad = true;
      const double margin = ok ? res.value - b : neg_inf;
      if (!have_best || margin > best_margin) {
        have_best = true;
        best_margin = margin;
        out.z_prime = z;
        out.log_mod = res.value;
        out.bound = b;
      }
      if (ok && res.value >= b && std::abs(z - Complex(x, 0.0)) <= W) {
        out.z_prime = z;
        out.log_mod = res.value;
        out.bound = b;
        out.found = true;
        return out;
      }
    }
  }
  out.evaluator_issue = saw_bad;
  return out;
}

Prop1Scan prop1_scan(const LogModulusFunction& f1, std::span<const double> xs, double m1,
                     const Weight& w, Prop1Mode mode, const SearchOptions& opt) {
  if (xs.empty()) throw Error(ErrorCode::invalid_argument, "prop1_scan needs at least one probe");
  Prop1Scan s;
  s.m1 = m1;
  s.mode = mode;
  std::size_t found = 0;
  for (double x : xs) {
    s.probes.push_back(prop1_witness(f1, x, m1, w, mode, opt));
    if (s.probes.back().found) ++found;
  }
  s.pass_fraction = static_cast<double>(found) / static_cast<double>(xs.size());
  return s;
}

}  // namespace ezlab
