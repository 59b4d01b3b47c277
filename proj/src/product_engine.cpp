#include "ezlab/product_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ezlab/compensated_sum.hpp"
#include "ezlab/error.hpp"

namespace ezlab {

std::string_view to_string(EvalStatus s) noexcept {
  switch (s) {
    case EvalStatus::converged: return "converged";
    case EvalStatus::non_converged: return "non_converged";
    case EvalStatus::at_zero: return "at_zero";
  }
  return "unknown";
}

std::string_view to_string(VariantKind k) noexcept {
  switch (k) {
    case VariantKind::plain: return "plain";
    case VariantKind::projected: return "projected";
    case VariantKind::half_projected: return "half_projected";
    case VariantKind::modified: return "modified";
  }
  return "unknown";
}

ProductVariant ProductVariant::projected(NearRealPartition p) {
  ProductVariant v;
  v.kind = VariantKind::projected;
  v.partition = std::move(p);
  return v;
}

ProductVariant ProductVariant::half_projected(NearRealPartition p) {
  ProductVariant v;
  v.kind = VariantKind::half_projected;
  v.partition = std::move(p);
  return v;
}

ProductVariant make_modified_variant(const ZeroSequence& zs, const NearRealPartition& p,
                                     double x_j) {
  if (!std::isfinite(x_j)) throw Error(ErrorCode::non_finite, "x_j must be finite");
  if (p.total() != zs.size()) {
    throw Error(ErrorCode::invalid_argument, "partition does not match the sequence");
  }
  Modification mod;
  mod.x_j = x_j;
  for (std::size_t k : p.near()) {
    if (std::abs(zs[k].real() - x_j) <= 1.0) mod.removed.push_back(k);
  }
  if (mod.removed.empty()) {
    throw Error(ErrorCode::empty_cluster,
                "no near-real zero has real part within 1 of " + std::to_string(x_j));
  }
  std::sort(mod.removed.begin(), mod.removed.end());
  mod.m_j = static_cast<int>(mod.removed.size());
  ProductVariant v;
  v.kind = VariantKind::modified;
  v.partition = p;
  v.modification = std::move(mod);
  return v;
}

namespace {

constexpr int max_power = 96;
// A shell is summed by its power series only if 1.5 |z| <= min |w| there.
constexpr double usable_ratio = 1.5;
constexpr double ladder_ratio = 1.5;
constexpr int snap_window = 8;
constexpr int max_ladder = 4;

struct Term {
  Complex w;
  double incl;        // |mu| of the original zero, decides shell membership
  bool exceptional;   // |w| < incl / 2: kept out of the power sums
};

struct Extras {
  bool active = false;
  double x_j = 0.0;
  int m_j = 0;
  double constant = 0.0;  // -sum_removed ln|alpha_k|
};

struct Built {
  std::vector<Term> terms;
  Extras extras;
};

Built build_terms(const ZeroSequence& zs, const ProductVariant& v) {
  Built b;
  const bool needs_partition = v.kind != VariantKind::plain;
  if (needs_partition) {
    if (!v.partition) {
      throw Error(ErrorCode::invalid_argument,
                  std::string(to_string(v.kind)) + " variant needs a partition");
    }
    if (v.partition->total() != zs.size()) {
      throw Error(ErrorCode::invalid_argument, "partition does not match the sequence");
    }
  }
  std::vector<bool> removed(zs.size(), false);
  if (v.kind == VariantKind::modified) {
    if (!v.modification) {
      throw Error(ErrorCode::invalid_argument, "modified variant needs a modification");
    }
    const Modification& m = *v.modification;
    if (m.m_j != static_cast<int>(m.removed.size())) {
      throw Error(ErrorCode::invalid_argument, "m_j must equal the number of removed zeros");
    }
    if (!std::isfinite(m.x_j)) throw Error(ErrorCode::non_finite, "x_j must be finite");
    b.extras.active = true;
    b.extras.x_j = m.x_j;
    b.extras.m_j = m.m_j;
    CompensatedSum c;
    for (std::size_t k : m.removed) {
      if (k >= zs.size() || removed[k] || !v.partition->is_near(k)) {
        throw Error(ErrorCode::invalid_argument,
                    "removed indices must be distinct near-real zeros");
      }
      if (zs[k].real() == 0.0) {
        throw Error(ErrorCode::zero_real_part, "removed zero has zero real part");
      }
      removed[k] = true;
      c += -std::log(std::abs(zs[k].real()));
    }
    b.extras.constant = c.value();
  }
  b.terms.reserve(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (removed[i]) continue;
    const Complex mu = zs[i];
    Complex w = mu;
    bool project = false;
    switch (v.kind) {
      case VariantKind::plain: break;
      case VariantKind::projected:
      case VariantKind::modified: project = v.partition->is_near(i); break;
      case VariantKind::half_projected:
        project = v.partition->is_near(i) && mu.imag() > 0.0;
        break;
    }
    if (project) {
      if (mu.real() == 0.0) {
        throw Error(ErrorCode::zero_real_part,
                    "near-real zero #" + std::to_string(i) + " has zero real part");
      }
      w = Complex(mu.real(), 0.0);
    }
    const double incl = std::abs(mu);
    b.terms.push_back({w, incl, std::abs(w) < 0.5 * incl});
  }
  return b;
}

// ln|1 - z/w|, accurate both for small z/w and for z close to w.
inline double log_factor(Complex z, Complex w) {
  const Complex u = z / w;
  if (std::norm(u) < 0.25) {
    return 0.5 * std::log1p(std::norm(u) - 2.0 * u.real());
  }
  return 0.5 * std::log(std::norm(w - z)) - std::log(std::abs(w));
}

double extras_value(const Extras& e, Complex z) {
  if (!e.active) return 0.0;
  return e.m_j * std::log(std::abs(z - Complex(e.x_j, 0.0))) + e.constant;
}

bool extras_vanish(const Extras& e, Complex z) {
  return e.active && e.m_j > 0 && z == Complex(e.x_j, 0.0);
}

struct Shell {
  std::size_t begin = 0, end = 0;          // index range into terms
  std::vector<std::size_t> exceptional;    // always summed directly
  double rho = std::numeric_limits<double>::infinity();  // min |w| of the rest
  double count = 0.0;                      // number of non-exceptional terms
  std::vector<Complex> sigma;              // sigma[p-1] = sum (rho/w)^p
  double lambda = 0.0;                     // R_k / R_{k+1}
};

// -Re sum_{p >= p0} (z/rho)^p c_p sigma_p / p, cut at P or once the bound
// count * c_p |z/rho|^p on a term drops below 1e-18. c_p must be nonincreasing;
// the returned remainder bounds everything that was cut.
struct SeriesOut {
  double value;
  double remainder;
};

template <class Coef>
SeriesOut shell_series(const Shell& s, Complex z, int p0, Coef coef) {
  const Complex t = z / s.rho;
  const double q = std::abs(t);
  CompensatedSum acc;
  Complex tp = 1.0;
  for (int p = 1; p < p0; ++p) tp *= t;
  double qp = std::pow(q, p0);
  int p = p0;
  for (; p <= max_power; ++p) {
    tp *= t;
    const double c = coef(p);
    acc += -(tp * s.sigma[p - 1]).real() * c / p;
    qp = std::abs(tp);
    if (qp * s.count * c < 1e-18) break;
  }
  const int next = std::min(p, max_power) + 1;
  const double rem = q < 1.0 ? s.count * coef(next) * qp * q / (next * (1.0 - q))
                             : std::numeric_limits<double>::infinity();
  return {acc.value(), rem};
}

}  // namespace

struct ProductEvaluator::Impl {
  EvalOptions opt;
  std::vector<Term> terms;
  Extras extras;
  std::vector<double> radii;   // descending ladder radii
  std::vector<Shell> shells;   // shells[k] = (radii[k+1], radii[k]]
  std::size_t core_end = 0;    // terms [0, core_end) have incl <= radii.back()

  void build_ladder();
  double direct(Complex z, std::size_t b, std::size_t e, int& hits) const;
};

void ProductEvaluator::Impl::build_ladder() {
  const std::size_t n = terms.size();
  if (n == 0) {
    radii.push_back(0.0);
    return;
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = terms[i].incl;

  // Typical spacing between distinct modulus levels near the top, so that the
  // outermost radius sits half a level beyond the last zero.
  const std::size_t top = std::min<std::size_t>(n, 64);
  const double span = v[n - 1] - v[n - top];
  double level_gap = 0.0;
  if (top >= 2 && span > 0.0) {
    const double mean = span / static_cast<double>(top - 1);
    double sum = 0.0;
    int cnt = 0;
    for (std::size_t i = n - top + 1; i < n; ++i) {
      const double g = v[i] - v[i - 1];
      if (g > 0.25 * mean) {
        sum += g;
        ++cnt;
      }
    }
    level_gap = cnt > 0 ? sum / cnt : mean;
  }
  radii.push_back(v[n - 1] + 0.5 * level_gap);

  // Each lower rung sits in the widest gap near R/1.5 so that shells never cut
  // through a level (in particular never split a +-pair).
  for (;;) {
    const double nominal = radii.back() / ladder_ratio;
    if (nominal < v[0] || n < 2) break;
    const auto j = static_cast<std::ptrdiff_t>(std::upper_bound(v.begin(), v.end(), nominal) -
                                               v.begin());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(1, j - snap_window);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1,
                                                       j + snap_window);
    std::ptrdiff_t best = -1;
    double best_gap = 0.0, best_dist = 0.0;
    for (std::ptrdiff_t i = lo; i <= hi; ++i) {
      const double g = v[i] - v[i - 1];
      const double dist = std::abs(0.5 * (v[i] + v[i - 1]) - nominal);
      if (g > best_gap || (g == best_gap && g > 0.0 && dist < best_dist)) {
        best = i;
        best_gap = g;
        best_dist = dist;
      }
    }
    if (best < 0) break;
    const double r = 0.5 * (v[best] + v[best - 1]);
    if (!(r < radii.back())) break;
    radii.push_back(r);
  }

  const auto count_le = [&](double r) {
    return static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), r) - v.begin());
  };
  core_end = count_le(radii.back());
  for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
    Shell s;
    s.begin = count_le(radii[k + 1]);
    s.end = count_le(radii[k]);
    s.lambda = radii[k] / radii[k + 1];
    for (std::size_t i = s.begin; i < s.end; ++i) {
      if (terms[i].exceptional) {
        s.exceptional.push_back(i);
      } else {
        s.rho = std::min(s.rho, std::abs(terms[i].w));
        s.count += 1.0;
      }
    }
    s.sigma.assign(max_power, Complex(0.0, 0.0));
    if (s.count > 0.0) {
      std::vector<CompensatedSum> re(max_power), im(max_power);
      for (std::size_t i = s.begin; i < s.end; ++i) {
        if (terms[i].exceptional) continue;
        const Complex u = s.rho / terms[i].w;
        Complex up = 1.0;
        for (int p = 0; p < max_power; ++p) {
          up *= u;
          re[p] += up.real();
          im[p] += up.imag();
        }
      }
      for (int p = 0; p < max_power; ++p) s.sigma[p] = Complex(re[p].value(), im[p].value());
    }
    shells.push_back(std::move(s));
  }
}

// Factors vanishing at z are skipped and counted.
double ProductEvaluator::Impl::direct(Complex z, std::size_t b, std::size_t e,
                                      int& hits) const {
  CompensatedSum acc;
  for (std::size_t i = b; i < e; ++i) {
    if (terms[i].w == z) {
      ++hits;
      continue;
    }
    acc += log_factor(z, terms[i].w);
  }
  return acc.value();
}

ProductEvaluator::ProductEvaluator(const ZeroSequence& zs, const ProductVariant& variant,
                                   EvalOptions options)
    : impl_(std::make_unique<Impl>()) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::invalid_argument, "tol must be > 0");
  if (!(options.K > 1.0)) throw Error(ErrorCode::invalid_argument, "K must be > 1");
  impl_->opt = options;
  Built b = build_terms(zs, variant);
  impl_->terms = std::move(b.terms);
  impl_->extras = b.extras;
  impl_->build_ladder();
}

ProductEvaluator::~ProductEvaluator() = default;
ProductEvaluator::ProductEvaluator(ProductEvaluator&&) noexcept = default;
ProductEvaluator& ProductEvaluator::operator=(ProductEvaluator&&) noexcept = default;

const EvalOptions& ProductEvaluator::options() const noexcept { return impl_->opt; }
std::span<const double> ProductEvaluator::ladder_radii() const noexcept { return impl_->radii; }
double ProductEvaluator::coverage_radius() const noexcept {
  return impl_->terms.empty() ? 0.0 : impl_->terms.back().incl;
}

double ProductEvaluator::partial(Complex z, double radius) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorCode::non_finite, "evaluation point is not finite");
  }
  const Impl& m = *impl_;
  if (extras_vanish(m.extras, z)) return log_zero;
  const auto e = static_cast<std::size_t>(
      std::upper_bound(m.terms.begin(), m.terms.end(), radius,
                       [](double r, const Term& t) { return r < t.incl; }) -
      m.terms.begin());
  int hits = 0;
  const double s = m.direct(z, 0, e, hits);
  if (hits > 0) return log_zero;
  return s + extras_value(m.extras, z);
}

// At an exact zero the ladder is run on the remaining factors: as for any
// infinite product with finitely many vanishing factors, the product converges
// (to 0) iff the rest does. The result is then at_zero or non_converged, with
// value -inf either way; the ladder describes the remaining factors.
LogModulusResult ProductEvaluator::at(Complex z) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorCode::non_finite, "evaluation point is not finite");
  }
  const Impl& m = *impl_;
  LogModulusResult r;
  r.truncation_radius = m.radii.front();

  const double az = std::abs(z);
  const std::size_t ns = m.shells.size();
  std::vector<double> shell_sum(ns, 0.0);
  std::vector<bool> series(ns, false);
  double remainder = 0.0;
  int hits = extras_vanish(m.extras, z) ? 1 : 0;
  for (std::size_t k = 0; k < ns; ++k) {
    const Shell& s = m.shells[k];
    CompensatedSum acc;
    if (usable_ratio * az <= s.rho) {
      series[k] = true;
      if (s.count > 0.0) {
        const SeriesOut o = shell_series(s, z, 1, [](int) { return 1.0; });
        acc += o.value;
        remainder += o.remainder;
      }
      for (std::size_t i : s.exceptional) acc += m.direct(z, i, i + 1, hits);
    } else {
      acc += m.direct(z, s.begin, s.end, hits);
    }
    shell_sum[k] = acc.value();
  }
  const double core = m.direct(z, 0, m.core_end, hits);

  // partial[k]: every term with incl <= radii[k].
  const double extra = hits > 0 ? 0.0 : extras_value(m.extras, z);
  std::vector<double> partial(ns + 1);
  CompensatedSum run(core);
  partial[ns] = run.value() + extra;
  for (std::size_t k = ns; k-- > 0;) {
    run += shell_sum[k];
    partial[k] = run.value() + extra;
  }
  const auto finish = [&](EvalStatus st) {
    r.status = st;
    if (hits > 0) {
      r.value = log_zero;
      if (st == EvalStatus::converged) r.status = EvalStatus::at_zero;
    }
    return r;
  };

  if (m.opt.tail == TailModel::none) {
    r.value = partial[0];
    r.tail_estimate = remainder;
    return finish(EvalStatus::converged);
  }

  // Extrapolate past each outer rung from the shell just inside it, assuming
  // the counting density stays constant: the p-th power sum of successive
  // outward shells then shrinks by lambda^(1-p), which sums to kappa_p.
  const std::size_t rungs_max = std::min<std::size_t>(max_ladder, ns);
  std::vector<double> tail_corr;
  for (std::size_t k = 0; k < rungs_max; ++k) {
    const Shell& s = m.shells[k];
    if (!series[k]) break;
    double t = 0.0;
    if (s.count > 0.0) {
      const double lam = s.lambda;
      const SeriesOut o = shell_series(s, z, 2, [lam](int p) {
        return 1.0 / (std::pow(lam, p - 1) - 1.0);
      });
      t = o.value;
      remainder += o.remainder;
    }
    tail_corr.push_back(t);
  }
  const std::size_t nr = tail_corr.size();
  if (nr == 0) {
    r.value = partial[0];
    r.tail_estimate = std::numeric_limits<double>::infinity();
    return finish(EvalStatus::non_converged);
  }
  std::vector<double> v(nr), drift;
  for (std::size_t k = 0; k < nr; ++k) v[k] = partial[k] + tail_corr[k];
  for (std::size_t k = 0; k + 1 < nr; ++k) drift.push_back(std::abs(v[k] - v[k + 1]));

  // The first-order term sum 1/w is not extrapolated; what the outermost
  // shell leaves of it measures how far the data is from symmetric.
  const Shell& top = m.shells[0];
  const double residue =
      top.count > 0.0 ? std::abs((z * top.sigma[0] / top.rho).real()) : 0.0;
  r.value = v[0];
  r.tail_estimate = (nr >= 2 ? drift[0] : std::abs(tail_corr[0])) + remainder + residue;

  double drift_sum = 0.0;
  for (std::size_t k = 0; k < nr; ++k) {
    LadderRung rung;
    rung.radius = m.radii[k];
    rung.partial = partial[k];
    rung.extrapolated = v[k];
    rung.neglected_bound = std::abs(tail_corr[k]) + drift_sum + remainder + residue;
    if (k < drift.size()) drift_sum += drift[k];
    r.ladder.push_back(rung);
  }

  const bool covered = m.radii.front() >= 2.0 * m.opt.K * az;
  const bool steady = nr >= 2 && std::all_of(drift.begin(), drift.end(),
                                             [&](double d) { return d < m.opt.tol; });
  return finish(covered && steady && r.tail_estimate < m.opt.tol ? EvalStatus::converged
                                                                : EvalStatus::non_converged);
}

double log_abs_partial(const ZeroSequence& zs, const ProductVariant& variant, Complex z,
                       double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "radius must be > 0");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw Error(ErrorCode::non_finite, "evaluation point is not finite");
  }
  const Built b = build_terms(zs, variant);
  if (extras_vanish(b.extras, z)) return log_zero;
  CompensatedSum acc;
  for (const Term& t : b.terms) {
    if (t.incl > radius) break;
    if (t.w == z) return log_zero;
    acc += log_factor(z, t.w);
  }
  return acc.value() + extras_value(b.extras, z);
}

LogModulusResult log_abs_canonical(const ZeroSequence& zs, const ProductVariant& variant,
                                   Complex z, double tol, double K) {
  EvalOptions opt;
  opt.tol = tol;
  opt.K = K;
  return ProductEvaluator(zs, variant, opt).at(z);
}

std::vector<LogModulusResult> eval_grid(const LogModulusFunction& f,
                                        std::span<const Complex> points) {
  std::vector<LogModulusResult> out(points.size());
  if (points.empty()) return out;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, points.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size() || failed.load()) return;
      try {
        out[i] = f.at(points[i]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<LogModulusResult> eval_grid(const ZeroSequence& zs, const ProductVariant& variant,
                                        std::span<const Complex> points, double tol) {
  EvalOptions opt;
  opt.tol = tol;
  const ProductEvaluator f(zs, variant, opt);
  return eval_grid(f, points);
}

double type_estimate(const ZeroSequence& zs, double y_max, TailModel tail, double tol) {
  if (!(y_max >= 10.0) || !std::isfinite(y_max)) {
    throw Error(ErrorCode::invalid_argument, "type_estimate needs y_max >= 10");
  }
  EvalOptions opt;
  opt.tol = tol;
  opt.tail = tail;
  const ProductEvaluator f(zs, ProductVariant::plain(), opt);
  constexpr int samples = 64;
  std::vector<Complex> pts;
  for (int i = 0; i < samples; ++i) {
    const double y = 0.5 * y_max * (1.0 + static_cast<double>(i) / (samples - 1));
    pts.emplace_back(0.0, y);
    pts.emplace_back(0.0, 0.5 * y);
  }
  const auto res = eval_grid(f, pts);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) {
    const auto& hi = res[2 * i];
    const auto& lo = res[2 * i + 1];
    if (!hi.usable() || !lo.usable()) {
      throw Error(ErrorCode::non_converged,
                  "type_estimate: ln|psi(iy)| did not converge at y = " +
                      std::to_string(pts[2 * i].imag()));
    }
    const double y = pts[2 * i].imag();
    best = std::max(best, (hi.value - lo.value) / (0.5 * y));
  }
  return best;
}

}  // namespace ezlab
