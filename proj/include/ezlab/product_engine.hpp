#pragma once

// ln|psi(z)| for canonical products prod (1 - z/mu) over a finite zero prefix.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ezlab/zero_model.hpp"

namespace ezlab {

enum class EvalStatus { converged, non_converged, at_zero };
std::string_view to_string(EvalStatus s) noexcept;

inline constexpr double log_zero = -std::numeric_limits<double>::infinity();

// One rung of the radius ladder, outermost first.
//   partial        sum over terms with |mu| <= radius
//   extrapolated   partial plus the modelled contribution of |mu| > radius
//   neglected_bound  bound on |partial - value| at this rung
struct LadderRung {
  double radius = 0.0;
  double partial = 0.0;
  double extrapolated = 0.0;
  double neglected_bound = 0.0;
};

struct LogModulusResult {
  double value = 0.0;
  double truncation_radius = 0.0;
  double tail_estimate = 0.0;  // >= 0
  EvalStatus status = EvalStatus::non_converged;
  std::vector<LadderRung> ladder;

  bool usable() const noexcept { return status == EvalStatus::converged; }
};

enum class VariantKind { plain, projected, half_projected, modified };
std::string_view to_string(VariantKind k) noexcept;

struct Modification {
  double x_j = 0.0;
  int m_j = 0;
  std::vector<std::size_t> removed;  // indices into the sequence, all near-real
};

// plain: every factor uses mu.
// projected: near-real factors use Re mu.
// half_projected: near-real factors with Im mu > 0 use Re mu.
// modified: projected product times (z - x_j)^{m_j} / prod_removed (z - Re mu_k).
struct ProductVariant {
  VariantKind kind = VariantKind::plain;
  std::optional<NearRealPartition> partition;
  std::optional<Modification> modification;

  static ProductVariant plain() { return {}; }
  static ProductVariant projected(NearRealPartition p);
  static ProductVariant half_projected(NearRealPartition p);
};

// removed = {k in near-real part : |Re mu_k - x_j| <= 1}, m_j = |removed|.
// Throws Error{empty_cluster} when nothing is within distance 1.
ProductVariant make_modified_variant(const ZeroSequence& zs, const NearRealPartition& p,
                                     double x_j);

// Beyond the data the canonical model assumes the counting density of the
// outermost shells persists; none treats the product as a finite polynomial.
enum class TailModel { canonical, none };

struct EvalOptions {
  double tol = 1e-6;
  double K = 2.0;  // required coverage: R_max >= 2 K |z|
  TailModel tail = TailModel::canonical;
};

// Anything that can report ln|phi(z)| with a convergence verdict.
class LogModulusFunction {
 public:
  virtual ~LogModulusFunction() = default;
  virtual LogModulusResult at(Complex z) const = 0;
};

// Terms are grouped into shells between the ladder radii. For each shell the
// normalized power sums sum (rho/w)^p, p <= P, are precomputed so that a shell
// lying well outside |z| costs O(P) instead of O(count). Shells that are too
// close to z, and strongly projected factors, are summed term by term.
class ProductEvaluator final : public LogModulusFunction {
 public:
  ProductEvaluator(const ZeroSequence& zs, const ProductVariant& variant,
                   EvalOptions options = {});
  ~ProductEvaluator() override;
  ProductEvaluator(ProductEvaluator&&) noexcept;
  ProductEvaluator& operator=(ProductEvaluator&&) noexcept;

  LogModulusResult at(Complex z) const override;

  // Direct compensated sum over included terms with |mu| <= radius.
  double partial(Complex z, double radius) const;

  const EvalOptions& options() const noexcept;
  std::span<const double> ladder_radii() const noexcept;
  double coverage_radius() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Wraps a closure; handy for closed forms and constants.
template <class F>
class FunctionModulus final : public LogModulusFunction {
 public:
  explicit FunctionModulus(F f) : f_(std::move(f)) {}
  LogModulusResult at(Complex z) const override {
    LogModulusResult r;
    r.value = f_(z);
    r.status = r.value == log_zero ? EvalStatus::at_zero : EvalStatus::converged;
    return r;
  }

 private:
  F f_;
};

// |phi| == 1 everywhere.
class ConstantModulus final : public LogModulusFunction {
 public:
  LogModulusResult at(Complex) const override {
    LogModulusResult r;
    r.status = EvalStatus::converged;
    return r;
  }
};

double log_abs_partial(const ZeroSequence& zs, const ProductVariant& variant, Complex z,
                       double radius);

LogModulusResult log_abs_canonical(const ZeroSequence& zs, const ProductVariant& variant,
                                   Complex z, double tol, double K = 2.0);

// Results in input order; work is split across hardware threads.
std::vector<LogModulusResult> eval_grid(const LogModulusFunction& f,
                                        std::span<const Complex> points);
std::vector<LogModulusResult> eval_grid(const ZeroSequence& zs, const ProductVariant& variant,
                                        std::span<const Complex> points, double tol);

// Exponential-type surrogate from the imaginary axis: the largest secant slope
// (L(y) - L(y/2)) / (y/2) of L(y) = ln|psi(iy)| over y in [y_max/2, y_max].
// Throws Error{non_converged} if any sample fails to converge.
double type_estimate(const ZeroSequence& zs, double y_max,
                     TailModel tail = TailModel::canonical, double tol = 1e-6);

}  // namespace ezlab
