#pragma once

// Zero sequences, admissible weights and the near-real split of a sequence.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ezlab {

using Complex = std::complex<double>;

// A finite, validated prefix of a zero set: nonzero finite points ordered by
// nondecreasing modulus (ties by principal argument, then input order).
// Multiplicity is expressed by repetition.
class ZeroSequence {
 public:
  std::span<const Complex> zeros() const noexcept { return zeros_; }
  std::size_t size() const noexcept { return zeros_.size(); }
  const Complex& operator[](std::size_t i) const { return zeros_[i]; }
  auto begin() const noexcept { return zeros_.begin(); }
  auto end() const noexcept { return zeros_.end(); }

  // Largest modulus present; nothing beyond it is known.
  double coverage_radius() const noexcept { return std::abs(zeros_.back()); }

  friend bool operator==(const ZeroSequence&, const ZeroSequence&) = default;

 private:
  explicit ZeroSequence(std::vector<Complex> zeros) : zeros_(std::move(zeros)) {}
  friend ZeroSequence validate_sequence(std::vector<Complex> raw);

  std::vector<Complex> zeros_;
};

// Throws Error{contains_origin} / Error{non_finite} / Error{invalid_argument}.
ZeroSequence validate_sequence(std::vector<Complex> raw);

enum class WeightFamily { log, power, exp_sqrt_log, tabulated };

// Nondecreasing l : [0, inf) -> [1, inf).
//   log           l(t) = max(1, c * ln(2 + t))
//   power         l(t) = (1 + t)^p
//   exp_sqrt_log  l(t) = exp(q * sqrt(ln(e + t)))
//   tabulated     piecewise linear through (t_i, l_i), constant outside
class Weight {
 public:
  static Weight log(double c = 1.0);
  static Weight power(double p);
  static Weight exp_sqrt_log(double q);
  static Weight tabulated(std::vector<std::pair<double, double>> samples);

  double operator()(double t) const;

  WeightFamily family() const noexcept { return family_; }
  double parameter() const noexcept { return param_; }
  std::span<const std::pair<double, double>> table() const noexcept { return table_; }
  std::string describe() const;

  friend bool operator==(const Weight&, const Weight&) = default;

 private:
  Weight(WeightFamily family, double param) : family_(family), param_(param) {}

  WeightFamily family_;
  double param_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

std::string_view to_string(WeightFamily family) noexcept;

enum class Verdict { pass, fail };
std::string_view to_string(Verdict v) noexcept;

// Finite-range surrogates for the three admissibility conditions on l:
//   growth   ln t = O(l(t))
//   sub-root limsup ln l(t) / ln t < 1/2
//   doubling limsup l(k t) / l(t) < inf
// All trends are fitted over the last two decades [t_max/100, t_max] of a
// geometric grid with 40 points per decade. With s = ln t:
//  * growth: beta = slope of ln(ln t / l) against ln s. beta > tol means the
//    ratio is still growing (fail). The limit estimate is 0 for beta < -tol,
//    the power-law extrapolation L + C s^-gamma of the ratio when |beta| <= tol,
//    and +inf otherwise.
//  * sub-root: limsup of ln l / s equals the limit of d ln l / ds whenever the
//    latter exists; that derivative is extrapolated with L + C s^-gamma.
//    Pass iff the estimate is below 1/2 - tol.
//  * doubling: beta = slope of ln(l(kt)/l(t)) against ln s; pass iff
//    beta <= tol. The limit estimate is the power-law extrapolation.
struct WeightCondition {
  double sup_ratio = 0.0;        // max over the whole grid
  double value_at_t_max = 0.0;   // raw ratio at the end of the grid
  double trend = 0.0;            // beta (growth, doubling) or fitted gamma (sub-root)
  double limit_estimate = 0.0;
  Verdict verdict = Verdict::pass;
};

struct WeightReport {
  double t_max = 0.0;
  double k = 2.0;
  double tolerance = 0.05;
  WeightCondition growth;     // ln t = O(l)
  WeightCondition sub_root;   // limsup ln l / ln t < 1/2
  WeightCondition doubling;   // limsup l(kt)/l(t) < inf
  std::vector<double> t;
  std::vector<double> growth_ratio;
  std::vector<double> sub_root_ratio;
  std::vector<double> doubling_ratio;

  bool all_pass() const noexcept {
    return growth.verdict == Verdict::pass && sub_root.verdict == Verdict::pass &&
           doubling.verdict == Verdict::pass;
  }
};

// Throws Error{invalid_argument} for t_max < 1e3 or k <= 1 and
// Error{non_monotone_weight} if a sampled value decreases.
WeightReport check_weight(const Weight& w, double t_max, double k);

// Index split of a sequence into the near-real part |Im mu| <= m0 l(|Re mu|)
// and its complement.
class NearRealPartition {
 public:
  NearRealPartition(std::vector<std::size_t> near, std::vector<std::size_t> far,
                    std::size_t total, double m0, Weight weight);

  std::span<const std::size_t> near() const noexcept { return near_; }
  std::span<const std::size_t> far() const noexcept { return far_; }
  bool is_near(std::size_t index) const { return mask_.at(index); }
  std::size_t total() const noexcept { return mask_.size(); }
  double m0() const noexcept { return m0_; }
  const Weight& weight() const noexcept { return weight_; }

 private:
  std::vector<std::size_t> near_;
  std::vector<std::size_t> far_;
  std::vector<bool> mask_;
  double m0_;
  Weight weight_;
};

NearRealPartition partition_near_real(const ZeroSequence& zs, const Weight& w, double m0);

// Replaces every near-real zero by its real part and re-sorts.
// Throws Error{zero_real_part} if a near-real zero lies on the imaginary axis.
ZeroSequence project_real_parts(const ZeroSequence& zs, const NearRealPartition& p);

// {+-1, ..., +-n}
ZeroSequence gen_integer_lattice(std::size_t n);
// {+-h, +-2h, ..., +-n h}
ZeroSequence gen_scaled_lattice(std::size_t n, double spacing);
// {1, 2, ..., n}
ZeroSequence gen_one_sided(std::size_t n);
// k + i delta_k for k in {+-1..+-n}, |delta_k| <= m0 l(|k|); delta_k depends
// only on (seed, k).
ZeroSequence gen_perturbed_lattice(std::size_t n, const Weight& band, double m0,
                                   std::uint64_t seed);

struct ClusterSpec {
  std::vector<double> centers;       // strictly increasing, > 2
  std::vector<int> multiplicities;   // >= 1, one per center
  std::optional<ZeroSequence> background;
  // When set, each cluster takes the place of the background zeros nearest
  // to its center instead of being added on top of them.
  bool displace_background = false;

  // x_j = e^j, m_j = j^2 for j = 1..count.
  static ClusterSpec exp_square(int count);
};

// Largest spacing that keeps every cluster inside [x_j - 1, x_j + 1].
double max_cluster_spacing(const ClusterSpec& spec);

// Throws Error{overlap} when two windows [x_j - 1, x_j + 1] intersect and
// Error{invalid_argument} for malformed specs or spacing * max(m_j) > 2.
ZeroSequence gen_clustered(const ClusterSpec& spec, double spacing);

// Parses and validates points from a CSV ("re,im" header) or a JSON array of
// [re, im] pairs. Throws Error{parse} naming the offending line.
ZeroSequence parse_zeroset(std::string_view text);
ZeroSequence load_zeroset(const std::string& path);
std::string format_zeroset_csv(const ZeroSequence& zs);

}  // namespace ezlab
