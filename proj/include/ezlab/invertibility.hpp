#pragma once

// Slow-decrease witnesses: for x real, a point x' with |x - x'| <= a ln(2 + |x|)
// and ln|phi(x')| >= -a ln(a + |x'|).

#include <optional>
#include <span>
#include <vector>

#include "ezlab/product_engine.hpp"
#include "ezlab/zero_model.hpp"

namespace ezlab {

struct SearchOptions {
  double min_step = 0.01;
  int cells = 2048;            // step = max(min_step, window width / cells)
  int golden_iterations = 20;
  int refine_candidates = 8;   // local maxima refined when the grid finds nothing
};

// found => |x - x_prime| <= a ln(2 + |x|) and log_mod >= threshold, with
// log_mod from a converged evaluation. When nothing is found the fields
// describe the best point seen. evaluator_issue marks a failed search in which
// some points could not be evaluated.
struct SDWitness {
  double x = 0.0;
  double x_prime = 0.0;
  double log_mod = 0.0;
  double threshold = 0.0;
  bool found = false;
  bool evaluator_issue = false;
};

struct SlowDecreaseReport {
  double a = 0.0;
  std::vector<SDWitness> probes;
  double pass_fraction = 0.0;
  double x_min = 0.0;
  double x_max = 0.0;

  bool all_pass() const noexcept { return !probes.empty() && pass_fraction == 1.0; }
  std::size_t issues() const noexcept;
};

SDWitness sd_witness(const LogModulusFunction& f, double x, double a,
                     const SearchOptions& opt = {});

// Throws Error{invalid_argument} for an empty probe list.
SlowDecreaseReport sd_scan(const LogModulusFunction& f, std::span<const double> xs, double a,
                           const SearchOptions& opt = {});

struct FitOptions {
  double a_floor = 0.01;
  double a_max = 64.0;
  double rel_resolution = 0.01;
  SearchOptions search;
};

// Smallest a in [a_floor, a_max] (to rel_resolution) with pass_fraction 1.
// Witnesses found at one a are retried first at every later a, which keeps
// the pass predicate monotone in a within a fit. found == false when even
// a_max fails; report then holds the a_max scan.
struct FitResult {
  bool found = false;
  double a = 0.0;
  SlowDecreaseReport report;  // scan at the returned a (or at a_max)
  int scans = 0;
};

FitResult fit_a(const LogModulusFunction& f, std::span<const double> xs,
                const FitOptions& opt = {});
FitResult fit_a(const LogModulusFunction& f, double x_min, double x_max, int n_probes,
                double a_max);

// n log-spaced points from x_min to x_max inclusive.
std::vector<double> log_probes(double x_min, double x_max, int n);
// anchor * 10^(i / per_decade) up to x_max: grids for [anchor, X] are nested
// prefixes of each other.
std::vector<double> nested_log_probes(double x_max, int per_decade, double anchor = 2.0);
// Sorted union, keeping extras inside [lo, hi].
std::vector<double> merge_probes(std::vector<double> probes, std::span<const double> extras,
                                 double lo, double hi);

enum class Prop1Mode { real_interval, complex_disc };
std::string_view to_string(Prop1Mode m) noexcept;

// found => |z_prime - x| <= m1 l(|x|) and log_mod >= bound = -m1 l(|z_prime|).
struct Prop1Witness {
  double x = 0.0;
  Complex z_prime;
  double log_mod = 0.0;
  double bound = 0.0;
  bool found = false;
  bool evaluator_issue = false;
};

// Real mode searches the segment with the slow-decrease search engine; disc
// mode walks a polar grid (64 radii x 64 angles plus the centre) outward and
// keeps the first point meeting the bound. Throws Error{invalid_argument}
// unless |x| > 2.
Prop1Witness prop1_witness(const LogModulusFunction& f1, double x, double m1, const Weight& w,
                           Prop1Mode mode, const SearchOptions& opt = {});

struct Prop1Scan {
  double m1 = 0.0;
  Prop1Mode mode = Prop1Mode::real_interval;
  std::vector<Prop1Witness> probes;
  double pass_fraction = 0.0;

  bool all_pass() const noexcept { return !probes.empty() && pass_fraction == 1.0; }
};

Prop1Scan prop1_scan(const LogModulusFunction& f1, std::span<const double> xs, double m1,
                     const Weight& w, Prop1Mode mode, const SearchOptions& opt = {});

}  // namespace ezlab
