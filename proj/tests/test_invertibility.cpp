#include <cmath>
#include <random>

#include "doctest.h"
#include "ezlab/error.hpp"
#include "ezlab/invertibility.hpp"
#include "oracles.hpp"

using namespace ezlab;

namespace {

auto sinc_modulus() {
  return FunctionModulus([](Complex z) {
    if (z.imag() == 0.0 && z.real() != 0.0 && z.real() == std::round(z.real())) return log_zero;
    return oracle::log_abs_sinc(z);
  });
}

// Both defining inequalities, with the modulus recomputed by the oracle.
bool sound(const SDWitness& w, double a) {
  const double reach = a * std::log(2.0 + std::abs(w.x));
  const double threshold = -a * std::log(a + std::abs(w.x_prime));
  return std::abs(w.x - w.x_prime) <= reach && oracle::log_abs_sinc(w.x_prime) >= threshold;
}

}  // namespace

TEST_CASE("found witnesses satisfy both inequalities") {
  const auto f = sinc_modulus();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(-2000.0, 2000.0);
  std::uniform_real_distribution<double> ua(0.05, 3.0);
  int found = 0;
  for (int i = 0; i < 200; ++i) {
    const double x = ux(rng), a = ua(rng);
    const auto w = sd_witness(f, x, a);
    if (w.found) {
      ++found;
      CHECK(sound(w, a));
      CHECK(w.threshold == doctest::Approx(-a * std::log(a + std::abs(w.x_prime))));
    }
  }
  CHECK(found > 50);
}

TEST_CASE("a grid four times finer finds nothing the search misses") {
  const auto f = sinc_modulus();
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> ux(5.0, 500.0);
  std::uniform_real_distribution<double> ua(0.01, 0.6);
  SearchOptions opt;
  opt.cells = 256;
  for (int i = 0; i < 150; ++i) {
    const double x = ux(rng), a = ua(rng);
    const double reach = a * std::log(2.0 + x);
    const int cells = 4 * opt.cells;
    const double step = std::max(opt.min_step / 4.0, 2.0 * reach / cells);
    bool fine_hit = false;
    for (double t = x - reach; t <= x + reach && !fine_hit; t += step) {
      // a margin keeps the comparison away from rounding ties
      fine_hit = oracle::log_abs_sinc(t) >= -a * std::log(a + std::abs(t)) + 1e-9;
    }
    const auto w = sd_witness(f, x, a, opt);
    if (fine_hit) CHECK(w.found);
    if (w.found) CHECK(sound(w, a));
  }
}

TEST_CASE("reflection symmetry of the lattice") {
  const auto f = sinc_modulus();
  for (double x : {3.7, 18.2, 150.5, 777.25}) {
    for (double a : {0.05, 0.2, 1.0}) {
      CHECK(sd_witness(f, x, a).found == sd_witness(f, -x, a).found);
    }
  }
}

TEST_CASE("scans and fits") {
  const auto f = sinc_modulus();
  const auto xs = log_probes(2.0, 500.0, 40);
  const auto s = sd_scan(f, xs, 2.0);
  CHECK(s.all_pass());
  CHECK(s.issues() == 0);
  CHECK_THROWS_AS(sd_scan(f, std::span<const double>{}, 1.0), Error);

  double prev = 0.0;
  for (double hi : {100.0, 200.0, 400.0, 800.0}) {
    const auto fit = fit_a(f, merge_probes(nested_log_probes(hi, 16, 2.0), {}, 2.0, hi));
    REQUIRE(fit.found);
    CHECK(fit.a >= prev * (1.0 - 1e-12));
    CHECK(fit.report.all_pass());
    for (const auto& w : fit.report.probes) CHECK(sound(w, fit.a));
    prev = fit.a;
  }
}

TEST_CASE("fit_a on a constant modulus returns the floor") {
  const ConstantModulus one;
  const auto fit = fit_a(one, log_probes(2.0, 100.0, 10));
  CHECK(fit.found);
  CHECK(fit.a == doctest::Approx(FitOptions{}.a_floor));
}

TEST_CASE("fit_a reports failure when a_max is too small") {
  const auto deep = FunctionModulus([](Complex z) { return -50.0 * (1.0 + std::abs(z)); });
  const auto fit = fit_a(deep, 2.0, 100.0, 10, 2.0);
  CHECK_FALSE(fit.found);
  CHECK(fit.report.a == doctest::Approx(2.0));
}

TEST_CASE("probe grids") {
  const auto xs = log_probes(2.0, 2000.0, 31);
  CHECK(xs.size() == 31);
  CHECK(xs.front() == doctest::Approx(2.0));
  CHECK(xs.back() == 2000.0);
  const auto small = nested_log_probes(1000.0, 10, 2.0);
  const auto big = nested_log_probes(2000.0, 10, 2.0);
  REQUIRE(small.size() <= big.size());
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == big[i]);
  const std::vector<double> extras = {7.5, 5000.0, 1.0};
  const auto merged = merge_probes(small, extras, 2.0, 1000.0);
  CHECK(std::is_sorted(merged.begin(), merged.end()));
  CHECK(std::count(merged.begin(), merged.end(), 7.5) == 1);
  CHECK(std::count(merged.begin(), merged.end(), 5000.0) == 0);
}

TEST_CASE("near-real witnesses in both search modes") {
  const auto f = sinc_modulus();
  const Weight w = Weight::log(1.0);
  CHECK_THROWS_AS(prop1_witness(f, 1.5, 1.0, w, Prop1Mode::real_interval), Error);
  // on the real line |sinc x| <= 1/(pi |x|), so M1 = 1 needs pi |x'| <= 2 + |x'|: never for |x'| >= 1
  for (double x : {3.0, 10.0, 99.999}) {
    CHECK_FALSE(prop1_witness(f, x, 1.0, w, Prop1Mode::real_interval).found);
  }
  for (Prop1Mode mode : {Prop1Mode::real_interval, Prop1Mode::complex_disc}) {
    const double m1 = mode == Prop1Mode::real_interval ? 2.0 : 1.0;
    for (double x : {3.0, 10.0, 99.999, 640.1}) {
      const auto pw = prop1_witness(f, x, m1, w, mode);
      REQUIRE(pw.found);
      CHECK(std::abs(pw.z_prime - Complex(x, 0.0)) <= m1 * w(x) + 1e-12);
      CHECK(oracle::log_abs_sinc(pw.z_prime) >= -m1 * w(std::abs(pw.z_prime)));
      if (mode == Prop1Mode::real_interval) CHECK(pw.z_prime.imag() == 0.0);
    }
  }
  const auto scan = prop1_scan(f, log_probes(3.0, 1000.0, 20), 2.0, w, Prop1Mode::real_interval);
  CHECK(scan.all_pass());
}
