#include <cmath>
#include <random>

#include "doctest.h"
#include "ezlab/error.hpp"
#include "ezlab/zero_stats.hpp"
#include "oracles.hpp"

using namespace ezlab;

namespace {

std::vector<double> near_real_parts(const ZeroSequence& zs, const NearRealPartition& p) {
  std::vector<double> out;
  for (std::size_t k : p.near()) out.push_back(zs[k].real());
  return out;
}

}  // namespace

TEST_CASE("window counts match a linear scan") {
  const Weight w = Weight::log(1.0);
  const auto zs = gen_perturbed_lattice(2000, w, 2.0, 8);
  const auto p = partition_near_real(zs, w, 1.0);
  const RealPartIndex index(zs, p);
  const auto alphas = near_real_parts(zs, p);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-2100.0, 2100.0);
  std::uniform_real_distribution<double> ur(0.1, 5.0);
  for (int i = 0; i < 300; ++i) {
    const double x = ux(rng), r = ur(rng);
    CHECK(index.count(x, r) == oracle::count_window(alphas, x, r));
  }
  for (double x : {3.0, 10.0, -7.0}) CHECK(index.count(x) == oracle::count_window(alphas, x));
  CHECK(m_re(p, zs, 10.0) == index.count(10.0));
  CHECK_THROWS_AS(index.count(1.0, 0.0), Error);
}

TEST_CASE("counts are translation covariant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(10.0, 100.0);
  std::vector<Complex> a, b;
  const double shift = 37.0;
  for (int i = 0; i < 200; ++i) {
    const double t = std::round(u(rng) * 4.0) / 4.0;
    a.emplace_back(t, 0.0);
    b.emplace_back(t + shift, 0.0);
  }
  const auto za = validate_sequence(a);
  const auto zb = validate_sequence(b);
  const Weight w = Weight::log(1.0);
  const RealPartIndex ia(za, partition_near_real(za, w, 1.0));
  const RealPartIndex ib(zb, partition_near_real(zb, w, 1.0));
  for (double x = 5.0; x < 110.0; x += 0.125) CHECK(ia.count(x) == ib.count(x + shift));
}

TEST_CASE("ratio row at x = 100 on the integer lattice") {
  const auto zs = gen_integer_lattice(1000);
  const Weight w = Weight::log(1.0);
  const auto p = partition_near_real(zs, w, 1.0);
  const std::vector<double> xs = {100.0, 100.5};
  const auto prof = ratio_profile(p, zs, w, xs);
  CHECK(prof.counts[0] == 3);
  CHECK(prof.counts[1] == 2);
  CHECK(prof.weights[0] == doctest::Approx(std::log(102.0)));
  CHECK(prof.ratios[0] == doctest::Approx(3.0 / std::log(102.0)));
  CHECK(prof.sup_ratio == doctest::Approx(3.0 / std::log(102.0)));
}

TEST_CASE("lattice profile is bounded with the closed-form supremum") {
  const auto zs = gen_integer_lattice(20000);
  const Weight w = Weight::log(1.0);
  const auto p = partition_near_real(zs, w, 1.0);
  const auto t = theorem1_check(p, zs, w, std::numbers::e, 1e4);
  CHECK(t.verdict == Theorem1Verdict::bounded);
  CHECK(t.profile.sup_ratio == doctest::Approx(oracle::lattice_sup_ratio()).epsilon(1e-12));
  CHECK(t.profile.sup_ratio <= 2.0);
  CHECK(t.decades == doctest::Approx(std::log10(1e4 / std::numbers::e)));
}

TEST_CASE("cluster profile trends upward") {
  auto spec = ClusterSpec::exp_square(9);
  spec.background = gen_scaled_lattice(30000, 2.0);
  spec.displace_background = true;
  const auto zs = gen_clustered(spec, max_cluster_spacing(spec));
  const Weight w = Weight::log(1.0);
  const auto p = partition_near_real(zs, w, 1.0);
  const auto t = theorem1_check(p, zs, w, std::numbers::e, 1e4, 0.05, 200, spec.centers);
  CHECK(t.verdict == Theorem1Verdict::unbounded_trend);
  CHECK(t.profile.trend_slope > 0.15);
  const RealPartIndex index(zs, p);
  for (int j = 2; j <= 9; ++j) {
    const double ratio = static_cast<double>(index.count(std::exp(j))) / w(std::exp(j));
    CHECK(ratio / j == doctest::Approx(1.0).epsilon(0.35));
  }
}

TEST_CASE("short or flat ranges are not called unbounded") {
  auto spec = ClusterSpec::exp_square(3);
  spec.background = gen_scaled_lattice(2000, 2.0);
  spec.displace_background = true;
  const auto zs = gen_clustered(spec, max_cluster_spacing(spec));
  const Weight w = Weight::log(1.0);
  const auto p = partition_near_real(zs, w, 1.0);
  const auto t = theorem1_check(p, zs, w, 3.0, 30.0, 0.05, 50, spec.centers);
  CHECK(t.verdict != Theorem1Verdict::unbounded_trend);
}

TEST_CASE("theorem1_check refuses ranges beyond the data") {
  const auto zs = gen_integer_lattice(1000);
  const Weight w = Weight::log(1.0);
  const auto p = partition_near_real(zs, w, 1.0);
  try {
    theorem1_check(p, zs, w, 3.0, 5000.0);
    FAIL("expected a coverage error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::coverage);
  }
}

TEST_CASE("profile probes keep extras and stay sorted") {
  const auto zs = gen_integer_lattice(1000);
  const Weight w = Weight::log(1.0);
  const RealPartIndex index(zs, partition_near_real(zs, w, 1.0));
  const std::vector<double> extras = {12.34, 5000.0};
  const auto xs = profile_probes(index, w, 3.0, 900.0, 20, extras);
  CHECK(std::is_sorted(xs.begin(), xs.end()));
  CHECK(std::adjacent_find(xs.begin(), xs.end()) == xs.end());
  CHECK(std::count(xs.begin(), xs.end(), 12.34) == 1);
  CHECK(xs.back() <= 900.0);
  CHECK(xs.size() >= 20);
}
