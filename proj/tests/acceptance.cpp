// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "ezlab/harness.hpp"
#include "ezlab/product_engine.hpp"
#include "ezlab/zero_model.hpp"
#include "oracles.hpp"

using namespace ezlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Criterion 1
constexpr std::size_t c1_n = 5000;
constexpr int c1_points = 200;
constexpr double c1_radius = 50.0;
constexpr double c1_gap = 0.05;
constexpr double c1_abs_tol = 1e-5;
constexpr double c1_eval_tol = 1e-6;
constexpr double c1_seconds = 10.0;
constexpr std::uint64_t c1_seed = 20240601;
// Criterion 2
constexpr std::size_t c2_n = 10000;
constexpr double c2_z = 5.0;
constexpr double c2_tol = 1e-6;
constexpr int c2_min_drifts = 3;
// Criterion 4
constexpr double c4_sup_max = 2.0;
constexpr double c4_stability = 1.10;
// Criterion 5
constexpr int c5_min_doublings = 3;
constexpr double c5_decay_factor = 2.0;
constexpr double c5_linear_band = 0.35;
// Criterion 6
constexpr std::size_t c6_probes = 50;
// Criterion 7
constexpr double c7_m1_max = 8.0;
constexpr double c7_x_min = 3.0;
constexpr double c7_x_max = 1000.0;
// Criterion 8
constexpr double c8_trend_tol = 0.05;

int failures = 0;

void verdict(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("C%d %s %s: %s\n", id, pass ? "PASS" : "FAIL", title.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::string config_dir = EZLAB_CONFIG_DIR;

Config config(const std::string& name) { return Config::load(config_dir + "/" + name); }

double num(const json& j) {
  if (j.is_number()) return j.get<double>();
  return std::nan("");
}

// Runs f and reports a thrown exception as a failed criterion.
void guarded(int id, const std::string& title, const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    verdict(id, title, false, std::string("exception: ") + e.what());
  }
}

void criterion1() {
  const auto zs = gen_integer_lattice(c1_n);
  const ProductEvaluator ev(zs, ProductVariant::plain(), {.tol = c1_eval_tol});
  std::mt19937_64 rng(c1_seed);
  std::uniform_real_distribution<double> u(-c1_radius, c1_radius);
  std::vector<Complex> pts;
  while (pts.size() < static_cast<std::size_t>(c1_points)) {
    const Complex z(u(rng), u(rng));
    if (std::abs(z) > c1_radius || std::abs(z - std::round(z.real())) < c1_gap) continue;
    pts.push_back(z);
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto vals = eval_grid(ev, pts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  int ok = 0;
  double worst = 0.0, worst_tail = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double err = std::abs(vals[i].value - oracle::log_abs_sinc(pts[i]));
    const bool good = vals[i].status == EvalStatus::converged &&
                      err <= c1_abs_tol + vals[i].tail_estimate;
    ok += good;
    worst = std::max(worst, err);
    worst_tail = std::max(worst_tail, vals[i].tail_estimate);
  }
  verdict(1, "product oracle", ok == c1_points && secs < c1_seconds,
          fmt("%d/%d points within 1e-5 + tail; max error %.2e, max tail %.2e, %.3f s", ok,
              c1_points, worst, worst_tail, secs));
}

void criterion2() {
  const auto zs = gen_one_sided(c2_n);
  const ProductEvaluator ev(zs, ProductVariant::plain(), {.tol = c2_tol});
  const auto r = ev.at(Complex(c2_z, 0.0));
  int drifts = 0;
  for (std::size_t k = 0; k + 1 < r.ladder.size(); ++k) {
    drifts += std::abs(r.ladder[k].extrapolated - r.ladder[k + 1].extrapolated) > c2_tol;
  }
  verdict(2, "divergence detection",
          r.status == EvalStatus::non_converged && drifts >= c2_min_drifts,
          fmt("status %s, %d of %zu ladder steps drift above tol", std::string(to_string(r.status)).c_str(),
              drifts, r.ladder.empty() ? std::size_t{0} : r.ladder.size() - 1));
}

struct Runs {
  ExperimentReport lattice, cluster, audit;
  std::vector<ExperimentReport> projection, prop1;
};

// Tallies witnesses checked against an oracle for ln|phi|.
struct Soundness {
  int checked = 0;
  int failed = 0;
  std::string first_failure;

  void sd(const json& scan, const std::function<double(Complex)>& log_mod, const std::string& tag) {
    const double a = num(scan["a"]);
    for (const auto& w : scan["witnesses"]) {
      if (!w["found"].get<bool>()) continue;
      const double x = num(w["x"]), xp = num(w["x_prime"]);
      const bool near = std::abs(x - xp) <= a * std::log(2.0 + std::abs(x));
      const bool high = log_mod(xp) >= -a * std::log(a + std::abs(xp));
      record(near && high, fmt("%s x=%.6g x'=%.6g a=%.6g", tag.c_str(), x, xp, a));
    }
  }

  void record(bool ok, const std::string& what) {
    ++checked;
    if (!ok && failed++ == 0) first_failure = what;
  }
};

ZeroSequence cluster_zeros(const Config& cfg) {
  auto spec = ClusterSpec::exp_square(static_cast<int>(cfg.get_int("zeroset.clusters", 9)));
  spec.background = gen_scaled_lattice(static_cast<std::size_t>(cfg.get_int("zeroset.background_n", 30000)),
                                       cfg.get_double("zeroset.background_spacing", 2.0));
  spec.displace_background = cfg.get_bool("zeroset.displace", true);
  return gen_clustered(spec, max_cluster_spacing(spec));
}

void criterion3(const Runs& runs) {
  Soundness s;
  const auto sinc = [](Complex z) { return oracle::log_abs_sinc(z); };
  for (const auto& fit : runs.lattice.payload["results"]["fits"]) {
    if (fit["scan"].contains("witnesses")) s.sd(fit["scan"], sinc, "lattice");
  }

  const Config ccfg = config("counterexample.cfg");
  const auto czs = cluster_zeros(ccfg);
  const double h = ccfg.get_double("zeroset.background_spacing", 2.0);
  const auto diff = oracle::lattice_diff(czs.zeros(), h, ccfg.get_int("zeroset.background_n", 30000));
  const auto cluster = [&](Complex z) {
    return oracle::log_abs_modified_lattice(z, h, diff.added, diff.removed);
  };
  for (const auto& fit : runs.cluster.payload["results"]["fits"]) {
    if (fit["scan"].contains("witnesses")) s.sd(fit["scan"], cluster, "cluster");
  }

  const Weight w = Weight::log(1.0);
  for (std::size_t i = 0; i < runs.projection.size(); ++i) {
    const auto& r = runs.projection[i].payload;
    const auto zs = gen_perturbed_lattice(r["zeroset"]["n"].get<std::size_t>(), w,
                                          num(r["zeroset"]["band_m0"]),
                                          r["zeroset"]["seed"].get<std::uint64_t>());
    const auto p = partition_near_real(zs, w, num(r["thresholds"]["m0"]));
    const auto proj = project_real_parts(zs, p);
    s.sd(r["results"]["scan_psi"], [&](Complex z) { return oracle::log_abs_perturbed(zs.zeros(), z); },
         "psi seed " + std::to_string(i + 1));
    s.sd(r["results"]["scan_psi1"],
         [&](Complex z) { return oracle::log_abs_perturbed(proj.zeros(), z); },
         "psi1 seed " + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < runs.prop1.size(); ++i) {
    const auto& r = runs.prop1[i].payload;
    const auto zs = gen_perturbed_lattice(r["zeroset"]["n"].get<std::size_t>(), w,
                                          num(r["zeroset"]["band_m0"]),
                                          r["zeroset"]["seed"].get<std::uint64_t>());
    const auto proj = project_real_parts(zs, partition_near_real(zs, w, num(r["thresholds"]["m0"])));
    for (const auto& sweep : r["results"]["sweep"]) {
      const double m1 = num(sweep["m1"]);
      for (const auto& pw : sweep["witnesses"]) {
        if (!pw["found"].get<bool>()) continue;
        const double x = num(pw["x"]);
        const Complex zp(num(pw["z_prime"][0]), num(pw["z_prime"][1]));
        const bool near = std::abs(zp - Complex(x, 0.0)) <= m1 * w(std::abs(x));
        const bool high = oracle::log_abs_perturbed(proj.zeros(), zp) >= -m1 * w(std::abs(zp));
        s.record(near && high, fmt("prop1 seed %zu x=%.6g m1=%g", i + 1, x, m1));
      }
    }
  }
  verdict(3, "criterion soundness", s.checked > 0 && s.failed == 0,
          fmt("%d witnesses re-evaluated by oracles, %d violations%s%s", s.checked, s.failed,
              s.failed ? "; first: " : "", s.first_failure.c_str()));
}

void criterion4(const Runs& runs) {
  const auto& r = runs.lattice.payload["results"];
  const auto& t1 = r["theorem1"];
  const double sup = num(t1["sup_ratio"]);
  const bool bounded = t1["verdict"] == "bounded" && sup <= c4_sup_max;
  const bool range_ok = std::abs(num(t1["x_min"]) - std::numbers::e) < 1e-12 && num(t1["x_max"]) == 1e4;
  std::vector<double> as, his;
  bool found = true;
  for (const auto& f : r["fits"]) {
    found = found && f["found"].get<bool>();
    as.push_back(num(f["a"]));
    his.push_back(num(f["range"][1]));
  }
  const bool ranges = his == std::vector<double>{1000.0, 2000.0, 4000.0} &&
                      num(r["fits"][0]["range"][0]) == 2.0;
  const double lo = *std::min_element(as.begin(), as.end());
  const double hi = *std::max_element(as.begin(), as.end());
  const bool stable = found && ranges && hi / lo <= c4_stability;
  verdict(4, "positive case", bounded && range_ok && stable,
          fmt("theorem1 %s, sup_ratio %.4f (closed form 3/ln 5 = %.4f), a over [2,1e3],[2,2e3],"
              "[2,4e3] = %.4f, %.4f, %.4f, spread %.4f",
              t1["verdict"].get<std::string>().c_str(), sup, oracle::lattice_sup_ratio(), as[0],
              as[1], as[2], hi / lo));
}

void criterion5(const Runs& runs) {
  const auto& r = runs.cluster.payload["results"];
  const bool unbounded = r["theorem1"]["verdict"] == "unbounded_trend";

  // ratio at the centers against j
  const auto& clusters = r["clusters"];
  bool linear = true;
  std::string ratios;
  for (const auto& row : runs.cluster.tables.ratio) {
    for (const auto& c : clusters) {
      if (row[0] == num(c["x_j"])) {
        const double j = num(c["j"]);
        const double ratio = row[3];
        if (j >= 2) linear = linear && std::abs(ratio / j - 1.0) <= c5_linear_band;
        ratios += fmt("%s%.2f", ratios.empty() ? "" : ",", ratio);
      }
    }
  }

  std::vector<double> as;
  bool increasing = true;
  for (const auto& f : r["fits"]) {
    increasing = increasing && f["found"].get<bool>() && (as.empty() || num(f["a"]) > as.back());
    as.push_back(num(f["a"]));
  }
  increasing = increasing && static_cast<int>(as.size()) - 1 >= c5_min_doublings;
  const bool desk = r["desk_verdict"] == "fails at desk scale";

  bool decay = true;
  double prev = 0.0;
  std::string maxima;
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    const auto& c = clusters[i];
    const double xj = num(c["x_j"]);
    const double l = std::log(2.0 + xj);
    const double mj = num(c["m_j"]);
    const double m = num(c["window_max"]);
    decay = decay && m <= -std::floor(mj / l) * l / c5_decay_factor;
    if (i > 0) decay = decay && prev - m >= l / c5_decay_factor;
    decay = decay && c["psi_j_at_center"]["status"] == "at_zero";
    prev = m;
    maxima += fmt("%s%.2f", maxima.empty() ? "" : ",", m);
  }
  std::string fits;
  for (double a : as) fits += fmt("%s%.3f", fits.empty() ? "" : ",", a);
  verdict(5, "counterexample", unbounded && linear && increasing && desk && decay,
          fmt("theorem1 %s (slope %.3f), center ratios [%s], a by doubling [%s] (%s), "
              "window maxima [%s]",
              r["theorem1"]["verdict"].get<std::string>().c_str(),
              num(r["theorem1"]["trend_slope"]), ratios.c_str(), fits.c_str(),
              r["desk_verdict"].get<std::string>().c_str(), maxima.c_str()));
}

void criterion6(const Runs& runs) {
  int agree = 0;
  std::string detail;
  for (const auto& rep : runs.projection) {
    const auto& r = rep.payload["results"];
    const bool ok = r["fit_psi"]["found"].get<bool>() && r["fit_psi1"]["found"].get<bool>() &&
                    r["agree"].get<bool>() &&
                    r["scan_psi"]["probes"].get<std::size_t>() == c6_probes &&
                    r["scan_psi1"]["probes"].get<std::size_t>() == c6_probes &&
                    rep.payload["zeroset"]["n"] == 5000;
    agree += ok;
    detail += fmt("%sseed %d: a=%.3f/%.3f at common a %.3f -> %s/%s",
                  detail.empty() ? "" : "; ", rep.payload["zeroset"]["seed"].get<int>(),
                  num(r["fit_psi"]["a"]), num(r["fit_psi1"]["a"]), num(r["common_a"]),
                  r["scan_psi"]["all_pass"].get<bool>() ? "pass" : "fail",
                  r["scan_psi1"]["all_pass"].get<bool>() ? "pass" : "fail");
  }
  verdict(6, "projection equivalence", agree == static_cast<int>(runs.projection.size()) && agree == 3,
          fmt("%d/3 agree; ", agree) + detail);
}

void criterion7(const Runs& runs) {
  int ok = 0;
  std::string detail;
  const Weight w = Weight::log(1.0);
  for (const auto& rep : runs.prop1) {
    const auto& r = rep.payload["results"];
    const bool found = r["found"].get<bool>() && num(r["m1"]) <= c7_m1_max;
    bool range = true;
    for (const auto& row : r["factor_bound"]["rows"]) {
      range = range && num(row["x"]) >= c7_x_min - 1e-12 && num(row["x"]) <= c7_x_max;
    }
    // independent re-check of the per-factor bound with oracle values
    const auto zs = gen_perturbed_lattice(rep.payload["zeroset"]["n"].get<std::size_t>(), w,
                                          num(rep.payload["zeroset"]["band_m0"]),
                                          rep.payload["zeroset"]["seed"].get<std::uint64_t>());
    const double m0 = num(rep.payload["thresholds"]["m0"]);
    const auto p = partition_near_real(zs, w, m0);
    const auto proj = project_real_parts(zs, p);
    double slack = 0.0;
    for (std::size_t k : p.near()) {
      const double a = zs[k].real();
      slack += 0.5 * std::log1p(std::pow(m0 * w(std::abs(a)) / a, 2));
    }
    bool factor_ok = r["factor_bound"]["holds"].get<bool>();
    for (const auto& row : r["factor_bound"]["rows"]) {
      const double x = num(row["x"]);
      factor_ok = factor_ok && oracle::log_abs_perturbed(proj.zeros(), x) <=
                       oracle::log_abs_perturbed(zs.zeros(), x) + slack;
    }
    ok += found && range && factor_ok;
    detail += fmt("%sseed %d: M1=%g, factor bound %s", detail.empty() ? "" : "; ",
                  rep.payload["zeroset"]["seed"].get<int>(), num(r["m1"]), factor_ok ? "holds" : "fails");
  }
  verdict(7, "near-real witness", ok == static_cast<int>(runs.prop1.size()) && ok == 3, detail);
}

void criterion8(const Runs& runs) {
  const auto& rows = runs.audit.payload["results"]["weights"];
  const std::vector<std::pair<std::string, oracle::WeightLimits>> expect = {
      {"pass", oracle::log_limits()},
      {"fail", oracle::power_limits(0.6)},
      {"pass", oracle::power_limits(0.25)},
      {"pass", oracle::exp_sqrt_log_limits()}};
  bool ok = rows.size() == expect.size();
  double worst = 0.0;
  std::string detail;
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto& [v, lim] = expect[i];
    ok = ok && row["verdict"] == v;
    const double dg = std::abs(num(row["growth"]["limit_estimate"]) - lim.growth);
    const double ds = std::abs(num(row["sub_root"]["limit_estimate"]) - lim.sub_root);
    const double dd = std::abs(num(row["doubling"]["limit_estimate"]) - lim.doubling);
    worst = std::max({worst, dg, ds, dd});
    detail += fmt("%s%s %s", detail.empty() ? "" : ", ", row["spec"].get<std::string>().c_str(),
                  row["verdict"].get<std::string>().c_str());
  }
  ok = ok && worst <= c8_trend_tol && num(runs.audit.payload["thresholds"]["t_max"]) == 1e6;
  if (ok) {
    const auto& p6 = rows[1];
    ok = p6["sub_root"]["verdict"] == "fail" && p6["growth"]["verdict"] == "pass" &&
         p6["doubling"]["verdict"] == "pass";
  }
  verdict(8, "weight audit", ok, detail + fmt("; max limit deviation %.4f", worst));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion9() {
  const fs::path root = fs::temp_directory_path() / "ezlab_acceptance";
  fs::remove_all(root);
  int identical = 0, total = 0;
  std::string differing;
  for (const char* name : {"weight_audit.cfg", "integer_lattice.cfg", "counterexample.cfg",
                           "perturbed_seed1.cfg", "prop1.cfg"}) {
    const Config cfg = config(name);
    for (int run = 0; run < 2; ++run) {
      write_report(run_command("experiment", cfg), (root / name / std::to_string(run)).string());
    }
    for (const char* f : {"report.json", "ratio.csv", "fit_a.csv", "trace.csv"}) {
      ++total;
      const bool same = slurp(root / name / "0" / f) == slurp(root / name / "1" / f) &&
                        !slurp(root / name / "0" / f).empty();
      identical += same;
      if (!same) differing += fmt(" %s/%s", name, f);
    }
  }
  fs::remove_all(root);
  verdict(9, "determinism", identical == total,
          fmt("%d/%d files byte-identical across reruns%s", identical, total, differing.c_str()));
}

}  // namespace

int main() {
  guarded(1, "product oracle", criterion1);
  guarded(2, "divergence detection", criterion2);

  Runs runs;
  bool have_runs = false;
  try {
    runs.lattice = run_command("experiment", config("integer_lattice.cfg"));
    runs.cluster = run_command("experiment", config("counterexample.cfg"));
    runs.audit = run_command("experiment", config("weight_audit.cfg"));
    for (int seed = 1; seed <= 3; ++seed) {
      runs.projection.push_back(
          run_command("experiment", config("perturbed_seed" + std::to_string(seed) + ".cfg")));
      Config p1 = config("prop1.cfg");
      p1.set("seed", std::to_string(seed));
      runs.prop1.push_back(run_command("experiment", p1));
    }
    have_runs = true;
  } catch (const std::exception& e) {
    for (int id = 3; id <= 8; ++id) verdict(id, "scenario runs", false, e.what());
  }
  if (have_runs) {
    guarded(3, "criterion soundness", [&] { criterion3(runs); });
    guarded(4, "positive case", [&] { criterion4(runs); });
    guarded(5, "counterexample", [&] { criterion5(runs); });
    guarded(6, "projection equivalence", [&] { criterion6(runs); });
    guarded(7, "near-real witness", [&] { criterion7(runs); });
    guarded(8, "weight audit", [&] { criterion8(runs); });
  }
  guarded(9, "determinism", criterion9);
  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
