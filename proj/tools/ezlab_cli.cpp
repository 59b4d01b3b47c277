// Command-line front end; talks to the library only through the C API.

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ezlab/ezlab.h"

namespace {

enum Exit { ok = 0, verdict_fail = 1, input_error = 2, internal_error = 3 };

int exit_for(ezl_status s) {
  switch (s) {
    case EZL_OK: return ok;
    case EZL_INTERNAL:
    case EZL_NON_CONVERGED: return internal_error;
    default: return input_error;
  }
}

int report_error(ezl_status s) {
  std::fprintf(stderr, "ezlab: %s: %s\n", ezl_status_name(s), ezl_last_error());
  return exit_for(s);
}

struct ConfigDeleter {
  void operator()(ezl_config* c) const { ezl_config_free(c); }
};
struct ReportDeleter {
  void operator()(ezl_report* r) const { ezl_report_free(r); }
};

struct Options {
  std::string config;
  std::string out;
  std::optional<long> seed;
  std::string scenario;
  std::optional<double> tol;
  std::string range;
  std::optional<long> probes;
};

int run(const std::string& command, const Options& o) {
  ezl_config* raw = nullptr;
  ezl_status s = o.config.empty() ? ezl_config_parse("", &raw) : ezl_config_load(o.config.c_str(), &raw);
  if (s != EZL_OK) return report_error(s);
  std::unique_ptr<ezl_config, ConfigDeleter> cfg(raw);

  auto set = [&](const char* key, const std::string& value) {
    if (s == EZL_OK) s = ezl_config_set(cfg.get(), key, value.c_str());
  };
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (!o.scenario.empty()) set("scenario", o.scenario);
  if (o.tol) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", *o.tol);
    set("tol", buf);
  }
  if (!o.range.empty()) set("range", o.range);
  if (o.probes) set("probes", std::to_string(*o.probes));
  if (s != EZL_OK) return report_error(s);

  std::string out = o.out;
  if (out.empty()) {
    char* dir = nullptr;
    if (ezl_config_get(cfg.get(), "output_dir", &dir) == EZL_OK) {
      out = dir;
      ezl_string_free(dir);
    } else {
      out = "ezlab_out";
    }
  }

  ezl_report* rep_raw = nullptr;
  s = ezl_run(command.c_str(), cfg.get(), &rep_raw);
  if (s != EZL_OK) return report_error(s);
  std::unique_ptr<ezl_report, ReportDeleter> rep(rep_raw);
  s = ezl_report_write(rep.get(), out.c_str());
  if (s != EZL_OK) return report_error(s);

  const bool passed = ezl_report_passed(rep.get()) == 1;
  std::printf("%s: %s (report in %s)\n", command.c_str(), passed ? "pass" : "fail", out.c_str());
  return passed ? ok : verdict_fail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ezlab: canonical products, slow decrease and zero counting experiments"};
  app.set_version_flag("--version", std::string(ezl_version()));
  app.require_subcommand(1);

  Options o;
  const char* commands[][2] = {
      {"gen", "generate a zero set and write zeros.csv"},
      {"eval", "evaluate ln|psi| along the real range"},
      {"sd-fit", "fit the slow-decrease constant a over the range"},
      {"stats", "zero-counting ratio profile"},
      {"experiment", "run the configured scenario"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", o.config, "config file (key = value)")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed override");
    sub->add_option("--scenario", o.scenario, "scenario override");
    sub->add_option("--tol", o.tol, "evaluator tolerance override");
    sub->add_option("--range", o.range, "range override a:b");
    sub->add_option("--probes", o.probes, "probe count override");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "ezlab: internal: %s\n", e.what());
    return internal_error;
  }
}
