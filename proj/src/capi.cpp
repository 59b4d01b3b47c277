#include "ezlab/ezlab.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "ezlab/error.hpp"
#include "ezlab/harness.hpp"
#include "ezlab/product_engine.hpp"
#include "ezlab/zero_model.hpp"

struct ezl_zeroset {
  ezlab::ZeroSequence zs;
};

struct ezl_weight {
  ezlab::Weight w;
};

struct ezl_evaluator {
  ezlab::ProductEvaluator ev;
};

struct ezl_config {
  ezlab::Config cfg;
};

struct ezl_report {
  ezlab::ExperimentReport rep;
};

namespace {

thread_local std::string last_error;

ezl_status from_code(ezlab::ErrorCode code) {
  using ezlab::ErrorCode;
  switch (code) {
    case ErrorCode::invalid_argument: return EZL_INVALID_ARGUMENT;
    case ErrorCode::contains_origin: return EZL_CONTAINS_ORIGIN;
    case ErrorCode::non_finite: return EZL_NON_FINITE;
    case ErrorCode::non_monotone_weight: return EZL_NON_MONOTONE_WEIGHT;
    case ErrorCode::zero_real_part: return EZL_ZERO_REAL_PART;
    case ErrorCode::overlap: return EZL_OVERLAP;
    case ErrorCode::empty_cluster: return EZL_EMPTY_CLUSTER;
    case ErrorCode::coverage: return EZL_COVERAGE;
    case ErrorCode::non_converged: return EZL_NON_CONVERGED;
    case ErrorCode::parse: return EZL_PARSE;
    case ErrorCode::io: return EZL_IO;
    case ErrorCode::config: return EZL_CONFIG;
    case ErrorCode::internal: return EZL_INTERNAL;
  }
  return EZL_INTERNAL;
}

ezl_status fail(ezl_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
ezl_status guarded(F&& f) {
  try {
    f();
    return EZL_OK;
  } catch (const ezlab::Error& e) {
    return fail(from_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(EZL_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(EZL_INTERNAL, e.what());
  } catch (...) {
    return fail(EZL_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

#define EZL_REQUIRE(cond)                                                  \
  do {                                                                     \
    if (!(cond)) return fail(EZL_INVALID_ARGUMENT, "null argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* ezl_version(void) { return ezlab::artifact_version.data(); }

const char* ezl_status_name(ezl_status status) {
  switch (status) {
    case EZL_OK: return "ok";
    case EZL_INVALID_ARGUMENT: return "invalid_argument";
    case EZL_CONTAINS_ORIGIN: return "contains_origin";
    case EZL_NON_FINITE: return "non_finite";
    case EZL_NON_MONOTONE_WEIGHT: return "non_monotone_weight";
    case EZL_ZERO_REAL_PART: return "zero_real_part";
    case EZL_OVERLAP: return "overlap";
    case EZL_EMPTY_CLUSTER: return "empty_cluster";
    case EZL_COVERAGE: return "coverage";
    case EZL_NON_CONVERGED: return "non_converged";
    case EZL_PARSE: return "parse";
    case EZL_IO: return "io";
    case EZL_CONFIG: return "config";
    case EZL_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* ezl_last_error(void) { return last_error.c_str(); }

void ezl_string_free(char* s) { std::free(s); }

ezl_status ezl_zeroset_from_points(const double* re, const double* im, size_t n,
                                   ezl_zeroset** out) {
  EZL_REQUIRE(out);
  EZL_REQUIRE(n == 0 || (re && im));
  return guarded([&] {
    std::vector<ezlab::Complex> pts;
    pts.reserve(n);
    for (size_t i = 0; i < n; ++i) pts.emplace_back(re[i], im[i]);
    *out = new ezl_zeroset{ezlab::validate_sequence(std::move(pts))};
  });
}

ezl_status ezl_zeroset_load(const char* path, ezl_zeroset** out) {
  EZL_REQUIRE(path && out);
  return guarded([&] { *out = new ezl_zeroset{ezlab::ingest_zeroset(path)}; });
}

ezl_status ezl_zeroset_integer_lattice(size_t n, ezl_zeroset** out) {
  EZL_REQUIRE(out);
  return guarded([&] { *out = new ezl_zeroset{ezlab::gen_integer_lattice(n)}; });
}

ezl_status ezl_zeroset_one_sided(size_t n, ezl_zeroset** out) {
  EZL_REQUIRE(out);
  return guarded([&] { *out = new ezl_zeroset{ezlab::gen_one_sided(n)}; });
}

ezl_status ezl_zeroset_perturbed_lattice(size_t n, const ezl_weight* band, double m0,
                                         uint64_t seed, ezl_zeroset** out) {
  EZL_REQUIRE(band && out);
  return guarded(
      [&] { *out = new ezl_zeroset{ezlab::gen_perturbed_lattice(n, band->w, m0, seed)}; });
}

size_t ezl_zeroset_size(const ezl_zeroset* zs) { return zs ? zs->zs.size() : 0; }

ezl_status ezl_zeroset_get(const ezl_zeroset* zs, size_t index, double* re, double* im) {
  EZL_REQUIRE(zs && re && im);
  if (index >= zs->zs.size()) return fail(EZL_INVALID_ARGUMENT, "index out of range");
  *re = zs->zs[index].real();
  *im = zs->zs[index].imag();
  return EZL_OK;
}

void ezl_zeroset_free(ezl_zeroset* zs) { delete zs; }

ezl_status ezl_weight_create(const char* family, double param, ezl_weight** out) {
  EZL_REQUIRE(family && out);
  return guarded([&] {
    const std::string f = family;
    std::optional<ezlab::Weight> w;
    if (f == "log") {
      w = ezlab::Weight::log(param);
    } else if (f == "power") {
      w = ezlab::Weight::power(param);
    } else if (f == "exp_sqrt_log") {
      w = ezlab::Weight::exp_sqrt_log(param);
    } else {
      throw ezlab::Error(ezlab::ErrorCode::invalid_argument, "unknown weight family '" + f + "'");
    }
    *out = new ezl_weight{std::move(*w)};
  });
}

ezl_status ezl_weight_eval(const ezl_weight* w, double t, double* out) {
  EZL_REQUIRE(w && out);
  return guarded([&] { *out = w->w(t); });
}

void ezl_weight_free(ezl_weight* w) { delete w; }

ezl_status ezl_evaluator_create(const ezl_zeroset* zs, const char* variant, const ezl_weight* w,
                                double m0, double tol, ezl_evaluator** out) {
  EZL_REQUIRE(zs && variant && out);
  return guarded([&] {
    const std::string v = variant;
    ezlab::ProductVariant pv;
    if (v != "plain") {
      if (!w) throw ezlab::Error(ezlab::ErrorCode::invalid_argument, v + " needs a weight");
      auto p = ezlab::partition_near_real(zs->zs, w->w, m0);
      if (v == "projected") {
        pv = ezlab::ProductVariant::projected(std::move(p));
      } else if (v == "half_projected") {
        pv = ezlab::ProductVariant::half_projected(std::move(p));
      } else {
        throw ezlab::Error(ezlab::ErrorCode::invalid_argument, "unknown variant '" + v + "'");
      }
    }
    ezlab::EvalOptions opt;
    opt.tol = tol;
    *out = new ezl_evaluator{ezlab::ProductEvaluator(zs->zs, pv, opt)};
  });
}

ezl_status ezl_evaluator_at(const ezl_evaluator* ev, double re, double im, ezl_eval_result* out) {
  EZL_REQUIRE(ev && out);
  return guarded([&] {
    const auto r = ev->ev.at({re, im});
    out->value = r.value;
    out->truncation_radius = r.truncation_radius;
    out->tail_estimate = r.tail_estimate;
    switch (r.status) {
      case ezlab::EvalStatus::converged: out->status = EZL_EVAL_CONVERGED; break;
      case ezlab::EvalStatus::non_converged: out->status = EZL_EVAL_NON_CONVERGED; break;
      case ezlab::EvalStatus::at_zero: out->status = EZL_EVAL_AT_ZERO; break;
    }
  });
}

void ezl_evaluator_free(ezl_evaluator* ev) { delete ev; }

ezl_status ezl_config_parse(const char* text, ezl_config** out) {
  EZL_REQUIRE(text && out);
  return guarded([&] { *out = new ezl_config{ezlab::Config::parse(text)}; });
}

ezl_status ezl_config_load(const char* path, ezl_config** out) {
  EZL_REQUIRE(path && out);
  return guarded([&] { *out = new ezl_config{ezlab::Config::load(path)}; });
}

ezl_status ezl_config_set(ezl_config* cfg, const char* key, const char* value) {
  EZL_REQUIRE(cfg && key && value);
  return guarded([&] { cfg->cfg.set(key, value); });
}

ezl_status ezl_config_get(const ezl_config* cfg, const char* key, char** out) {
  EZL_REQUIRE(cfg && key && out);
  return guarded([&] {
    const auto v = cfg->cfg.get(key);
    if (!v) throw ezlab::Error(ezlab::ErrorCode::config, std::string("key '") + key + "' is not set");
    *out = dup_string(*v);
  });
}

void ezl_config_free(ezl_config* cfg) { delete cfg; }

ezl_status ezl_run(const char* command, const ezl_config* cfg, ezl_report** out) {
  EZL_REQUIRE(command && cfg && out);
  return guarded([&] { *out = new ezl_report{ezlab::run_command(command, cfg->cfg)}; });
}

ezl_status ezl_report_json(const ezl_report* r, char** out) {
  EZL_REQUIRE(r && out);
  return guarded([&] { *out = dup_string(ezlab::report_json(r->rep)); });
}

int ezl_report_passed(const ezl_report* r) { return r && r->rep.passed ? 1 : 0; }

ezl_status ezl_report_write(const ezl_report* r, const char* dir) {
  EZL_REQUIRE(r && dir);
  return guarded([&] { ezlab::write_report(r->rep, dir); });
}

void ezl_report_free(ezl_report* r) { delete r; }

}  // extern "C"
