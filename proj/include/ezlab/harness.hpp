#pragma once

// Config-driven experiment runner behind the CLI.
//
// Config format: one `key = value` per line, `#` starts a comment, keys are
// dotted (`zeroset.n`, `weight.family`). Unknown keys are rejected. Every key
// and its default is listed in README.md.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "ezlab/zero_model.hpp"
#include "json.hpp"

namespace ezlab {

inline constexpr std::string_view schema_version = "1.0";
inline constexpr std::string_view artifact_version = "0.1.0";

class Config {
 public:
  // Throws Error{config} naming the line for syntax errors or unknown keys.
  static Config parse(std::string_view text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long get_int(const std::string& key, long def) const;
  bool get_bool(const std::string& key, bool def) const;
  // "a:b", where either end may be the literal `e`.
  std::pair<double, double> get_range(const std::string& key,
                                      std::pair<double, double> def) const;
  std::vector<double> get_list(const std::string& key, std::vector<double> def) const;

  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
  // Directory that relative paths in the config are resolved against.
  const std::string& base_dir() const noexcept { return base_dir_; }
  void set_base_dir(std::string dir) { base_dir_ = std::move(dir); }

  static bool known_key(const std::string& key);

 private:
  std::map<std::string, std::string> entries_;
  std::string base_dir_ = ".";
};

struct PlotTables {
  // x, m_Re(x, 1), l(|x|), ratio
  std::vector<std::vector<double>> ratio;
  // x_max of the range, fitted a, found (1/0), probes, usable fraction
  std::vector<std::vector<double>> fit_a;
  // series label, x, ln|psi(x)|, status
  std::vector<std::tuple<std::string, double, double, std::string>> trace;
};

struct ExperimentReport {
  nlohmann::json payload;   // deterministic for a fixed config
  bool passed = false;
  PlotTables tables;
  std::string zeroset_csv;  // filled by `gen`
  double wall_seconds = 0.0;
  std::string started_utc;
};

ZeroSequence ingest_zeroset(const std::string& path);

// command: gen | eval | sd-fit | stats | experiment
ExperimentReport run_command(const std::string& command, const Config& cfg);
ExperimentReport run_experiment(const Config& cfg);

// ratio.csv, fit_a.csv, trace.csv; header-only when a table is empty.
void emit_plotdata(const ExperimentReport& report, const std::string& dir);

// report.json (deterministic payload), runtime.json (timings) and the CSV
// sidecars; every file is written to a temporary name and renamed.
void write_report(const ExperimentReport& report, const std::string& dir);

std::string report_json(const ExperimentReport& report);

}  // namespace ezlab
