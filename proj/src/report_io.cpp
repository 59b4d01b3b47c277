#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "ezlab/error.hpp"
#include "ezlab/harness.hpp"

namespace ezlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// JSON has no non-finite numbers; they are spelled as strings.
json sanitize(const json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return j;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& e : j) out.push_back(sanitize(e));
    return out;
  }
  if (j.is_object()) {
    json out = json::object();
    for (const auto& [k, v] : j.items()) out[k] = sanitize(v);
    return out;
  }
  return j;
}

void append_number(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
  } else if (std::isinf(v)) {
    out += v > 0 ? "inf" : "-inf";
  } else {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, r.ptr);
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::io, "cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::io, "write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorCode::io, "cannot rename '" + tmp.string() + "' to '" + path.string() +
                                   "': " + ec.message());
  }
}

std::string numeric_csv(const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::string out = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_number(out, row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string trace_csv(const PlotTables& t) {
  std::string out = "series,x,log_abs,status\n";
  for (const auto& [series, x, v, status] : t.trace) {
    out += series;
    out += ',';
    append_number(out, x);
    out += ',';
    append_number(out, v);
    out += ',';
    out += status;
    out += '\n';
  }
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory '" + dir + "': " + ec.message());
}

}  // namespace

std::string report_json(const ExperimentReport& report) {
  return sanitize(report.payload).dump(2) + "\n";
}

void emit_plotdata(const ExperimentReport& report, const std::string& dir) {
  ensure_dir(dir);
  const fs::path d(dir);
  write_atomic(d / "ratio.csv", numeric_csv("x,m_re,l,ratio", report.tables.ratio));
  write_atomic(d / "fit_a.csv",
               numeric_csv("x_max,a,found,probes,pass_fraction", report.tables.fit_a));
  write_atomic(d / "trace.csv", trace_csv(report.tables));
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  ensure_dir(dir);
  const fs::path d(dir);
  write_atomic(d / "report.json", report_json(report));
  const json runtime{{"schema_version", std::string(schema_version)},
                     {"started_utc", report.started_utc},
                     {"wall_seconds", report.wall_seconds}};
  write_atomic(d / "runtime.json", runtime.dump(2) + "\n");
  emit_plotdata(report, dir);
  if (!report.zeroset_csv.empty()) write_atomic(d / "zeros.csv", report.zeroset_csv);
}

}  // namespace ezlab
