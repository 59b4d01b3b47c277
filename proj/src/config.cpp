#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>

#include "ezlab/error.hpp"
#include "ezlab/harness.hpp"

namespace ezlab {

namespace {

constexpr std::string_view keys[] = {
    "scenario",
    "seed",
    "tol",
    "K",
    "range",
    "probes",
    "doublings",
    "a_max",
    "m0",
    "variant",
    "output_dir",
    "zeroset.source",
    "zeroset.path",
    "zeroset.generator",
    "zeroset.n",
    "zeroset.spacing",
    "zeroset.band_m0",
    "zeroset.clusters",
    "zeroset.cluster_spacing",
    "zeroset.background",
    "zeroset.background_n",
    "zeroset.background_spacing",
    "zeroset.displace",
    "weight.family",
    "weight.c",
    "weight.p",
    "weight.q",
    "weight.table",
    "theorem1.range",
    "theorem1.threshold",
    "theorem1.probes",
    "prop1.mode",
    "prop1.m1_values",
    "audit.weights",
    "audit.expect",
    "audit.t_max",
    "audit.k",
    "eval.points",
    "trace.points",
    "cluster.window_points",
    "fit.a_floor",
    "fit.resolution",
    "search.cells",
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* what) {
  throw Error(ErrorCode::config, "config key '" + key + "': expected " + what + ", got '" +
                                     value + "'");
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (s == "e") {
    out = std::numbers::e;
    return true;
  }
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

bool Config::known_key(const std::string& key) {
  return std::find(std::begin(keys), std::end(keys), key) != std::end(keys);
}

Config Config::parse(std::string_view text, const std::string& origin) {
  Config cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::config, where + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (!known_key(key)) throw Error(ErrorCode::config, where + ": unknown key '" + key + "'");
    if (cfg.entries_.count(key)) {
      throw Error(ErrorCode::config, where + ": duplicate key '" + key + "'");
    }
    cfg.entries_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  Config cfg = parse(buf.str(), path);
  const auto parent = std::filesystem::path(path).parent_path();
  cfg.base_dir_ = parent.empty() ? "." : parent.string();
  return cfg;
}

void Config::set(const std::string& key, const std::string& value) {
  if (!known_key(key)) throw Error(ErrorCode::config, "unknown config key '" + key + "'");
  entries_[key] = value;
}

std::optional<std::string> Config::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  return get(key).value_or(def);
}

double Config::get_double(const std::string& key, double def) const {
  const auto v = get(key);
  if (!v) return def;
  double out = 0.0;
  if (!to_double(*v, out)) bad_value(key, *v, "a finite number");
  return out;
}

long Config::get_int(const std::string& key, long def) const {
  const auto v = get(key);
  if (!v) return def;
  const std::string_view s = trim(*v);
  long out = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) bad_value(key, *v, "an integer");
  return out;
}

bool Config::get_bool(const std::string& key, bool def) const {
  const auto v = get(key);
  if (!v) return def;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(key, *v, "true or false");
}

std::pair<double, double> Config::get_range(const std::string& key,
                                            std::pair<double, double> def) const {
  const auto v = get(key);
  if (!v) return def;
  const auto colon = v->find(':');
  double a = 0.0, b = 0.0;
  if (colon == std::string::npos || !to_double(std::string_view(*v).substr(0, colon), a) ||
      !to_double(std::string_view(*v).substr(colon + 1), b) || !(a < b)) {
    bad_value(key, *v, "a range 'a:b' with a < b");
  }
  return {a, b};
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> def) const {
  const auto v = get(key);
  if (!v) return def;
  std::vector<double> out;
  std::string_view s = *v;
  while (true) {
    const auto comma = s.find(',');
    double x = 0.0;
    if (!to_double(s.substr(0, comma), x)) bad_value(key, *v, "a comma-separated number list");
    out.push_back(x);
    if (comma == std::string_view::npos) break;
    s = s.substr(comma + 1);
  }
  return out;
}

}  // namespace ezlab
