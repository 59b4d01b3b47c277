#include "ezlab/zero_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "ezlab/error.hpp"

namespace ezlab {

ZeroSequence validate_sequence(std::vector<Complex> raw) {
  if (raw.empty()) {
    throw Error(ErrorCode::invalid_argument, "zero sequence must not be empty");
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const Complex& z = raw[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw Error(ErrorCode::non_finite, "zero #" + std::to_string(i) + " is not finite");
    }
    if (z == Complex(0.0, 0.0)) {
      throw Error(ErrorCode::contains_origin, "zero #" + std::to_string(i) + " is the origin");
    }
  }
  std::stable_sort(raw.begin(), raw.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma < mb;
    return std::arg(a) < std::arg(b);
  });
  return ZeroSequence(std::move(raw));
}

NearRealPartition::NearRealPartition(std::vector<std::size_t> near,
                                     std::vector<std::size_t> far, std::size_t total,
                                     double m0, Weight weight)
    : near_(std::move(near)),
      far_(std::move(far)),
      mask_(total, false),
      m0_(m0),
      weight_(std::move(weight)) {
  if (near_.size() + far_.size() != total) {
    throw Error(ErrorCode::invalid_argument, "partition does not cover the sequence");
  }
  std::vector<bool> seen(total, false);
  for (std::size_t i : near_) {
    if (i >= total || seen[i]) {
      throw Error(ErrorCode::invalid_argument, "partition index repeated or out of range");
    }
    seen[i] = true;
    mask_[i] = true;
  }
  for (std::size_t i : far_) {
    if (i >= total || seen[i]) {
      throw Error(ErrorCode::invalid_argument, "partition index repeated or out of range");
    }
    seen[i] = true;
  }
}

NearRealPartition partition_near_real(const ZeroSequence& zs, const Weight& w, double m0) {
  if (!(m0 > 0.0) || !std::isfinite(m0)) {
    throw Error(ErrorCode::invalid_argument, "m0 must be positive and finite");
  }
  std::vector<std::size_t> near, far;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const Complex& mu = zs[i];
    if (std::abs(mu.imag()) <= m0 * w(std::abs(mu.real()))) {
      near.push_back(i);
    } else {
      far.push_back(i);
    }
  }
  return NearRealPartition(std::move(near), std::move(far), zs.size(), m0, w);
}

ZeroSequence project_real_parts(const ZeroSequence& zs, const NearRealPartition& p) {
  if (p.total() != zs.size()) {
    throw Error(ErrorCode::invalid_argument, "partition does not match the sequence");
  }
  std::vector<Complex> out(zs.begin(), zs.end());
  for (std::size_t i : p.near()) {
    if (out[i].real() == 0.0) {
      throw Error(ErrorCode::zero_real_part,
                  "near-real zero #" + std::to_string(i) + " has zero real part");
    }
    out[i] = Complex(out[i].real(), 0.0);
  }
  return validate_sequence(std::move(out));
}

ZeroSequence gen_scaled_lattice(std::size_t n, double spacing) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "lattice size must be >= 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::invalid_argument, "lattice spacing must be positive and finite");
  }
  std::vector<Complex> z;
  z.reserve(2 * n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double x = spacing * static_cast<double>(k);
    z.emplace_back(x, 0.0);
    z.emplace_back(-x, 0.0);
  }
  return validate_sequence(std::move(z));
}

ZeroSequence gen_integer_lattice(std::size_t n) { return gen_scaled_lattice(n, 1.0); }

ZeroSequence gen_one_sided(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "sequence size must be >= 1");
  std::vector<Complex> z;
  z.reserve(n);
  for (std::size_t k = 1; k <= n; ++k) z.emplace_back(static_cast<double>(k), 0.0);
  return validate_sequence(std::move(z));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1], a pure function of (seed, k).
double keyed_uniform(std::uint64_t seed, std::int64_t k) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(k));
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

}  // namespace

ZeroSequence gen_perturbed_lattice(std::size_t n, const Weight& band, double m0,
                                   std::uint64_t seed) {
  if (n == 0) throw Error(ErrorCode::invalid_argument, "lattice size must be >= 1");
  if (!(m0 >= 0.0) || !std::isfinite(m0)) {
    throw Error(ErrorCode::invalid_argument, "m0 must be nonnegative and finite");
  }
  std::vector<Complex> z;
  z.reserve(2 * n);
  for (std::size_t i = 1; i <= n; ++i) {
    const auto k = static_cast<std::int64_t>(i);
    const double bound = m0 * band(static_cast<double>(i));
    z.emplace_back(static_cast<double>(k), keyed_uniform(seed, k) * bound);
    z.emplace_back(-static_cast<double>(k), keyed_uniform(seed, -k) * bound);
  }
  return validate_sequence(std::move(z));
}

ClusterSpec ClusterSpec::exp_square(int count) {
  if (count < 1) throw Error(ErrorCode::invalid_argument, "cluster count must be >= 1");
  ClusterSpec spec;
  for (int j = 1; j <= count; ++j) {
    spec.centers.push_back(std::exp(static_cast<double>(j)));
    spec.multiplicities.push_back(j * j);
  }
  return spec;
}

namespace {

void validate_spec(const ClusterSpec& spec) {
  if (spec.centers.empty() || spec.centers.size() != spec.multiplicities.size()) {
    throw Error(ErrorCode::invalid_argument,
                "cluster centers and multiplicities must be nonempty and of equal length");
  }
  for (std::size_t j = 0; j < spec.centers.size(); ++j) {
    if (!std::isfinite(spec.centers[j]) || spec.centers[j] <= 2.0) {
      throw Error(ErrorCode::invalid_argument, "cluster centers must be finite and > 2");
    }
    if (spec.multiplicities[j] < 1) {
      throw Error(ErrorCode::invalid_argument, "cluster multiplicities must be >= 1");
    }
    if (j > 0) {
      if (spec.centers[j] <= spec.centers[j - 1]) {
        throw Error(ErrorCode::invalid_argument, "cluster centers must be strictly increasing");
      }
      if (spec.centers[j] - spec.centers[j - 1] <= 2.0) {
        throw Error(ErrorCode::overlap, "cluster windows around " +
                                            std::to_string(spec.centers[j - 1]) + " and " +
                                            std::to_string(spec.centers[j]) + " intersect");
      }
    }
  }
}

}  // namespace

double max_cluster_spacing(const ClusterSpec& spec) {
  validate_spec(spec);
  const int m = *std::max_element(spec.multiplicities.begin(), spec.multiplicities.end());
  return 2.0 / static_cast<double>(m);
}

ZeroSequence gen_clustered(const ClusterSpec& spec, double spacing) {
  validate_spec(spec);
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::invalid_argument, "cluster spacing must be positive and finite");
  }
  const int m_max = *std::max_element(spec.multiplicities.begin(), spec.multiplicities.end());
  if (spacing * m_max > 2.0) {
    throw Error(ErrorCode::invalid_argument, "spacing * max multiplicity exceeds 2");
  }
  std::vector<Complex> background;
  if (spec.background) background.assign(spec.background->begin(), spec.background->end());
  std::vector<bool> removed(background.size(), false);
  std::vector<Complex> out;
  for (std::size_t j = 0; j < spec.centers.size(); ++j) {
    const double c = spec.centers[j];
    const int m = spec.multiplicities[j];
    for (int i = 0; i < m; ++i) {
      out.emplace_back(c + (i - 0.5 * (m - 1)) * spacing, 0.0);
    }
    if (!spec.displace_background) continue;
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < background.size(); ++i) {
      if (!removed[i]) order.push_back(i);
    }
    if (order.size() < static_cast<std::size_t>(m)) {
      throw Error(ErrorCode::invalid_argument, "background too small to displace cluster");
    }
    std::partial_sort(order.begin(), order.begin() + m, order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = std::abs(background[a] - c);
                        const double db = std::abs(background[b] - c);
                        return da != db ? da < db : a < b;
                      });
    for (int i = 0; i < m; ++i) removed[order[i]] = true;
  }
  for (std::size_t i = 0; i < background.size(); ++i) {
    if (!removed[i]) out.push_back(background[i]);
  }
  return validate_sequence(std::move(out));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

ZeroSequence parse_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, std::string("zero set JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::parse, "zero set JSON must be an array");
  std::vector<Complex> pts;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& e = doc[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw Error(ErrorCode::parse,
                  "zero set JSON element " + std::to_string(i) + " is not a [re, im] pair");
    }
    pts.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return validate_sequence(std::move(pts));
}

ZeroSequence parse_csv(std::string_view text) {
  std::vector<Complex> pts;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!header_seen) {
      if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") {
        throw Error(ErrorCode::parse, "line 1: byte-order mark not supported");
      }
      if (line != "re,im") {
        throw Error(ErrorCode::parse, "line 1: expected header 're,im'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double re = 0.0, im = 0.0;
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos ||
        !parse_double(line.substr(0, comma), re) || !parse_double(line.substr(comma + 1), im)) {
      throw Error(ErrorCode::parse, "line " + std::to_string(line_no) +
                                        ": expected two numbers 're,im', got '" +
                                        std::string(line) + "'");
    }
    pts.emplace_back(re, im);
  }
  if (!header_seen) throw Error(ErrorCode::parse, "empty zero set file");
  if (pts.empty()) throw Error(ErrorCode::parse, "zero set file has no rows");
  return validate_sequence(std::move(pts));
}

}  // namespace

ZeroSequence parse_zeroset(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '[') return parse_json(text);
  return parse_csv(text);
}

ZeroSequence load_zeroset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open zero set file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_zeroset(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

std::string format_zeroset_csv(const ZeroSequence& zs) {
  std::string out = "re,im\n";
  for (const Complex& z : zs) {
    append_double(out, z.real());
    out.push_back(',');
    append_double(out, z.imag());
    out.push_back('\n');
  }
  return out;
}

}  // namespace ezlab
