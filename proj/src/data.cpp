#include "qfcn/data.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qfcn/state.hpp"

namespace qfcn {

double GaussianSource::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] keeps the log finite; u2 in [0, 1).
  const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("dataset line " + std::to_string(line_no) + ": " +
                           what);
}

double parse_double(std::string_view text, int line_no) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    parse_fail(line_no, "bad number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

// Header line `#name=value`; returns the value part or fails.
std::string_view header_value(std::string_view line, std::string_view name,
                              int line_no) {
  const std::string prefix = "#" + std::string(name) + "=";
  if (!line.starts_with(prefix)) {
    parse_fail(line_no, "expected '" + prefix + "' header");
  }
  return line.substr(prefix.size());
}

} // namespace

Dataset gen_dataset(int n_samples, std::uint64_t seed, double noise_sigma,
                    double theta_a, double theta_b, int n_qubits) {
  DatasetMeta meta;
  meta.seed = seed;
  meta.noise_sigma = noise_sigma;
  meta.theta_a = theta_a;
  meta.theta_b = theta_b;
  meta.n_qubits = n_qubits;
  return gen_dataset(n_samples, meta);
}

Dataset gen_dataset(int n_samples, const DatasetMeta& meta) {
  if (n_samples < 1) {
    throw std::invalid_argument("gen_dataset: n_samples must be >= 1");
  }
  if (!(meta.noise_sigma >= 0.0) || !std::isfinite(meta.noise_sigma)) {
    throw std::invalid_argument("gen_dataset: noise_sigma must be >= 0");
  }
  if (!std::isfinite(meta.theta_a) || !std::isfinite(meta.theta_b)) {
    throw std::invalid_argument("gen_dataset: base angles must be finite");
  }
  if (meta.n_qubits < 2 || meta.n_qubits > kMaxQubits) {
    throw std::invalid_argument("gen_dataset: n_qubits " +
                                std::to_string(meta.n_qubits) +
                                " outside [2, " + std::to_string(kMaxQubits) +
                                "]");
  }

  const int n = meta.n_qubits;
  GaussianSource source(meta.seed);
  Dataset ds;
  ds.meta = meta;
  ds.samples.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    // Cut first, then exactly n gaussians, so the cut sequence is shared by
    // datasets that differ only in sigma.
    const int cut =
        1 + static_cast<int>(source.next_word() % static_cast<std::uint64_t>(n - 1));
    Sample sample;
    sample.x.resize(n);
    sample.labels.resize(n);
    for (int q = 0; q < n; ++q) {
      const bool class_b = q >= cut;
      const double base = class_b ? meta.theta_b : meta.theta_a;
      sample.x[q] = base + meta.noise_sigma * source.next_gaussian();
      sample.labels[q] = class_b ? 1.0 : -1.0;
    }
    ds.samples.push_back(std::move(sample));
  }
  return ds;
}

std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  out += "#version=1\n";
  out += "#seed=" + std::to_string(ds.meta.seed) + "\n";
  out += "#sigma=" + format_double(ds.meta.noise_sigma) + "\n";
  out += "#theta_a=" + format_double(ds.meta.theta_a) + "\n";
  out += "#theta_b=" + format_double(ds.meta.theta_b) + "\n";
  out += "#n_qubits=" + std::to_string(ds.meta.n_qubits) + "\n";
  for (const Sample& sample : ds.samples) {
    for (std::size_t q = 0; q < sample.x.size(); ++q) {
      if (q) out += ',';
      out += format_double(sample.x[q]);
    }
    out += '|';
    for (std::size_t q = 0; q < sample.labels.size(); ++q) {
      if (q) out += ',';
      out += format_double(sample.labels[q]);
    }
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  file << serialize_dataset(ds);
  if (!file.flush()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

Dataset load_dataset(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for reading");
  }
  std::stringstream buffer;
  buffer << file.rdbuf();
  const std::string text = buffer.str();

  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 6) {
    parse_fail(static_cast<int>(lines.size()) + 1, "missing header");
  }

  if (lines[0] != "#version=1") {
    parse_fail(1, "unsupported version '" + std::string(lines[0]) + "'");
  }

  Dataset ds;
  {
    const std::string_view value = header_value(lines[1], "seed", 2);
    std::uint64_t seed = 0;
    const auto* end = value.data() + value.size();
    const auto result = std::from_chars(value.data(), end, seed);
    if (result.ec != std::errc() || result.ptr != end) {
      parse_fail(2, "bad seed '" + std::string(value) + "'");
    }
    ds.meta.seed = seed;
  }
  ds.meta.noise_sigma = parse_double(header_value(lines[2], "sigma", 3), 3);
  ds.meta.theta_a = parse_double(header_value(lines[3], "theta_a", 4), 4);
  ds.meta.theta_b = parse_double(header_value(lines[4], "theta_b", 5), 5);
  {
    const std::string_view value = header_value(lines[5], "n_qubits", 6);
    int n = 0;
    const auto* end = value.data() + value.size();
    const auto result = std::from_chars(value.data(), end, n);
    if (result.ec != std::errc() || result.ptr != end || n < 2 ||
        n > kMaxQubits) {
      parse_fail(6, "bad n_qubits '" + std::string(value) + "'");
    }
    ds.meta.n_qubits = n;
  }

  const int n = ds.meta.n_qubits;
  for (std::size_t i = 6; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const std::vector<std::string_view> halves = split(lines[i], '|');
    if (halves.size() != 2) {
      parse_fail(line_no, "expected one '|' separator");
    }
    const std::vector<std::string_view> angle_parts = split(halves[0], ',');
    const std::vector<std::string_view> label_parts = split(halves[1], ',');
    if (angle_parts.size() != static_cast<std::size_t>(n)) {
      parse_fail(line_no, "expected " + std::to_string(n) + " angles, got " +
                              std::to_string(angle_parts.size()));
    }
    if (label_parts.size() != static_cast<std::size_t>(n)) {
      parse_fail(line_no, "expected " + std::to_string(n) + " labels, got " +
                              std::to_string(label_parts.size()));
    }
    Sample sample;
    sample.x.resize(n);
    sample.labels.resize(n);
    for (int q = 0; q < n; ++q) {
      sample.x[q] = parse_double(angle_parts[q], line_no);
      if (!std::isfinite(sample.x[q])) {
        parse_fail(line_no, "non-finite angle");
      }
      sample.labels[q] = parse_double(label_parts[q], line_no);
      if (sample.labels[q] != 1.0 && sample.labels[q] != -1.0) {
        parse_fail(line_no, "label must be -1 or 1, got '" +
                                std::string(label_parts[q]) + "'");
      }
    }
    ds.samples.push_back(std::move(sample));
  }

  if (ds.samples.empty()) {
    parse_fail(7, "dataset has no samples");
  }
  return ds;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

} // namespace qfcn
