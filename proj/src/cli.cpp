#include "qfcn/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"

namespace qfcn {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

const char* mode_name(UpsampleMode mode) {
  return mode == UpsampleMode::kShared ? "shared" : "per_site";
}

const char* kind_name(UpsampleGateKind kind) {
  return kind == UpsampleGateKind::kFullSu4 ? "full_su4" : "controlled_su2";
}

const char* grad_name(GradMethod method) {
  return method == GradMethod::kCentralFd ? "central_fd" : "param_shift";
}

const char* stop_name(StopReason reason) {
  return reason == StopReason::kToleranceMet ? "tolerance_met" : "max_epochs";
}

// Collects every config problem before reporting, so one pass fixes all of
// them.
struct ErrorList {
  std::vector<std::string> items;

  void add(const std::string& field, const std::string& what) {
    items.push_back(field + ": " + what);
  }

  void raise_if_any() const {
    if (items.empty()) return;
    std::string msg = "invalid config:";
    for (const std::string& item : items) msg += "\n  " + item;
    throw std::invalid_argument(msg);
  }
};

// Typed field access over one JSON section, logging problems by
// section.field name instead of throwing on first contact.
class SectionReader {
 public:
  SectionReader(const json& obj, std::string section, ErrorList& errors)
      : obj_(obj), section_(std::move(section)), errors_(errors) {}

  void check_unknown(std::initializer_list<std::string_view> known) const {
    for (const auto& item : obj_.items()) {
      bool ok = false;
      for (std::string_view k : known) {
        if (item.key() == k) {
          ok = true;
          break;
        }
      }
      if (!ok) errors_.add(section_ + "." + item.key(), "unknown field");
    }
  }

  bool get_int(const char* field, int& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_number_integer()) {
      errors_.add(path(field), "must be an integer");
      return false;
    }
    out = v->get<int>();
    return true;
  }

  bool get_u64(const char* field, std::uint64_t& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_number_unsigned() &&
        !(v->is_number_integer() && v->get<long long>() >= 0)) {
      errors_.add(path(field), "must be a non-negative integer");
      return false;
    }
    out = v->get<std::uint64_t>();
    return true;
  }

  bool get_double(const char* field, double& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_number()) {
      errors_.add(path(field), "must be a number");
      return false;
    }
    out = v->get<double>();
    return true;
  }

  bool get_string(const char* field, std::string& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_string()) {
      errors_.add(path(field), "must be a string");
      return false;
    }
    out = v->get<std::string>();
    return true;
  }

  bool get_enum(const char* field, std::string& out,
                std::initializer_list<std::string_view> allowed) const {
    if (!get_string(field, out)) return false;
    for (std::string_view a : allowed) {
      if (out == a) return true;
    }
    std::string list;
    for (std::string_view a : allowed) {
      if (!list.empty()) list += "|";
      list += a;
    }
    errors_.add(path(field), "must be one of " + list);
    return false;
  }

  bool get_int_array(const char* field, std::vector<int>& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_array()) {
      errors_.add(path(field), "must be an array of integers");
      return false;
    }
    std::vector<int> values;
    for (const json& e : *v) {
      if (!e.is_number_integer()) {
        errors_.add(path(field), "must be an array of integers");
        return false;
      }
      values.push_back(e.get<int>());
    }
    out = std::move(values);
    return true;
  }

  bool get_nested_int_array(const char* field,
                            std::vector<std::vector<int>>& out) const {
    const json* v = find(field);
    if (v == nullptr) return false;
    if (!v->is_array()) {
      errors_.add(path(field), "must be an array of integer arrays");
      return false;
    }
    std::vector<std::vector<int>> values;
    for (const json& inner : *v) {
      if (!inner.is_array()) {
        errors_.add(path(field), "must be an array of integer arrays");
        return false;
      }
      std::vector<int> row;
      for (const json& e : inner) {
        if (!e.is_number_integer()) {
          errors_.add(path(field), "must be an array of integer arrays");
          return false;
        }
        row.push_back(e.get<int>());
      }
      values.push_back(std::move(row));
    }
    out = std::move(values);
    return true;
  }

 private:
  const json* find(const char* field) const {
    const auto it = obj_.find(field);
    return it == obj_.end() ? nullptr : &*it;
  }

  std::string path(const char* field) const { return section_ + "." + field; }

  const json& obj_;
  std::string section_;
  ErrorList& errors_;
};

[[noreturn]] void csv_fail(const std::string& path, int line_no,
                           const std::string& what) {
  throw std::invalid_argument("trace CSV '" + path + "' line " +
                              std::to_string(line_no) + ": " + what);
}

std::vector<std::string> read_lines(const std::string& path,
                                    const char* what) {
  std::ifstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error(std::string("cannot open '") + path + "' for " +
                             what);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(file, line)) lines.push_back(line);
  return lines;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!root.is_object()) {
    throw std::invalid_argument("config: top level must be an object");
  }

  ErrorList errors;
  RunConfig cfg;

  for (const auto& item : root.items()) {
    const std::string& key = item.key();
    if (key != "architecture" && key != "training" && key != "data" &&
        key != "model" && key != "experiment" && key != "out_dir") {
      errors.add(key, "unknown section");
    }
  }

  if (root.contains("architecture")) {
    const json& section = root["architecture"];
    if (!section.is_object()) {
      errors.add("architecture", "must be an object");
    } else {
      SectionReader r(section, "architecture", errors);
      r.check_unknown({"n_qubits", "pool_schedule", "upsample_schedule",
                       "conv_reps_per_stage", "upsample_mode",
                       "upsample_gate_kind"});
      r.get_int("n_qubits", cfg.architecture.n_qubits);
      r.get_nested_int_array("pool_schedule", cfg.architecture.pool_schedule);
      r.get_int_array("upsample_schedule", cfg.architecture.upsample_schedule);
      r.get_int("conv_reps_per_stage", cfg.architecture.conv_reps_per_stage);
      std::string text;
      if (r.get_enum("upsample_mode", text, {"shared", "per_site"})) {
        cfg.architecture.upsample_mode = text == "shared"
                                             ? UpsampleMode::kShared
                                             : UpsampleMode::kPerSite;
      }
      if (r.get_enum("upsample_gate_kind", text,
                     {"full_su4", "controlled_su2"})) {
        cfg.architecture.upsample_gate_kind =
            text == "full_su4" ? UpsampleGateKind::kFullSu4
                               : UpsampleGateKind::kControlledSu2;
      }
    }
  }

  if (root.contains("training")) {
    const json& section = root["training"];
    if (!section.is_object()) {
      errors.add("training", "must be an object");
    } else {
      SectionReader r(section, "training", errors);
      r.check_unknown({"step_size", "tolerance", "max_epochs", "grad_method",
                       "fd_step", "init_scale", "init_seed"});
      r.get_double("step_size", cfg.training.step_size);
      r.get_double("tolerance", cfg.training.tolerance);
      r.get_int("max_epochs", cfg.training.max_epochs);
      std::string text;
      if (r.get_enum("grad_method", text, {"central_fd", "param_shift"})) {
        cfg.training.grad_method = text == "central_fd"
                                       ? GradMethod::kCentralFd
                                       : GradMethod::kParamShift;
      }
      r.get_double("fd_step", cfg.training.fd_step);
      r.get_double("init_scale", cfg.training.init_scale);
      r.get_u64("init_seed", cfg.training.init_seed);
    }
  }

  bool data_qubits_given = false;
  if (root.contains("data")) {
    const json& section = root["data"];
    if (!section.is_object()) {
      errors.add("data", "must be an object");
    } else {
      SectionReader r(section, "data", errors);
      r.check_unknown({"n_samples", "seed", "sigma", "theta_a", "theta_b",
                       "n_qubits", "path"});
      r.get_int("n_samples", cfg.n_samples);
      r.get_u64("seed", cfg.data_meta.seed);
      r.get_double("sigma", cfg.data_meta.noise_sigma);
      r.get_double("theta_a", cfg.data_meta.theta_a);
      r.get_double("theta_b", cfg.data_meta.theta_b);
      data_qubits_given = r.get_int("n_qubits", cfg.data_meta.n_qubits);
      r.get_string("path", cfg.dataset_path);
    }
  }
  if (!data_qubits_given) cfg.data_meta.n_qubits = cfg.architecture.n_qubits;

  if (root.contains("model")) {
    if (!root["model"].is_string()) {
      errors.add("model", "must be a string");
    } else {
      cfg.model = root["model"].get<std::string>();
    }
  }
  if (root.contains("experiment")) {
    if (!root["experiment"].is_string()) {
      errors.add("experiment", "must be a string");
    } else {
      cfg.experiment = root["experiment"].get<std::string>();
    }
  }
  if (root.contains("out_dir")) {
    if (!root["out_dir"].is_string()) {
      errors.add("out_dir", "must be a string");
    } else {
      cfg.out_dir = root["out_dir"].get<std::string>();
    }
  }

  errors.raise_if_any();
  return cfg;
}

void validate_run_config(const RunConfig& cfg) {
  ErrorList errors;

  try {
    build_qfcn(cfg.architecture);
  } catch (const std::invalid_argument& e) {
    errors.add("architecture", e.what());
  }

  if (!(cfg.training.step_size > 0.0) ||
      !std::isfinite(cfg.training.step_size)) {
    errors.add("training.step_size", "must be > 0");
  }
  if (!(cfg.training.tolerance >= 0.0) ||
      !std::isfinite(cfg.training.tolerance)) {
    errors.add("training.tolerance", "must be >= 0");
  }
  if (cfg.training.max_epochs < 1) {
    errors.add("training.max_epochs", "must be >= 1");
  }
  if (!(cfg.training.fd_step > 0.0) || !std::isfinite(cfg.training.fd_step)) {
    errors.add("training.fd_step", "must be > 0");
  }
  if (!std::isfinite(cfg.training.init_scale)) {
    errors.add("training.init_scale", "must be finite");
  }

  if (cfg.n_samples < 1) errors.add("data.n_samples", "must be >= 1");
  if (!(cfg.data_meta.noise_sigma >= 0.0) ||
      !std::isfinite(cfg.data_meta.noise_sigma)) {
    errors.add("data.sigma", "must be >= 0");
  }
  if (!std::isfinite(cfg.data_meta.theta_a)) {
    errors.add("data.theta_a", "must be finite");
  }
  if (!std::isfinite(cfg.data_meta.theta_b)) {
    errors.add("data.theta_b", "must be finite");
  }
  if (cfg.data_meta.n_qubits != cfg.architecture.n_qubits) {
    errors.add("data.n_qubits", "must equal architecture.n_qubits");
  }
  if (!cfg.dataset_path.empty() && !fs::exists(cfg.dataset_path)) {
    errors.add("data.path", "file not found: " + cfg.dataset_path);
  }

  if (cfg.model != "qfcn" && cfg.model != "hybrid") {
    errors.add("model", "must be one of qfcn|hybrid");
  }
  if (cfg.experiment != "hybrid_vs_pure" &&
      cfg.experiment != "shared_vs_per_site") {
    errors.add("experiment", "must be one of hybrid_vs_pure|shared_vs_per_site");
  }
  if (cfg.out_dir.empty()) errors.add("out_dir", "must not be empty");

  errors.raise_if_any();
}

Dataset resolve_dataset(const RunConfig& cfg) {
  if (!cfg.dataset_path.empty()) return load_dataset(cfg.dataset_path);
  return gen_dataset(cfg.n_samples, cfg.data_meta);
}

void write_trace_csv(const TrainingTrace& trace, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  file << "epoch,loss,accuracy,elapsed_ms\n";
  char buf[160];
  for (const EpochRecord& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", r.epoch, r.loss,
                  r.accuracy, r.elapsed_ms);
    file << buf;
  }
  if (!file.flush()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

TrainingTrace read_trace_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "reading");
  if (lines.empty() || lines[0] != "epoch,loss,accuracy,elapsed_ms") {
    csv_fail(path, 1, "expected header 'epoch,loss,accuracy,elapsed_ms'");
  }

  TrainingTrace trace;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (line.empty()) continue;
    const int line_no = static_cast<int>(i) + 1;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 4) {
      csv_fail(path, line_no, "expected 4 fields, got " +
                                  std::to_string(fields.size()));
    }
    EpochRecord record;
    const auto parse_int = [&](const std::string& text, int& out) {
      const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
        csv_fail(path, line_no, "bad integer '" + text + "'");
      }
    };
    const auto parse_dbl = [&](const std::string& text, double& out) {
      const auto r = std::from_chars(text.data(), text.data() + text.size(), out);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
        csv_fail(path, line_no, "bad number '" + text + "'");
      }
    };
    parse_int(fields[0], record.epoch);
    parse_dbl(fields[1], record.loss);
    parse_dbl(fields[2], record.accuracy);
    parse_dbl(fields[3], record.elapsed_ms);
    trace.records.push_back(record);
  }
  return trace;
}

void write_params(const std::vector<double>& values, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  file << "#qfcn_params v1\n#count=" << values.size() << "\n";
  char buf[48];
  for (double v : values) {
    std::snprintf(buf, sizeof buf, "%.17g\n", v);
    file << buf;
  }
  if (!file.flush()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

std::vector<double> read_params(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path, "reading");
  const auto fail = [&](int line_no, const std::string& what) {
    throw std::invalid_argument("params file '" + path + "' line " +
                                std::to_string(line_no) + ": " + what);
  };
  if (lines.empty() || lines[0] != "#qfcn_params v1") {
    fail(1, "expected '#qfcn_params v1'");
  }
  if (lines.size() < 2 || !lines[1].starts_with("#count=")) {
    fail(2, "expected '#count=' header");
  }
  std::size_t count = 0;
  {
    const std::string text = lines[1].substr(7);
    const auto r =
        std::from_chars(text.data(), text.data() + text.size(), count);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
      fail(2, "bad count '" + text + "'");
    }
  }
  std::vector<double> values;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    double v = 0.0;
    const std::string& text = lines[i];
    const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
      fail(static_cast<int>(i) + 1, "bad number '" + text + "'");
    }
    values.push_back(v);
  }
  if (values.size() != count) {
    fail(static_cast<int>(lines.size()),
         "count header says " + std::to_string(count) + " but file has " +
             std::to_string(values.size()) + " values");
  }
  return values;
}

void write_report_json(const ComparisonReport& report,
                       const std::string& path) {
  const auto arm_json = [](const ArmReport& arm) {
    char checksum[24];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(arm.dataset_checksum));
    const TrainingTrace& t = arm.trace;
    return json{
        {"name", arm.name},
        {"n_params", arm.n_params},
        {"dataset_checksum", checksum},
        {"epochs", t.records.size()},
        {"stop_reason", stop_name(t.stop_reason)},
        {"initial_loss", t.initial_loss},
        {"initial_accuracy", t.initial_accuracy},
        {"final_loss", t.records.empty() ? t.initial_loss : t.records.back().loss},
        {"final_accuracy",
         t.records.empty() ? t.initial_accuracy : t.records.back().accuracy},
    };
  };

  const ArchitectureConfig& a = report.architecture;
  const TrainConfig& t = report.training;
  json doc{
      {"experiment", report.experiment},
      {"dataset",
       {{"seed", report.dataset_meta.seed},
        {"sigma", report.dataset_meta.noise_sigma},
        {"theta_a", report.dataset_meta.theta_a},
        {"theta_b", report.dataset_meta.theta_b},
        {"n_qubits", report.dataset_meta.n_qubits},
        {"n_samples", report.n_samples}}},
      {"architecture",
       {{"n_qubits", a.n_qubits},
        {"pool_schedule", a.pool_schedule},
        {"upsample_schedule", a.upsample_schedule},
        {"conv_reps_per_stage", a.conv_reps_per_stage},
        {"upsample_mode", mode_name(a.upsample_mode)},
        {"upsample_gate_kind", kind_name(a.upsample_gate_kind)}}},
      {"training",
       {{"step_size", t.step_size},
        {"tolerance", t.tolerance},
        {"max_epochs", t.max_epochs},
        {"grad_method", grad_name(t.grad_method)},
        {"fd_step", t.fd_step},
        {"init_scale", t.init_scale},
        {"init_seed", t.init_seed}}},
      {"arms", json::array()},
      {"observations", report.observations},
  };
  for (const ArmReport& arm : report.arms) doc["arms"].push_back(arm_json(arm));

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  file << doc.dump(2) << "\n";
  if (!file.flush()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

namespace {

struct PanelGeometry {
  double left, top, width, height;
};

// One curve panel: frame, min/max tick labels, a polyline per series.
void append_panel(std::string& svg, const PanelGeometry& g,
                  const std::string& title,
                  const std::vector<std::string>& labels,
                  const std::vector<std::vector<double>>& xs,
                  const std::vector<std::vector<double>>& ys) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                  "#ff7f0e", "#9467bd", "#8c564b"};
  double x_min = xs[0][0], x_max = xs[0][0];
  double y_min = ys[0][0], y_max = ys[0][0];
  for (std::size_t s = 0; s < xs.size(); ++s) {
    for (double v : xs[s]) {
      x_min = std::min(x_min, v);
      x_max = std::max(x_max, v);
    }
    for (double v : ys[s]) {
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (x_max == x_min) x_max = x_min + 1.0;
  const double pad = y_max == y_min ? (y_max == 0.0 ? 1.0 : std::abs(y_max) * 0.1)
                                    : (y_max - y_min) * 0.05;
  y_min -= pad;
  y_max += pad;

  const auto px = [&](double x) {
    return g.left + (x - x_min) / (x_max - x_min) * g.width;
  };
  const auto py = [&](double y) {
    return g.top + (1.0 - (y - y_min) / (y_max - y_min)) * g.height;
  };
  char buf[160];

  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                "fill=\"none\" stroke=\"#888\"/>\n",
                g.left, g.top, g.width, g.height);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" "
                "font-family=\"sans-serif\">%s</text>\n",
                g.left, g.top - 8.0, title.c_str());
  svg += buf;

  // Corner tick labels.
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "font-family=\"sans-serif\" text-anchor=\"end\">%s</text>\n",
                g.left - 4.0, g.top + 10.0, format_g(y_max, 4).c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "font-family=\"sans-serif\" text-anchor=\"end\">%s</text>\n",
                g.left - 4.0, g.top + g.height, format_g(y_min, 4).c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "font-family=\"sans-serif\">%s</text>\n",
                g.left, g.top + g.height + 14.0, format_g(x_min, 4).c_str());
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                "font-family=\"sans-serif\" text-anchor=\"end\">%s</text>\n",
                g.left + g.width, g.top + g.height + 14.0,
                format_g(x_max, 4).c_str());
  svg += buf;

  for (std::size_t s = 0; s < xs.size(); ++s) {
    const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < xs[s].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i ? " " : "",
                    px(xs[s][i]), py(ys[s][i]));
      svg += buf;
    }
    svg += "\"/>\n";

    // Legend swatch + label, stacked top-right.
    const double lx = g.left + g.width - 150.0;
    const double ly = g.top + 14.0 + 16.0 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.2f\" y=\"%.2f\" width=\"12\" height=\"4\" "
                  "fill=\"%s\"/>\n",
                  lx, ly - 4.0, color);
    svg += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" "
                  "font-family=\"sans-serif\">%s</text>\n",
                  lx + 16.0, ly, xml_escape(labels[s]).c_str());
    svg += buf;
  }
}

} // namespace

void render_svg(const std::vector<std::string>& csv_paths,
                const std::string& path) {
  if (csv_paths.empty()) {
    throw std::invalid_argument("render_svg: no input CSVs");
  }

  std::vector<std::string> labels;
  std::vector<std::vector<double>> epochs, losses, accuracies;
  for (const std::string& csv : csv_paths) {
    const TrainingTrace trace = read_trace_csv(csv);
    if (trace.records.empty()) {
      throw std::invalid_argument("render_svg: '" + csv + "' has no data rows");
    }
    labels.push_back(fs::path(csv).stem().string());
    std::vector<double> e, l, a;
    for (const EpochRecord& r : trace.records) {
      e.push_back(static_cast<double>(r.epoch));
      l.push_back(r.loss);
      a.push_back(r.accuracy);
    }
    epochs.push_back(std::move(e));
    losses.push_back(std::move(l));
    accuracies.push_back(std::move(a));
  }

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"880\" "
         "height=\"640\" viewBox=\"0 0 880 640\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"880\" height=\"640\" fill=\"white\"/>\n";
  append_panel(svg, PanelGeometry{60.0, 30.0, 790.0, 250.0}, "loss", labels,
               epochs, losses);
  append_panel(svg, PanelGeometry{60.0, 350.0, 790.0, 250.0}, "accuracy",
               labels, epochs, accuracies);
  svg += "</svg>\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  file << svg;
  if (!file.flush()) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

namespace {

// Flag overrides shared by train/compare/eval; only flags the user actually
// passed are applied on top of the config file.
struct CommonFlags {
  std::string config_path;

  int n_qubits = 8;
  int conv_reps = 1;
  std::string upsample_mode, gate_kind;
  std::vector<int> upsample_schedule;

  double step_size = 0.05, tolerance = 1e-6, fd_step = 1e-5, init_scale = 0.1;
  int max_epochs = 100;
  std::uint64_t init_seed = 0;
  std::string grad_method;

  int n_samples = 40;
  std::uint64_t data_seed = 0;
  double sigma = 0.1, theta_a = std::numbers::pi / 4,
         theta_b = 3 * std::numbers::pi / 4;
  std::string data_path;

  std::string model, experiment, out_dir;

  CLI::Option *o_qubits = nullptr, *o_conv_reps = nullptr, *o_mode = nullptr,
              *o_kind = nullptr, *o_schedule = nullptr, *o_step = nullptr,
              *o_tol = nullptr, *o_fd = nullptr, *o_scale = nullptr,
              *o_epochs = nullptr, *o_init_seed = nullptr, *o_grad = nullptr,
              *o_n = nullptr, *o_data_seed = nullptr, *o_sigma = nullptr,
              *o_ta = nullptr, *o_tb = nullptr, *o_data = nullptr,
              *o_model = nullptr, *o_experiment = nullptr, *o_out = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    o_qubits = cmd->add_option("--qubits", n_qubits, "architecture.n_qubits");
    o_conv_reps = cmd->add_option("--conv-reps", conv_reps,
                                  "architecture.conv_reps_per_stage");
    o_mode = cmd->add_option("--upsample-mode", upsample_mode,
                             "architecture.upsample_mode (shared|per_site)");
    o_kind = cmd->add_option(
        "--gate-kind", gate_kind,
        "architecture.upsample_gate_kind (full_su4|controlled_su2)");
    o_schedule = cmd->add_option("--upsample-schedule", upsample_schedule,
                                 "architecture.upsample_schedule "
                                 "(pool_schedule is config-file only)");
    o_step = cmd->add_option("--step-size", step_size, "training.step_size");
    o_tol = cmd->add_option("--tolerance", tolerance, "training.tolerance");
    o_epochs = cmd->add_option("--epochs", max_epochs, "training.max_epochs");
    o_grad = cmd->add_option("--grad-method", grad_method,
                             "training.grad_method (central_fd|param_shift)");
    o_fd = cmd->add_option("--fd-step", fd_step, "training.fd_step");
    o_scale =
        cmd->add_option("--init-scale", init_scale, "training.init_scale");
    o_init_seed =
        cmd->add_option("--init-seed", init_seed, "training.init_seed");
    o_n = cmd->add_option("--n", n_samples, "data.n_samples");
    o_data_seed = cmd->add_option("--data-seed", data_seed, "data.seed");
    o_sigma = cmd->add_option("--sigma", sigma, "data.sigma");
    o_ta = cmd->add_option("--theta-a", theta_a, "data.theta_a");
    o_tb = cmd->add_option("--theta-b", theta_b, "data.theta_b");
    o_data = cmd->add_option("--data", data_path,
                             "data.path (dataset file to load)");
    o_model = cmd->add_option("--model", model, "model (qfcn|hybrid)");
    o_experiment = cmd->add_option(
        "--experiment", experiment,
        "experiment (hybrid_vs_pure|shared_vs_per_site)");
    o_out = cmd->add_option("--out-dir", out_dir, "output directory");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream file(config_path, std::ios::binary);
      if (!file) {
        throw std::invalid_argument("config: cannot open '" + config_path +
                                    "'");
      }
      std::stringstream buffer;
      buffer << file.rdbuf();
      cfg = parse_run_config(buffer.str());
    }

    bool data_qubits_follow = cfg.dataset_path.empty() &&
                              cfg.data_meta.n_qubits == cfg.architecture.n_qubits;
    if (o_qubits->count()) {
      cfg.architecture.n_qubits = n_qubits;
      if (data_qubits_follow) cfg.data_meta.n_qubits = n_qubits;
    }
    if (o_conv_reps->count()) cfg.architecture.conv_reps_per_stage = conv_reps;
    if (o_mode->count()) {
      if (upsample_mode != "shared" && upsample_mode != "per_site") {
        throw std::invalid_argument(
            "architecture.upsample_mode: must be one of shared|per_site");
      }
      cfg.architecture.upsample_mode = upsample_mode == "shared"
                                           ? UpsampleMode::kShared
                                           : UpsampleMode::kPerSite;
    }
    if (o_kind->count()) {
      if (gate_kind != "full_su4" && gate_kind != "controlled_su2") {
        throw std::invalid_argument(
            "architecture.upsample_gate_kind: must be one of "
            "full_su4|controlled_su2");
      }
      cfg.architecture.upsample_gate_kind =
          gate_kind == "full_su4" ? UpsampleGateKind::kFullSu4
                                  : UpsampleGateKind::kControlledSu2;
    }
    if (o_schedule->count()) {
      cfg.architecture.upsample_schedule = upsample_schedule;
    }
    if (o_step->count()) cfg.training.step_size = step_size;
    if (o_tol->count()) cfg.training.tolerance = tolerance;
    if (o_epochs->count()) cfg.training.max_epochs = max_epochs;
    if (o_grad->count()) {
      if (grad_method != "central_fd" && grad_method != "param_shift") {
        throw std::invalid_argument(
            "training.grad_method: must be one of central_fd|param_shift");
      }
      cfg.training.grad_method = grad_method == "central_fd"
                                     ? GradMethod::kCentralFd
                                     : GradMethod::kParamShift;
    }
    if (o_fd->count()) cfg.training.fd_step = fd_step;
    if (o_scale->count()) cfg.training.init_scale = init_scale;
    if (o_init_seed->count()) cfg.training.init_seed = init_seed;
    if (o_n->count()) cfg.n_samples = n_samples;
    if (o_data_seed->count()) cfg.data_meta.seed = data_seed;
    if (o_sigma->count()) cfg.data_meta.noise_sigma = sigma;
    if (o_ta->count()) cfg.data_meta.theta_a = theta_a;
    if (o_tb->count()) cfg.data_meta.theta_b = theta_b;
    if (o_data->count()) cfg.dataset_path = data_path;
    if (o_model->count()) cfg.model = model;
    if (o_experiment->count()) cfg.experiment = experiment;
    if (o_out->count()) cfg.out_dir = out_dir;

    validate_run_config(cfg);
    return cfg;
  }
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void print_trace_summary(const std::string& name, const TrainingTrace& t) {
  const double fl = t.records.empty() ? t.initial_loss : t.records.back().loss;
  const double fa =
      t.records.empty() ? t.initial_accuracy : t.records.back().accuracy;
  std::cout << name << ": " << t.records.size() << " epochs ("
            << stop_name(t.stop_reason) << "), loss "
            << format_g(t.initial_loss, 6) << " -> " << format_g(fl, 6)
            << ", accuracy " << format_g(t.initial_accuracy, 6) << " -> "
            << format_g(fa, 6) << "\n";
}

int do_train(const CommonFlags& flags) {
  const RunConfig cfg = flags.resolve();
  const Dataset ds = resolve_dataset(cfg);
  fs::create_directories(cfg.out_dir);

  const CircuitSpec full = build_qfcn(cfg.architecture);
  ParamVector params;
  TrainingTrace trace;
  if (cfg.model == "hybrid") {
    const CircuitSpec spec = truncate_at_bottleneck(full);
    std::tie(params, trace) = train_hybrid(spec, ds, cfg.training);
  } else {
    std::tie(params, trace) = train(full, ds, cfg.training);
  }

  const std::string csv = join_path(cfg.out_dir, cfg.model + "_trace.csv");
  const std::string ptxt = join_path(cfg.out_dir, cfg.model + "_params.txt");
  write_trace_csv(trace, csv);
  write_params(params.values, ptxt);
  print_trace_summary(cfg.model, trace);
  std::cout << "wrote " << csv << " and " << ptxt << "\n";
  return 0;
}

int do_compare(const CommonFlags& flags) {
  const RunConfig cfg = flags.resolve();
  const Dataset ds = resolve_dataset(cfg);
  fs::create_directories(cfg.out_dir);

  const Experiment exp = cfg.experiment == "hybrid_vs_pure"
                             ? Experiment::kHybridVsPure
                             : Experiment::kSharedVsPerSite;
  const ComparisonReport report =
      compare_models(exp, ds, cfg.architecture, cfg.training);

  for (const ArmReport& arm : report.arms) {
    const std::string csv = join_path(cfg.out_dir, arm.name + "_trace.csv");
    write_trace_csv(arm.trace, csv);
    print_trace_summary(arm.name, arm.trace);
  }
  const std::string report_path = join_path(cfg.out_dir, "report.json");
  write_report_json(report, report_path);
  for (const std::string& obs : report.observations) {
    std::cout << "note: " << obs << "\n";
  }
  std::cout << "wrote " << report_path << "\n";
  return 0;
}

int do_eval(const CommonFlags& flags, const std::string& params_path) {
  const RunConfig cfg = flags.resolve();
  const Dataset ds = resolve_dataset(cfg);
  const std::vector<double> values = read_params(params_path);

  const CircuitSpec full = build_qfcn(cfg.architecture);
  std::vector<std::vector<double>> predictions, targets;
  for (const Sample& s : ds.samples) targets.push_back(s.labels);

  if (cfg.model == "hybrid") {
    const CircuitSpec spec = truncate_at_bottleneck(full);
    const int n_quantum = spec.layout.total();
    const int n_head = head_param_count(spec.bottleneck_width, spec.n_qubits);
    if (values.size() != static_cast<std::size_t>(n_quantum + n_head)) {
      throw std::invalid_argument(
          "params file has " + std::to_string(values.size()) +
          " values; the hybrid model needs " +
          std::to_string(n_quantum + n_head));
    }
    const ParamVector quantum = make_params(
        spec, std::vector<double>(values.begin(), values.begin() + n_quantum));
    const ClassicalHead head = head_from_params(
        std::span<const double>(values).subspan(n_quantum),
        spec.bottleneck_width, spec.n_qubits);
    for (const Sample& s : ds.samples) {
      predictions.push_back(
          classical_upsample(forward_qcnn(spec, quantum, s.x), head));
    }
  } else {
    const ParamVector params = make_params(full, values);
    for (const Sample& s : ds.samples) {
      predictions.push_back(forward(full, params, s.x));
    }
  }

  std::cout << "loss = " << format_g(mse_loss(predictions, targets), 12)
            << "\n";
  std::cout << "accuracy = " << format_g(accuracy(predictions, targets), 12)
            << "\n";
  return 0;
}

} // namespace

int run_command(int argc, const char* const* argv) {
  CLI::App app{"quantum fully convolutional segmentation experiments"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  int gen_n = 40;
  std::uint64_t gen_seed = 0;
  double gen_sigma = 0.1;
  double gen_ta = std::numbers::pi / 4, gen_tb = 3 * std::numbers::pi / 4;
  int gen_qubits = 8;
  std::string gen_out;
  gen->add_option("--n", gen_n, "sample count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--sigma", gen_sigma, "angle noise sigma");
  gen->add_option("--theta-a", gen_ta, "class A base angle");
  gen->add_option("--theta-b", gen_tb, "class B base angle");
  gen->add_option("--qubits", gen_qubits, "positions per sample");
  gen->add_option("--out", gen_out, "output dataset path")->required();

  auto* train_cmd =
      app.add_subcommand("train", "train one model and write its trace");
  CommonFlags train_flags;
  train_flags.attach(train_cmd);

  auto* compare_cmd = app.add_subcommand(
      "compare", "train both arms of an experiment on the same data");
  CommonFlags compare_flags;
  compare_flags.attach(compare_cmd);

  auto* eval_cmd =
      app.add_subcommand("eval", "evaluate saved parameters on a dataset");
  CommonFlags eval_flags;
  eval_flags.attach(eval_cmd);
  std::string eval_params;
  eval_cmd->add_option("--params", eval_params, "saved parameters file")
      ->required();

  auto* plot_cmd = app.add_subcommand("plot", "render trace CSVs to an SVG");
  std::vector<std::string> plot_csvs;
  std::string plot_out;
  plot_cmd->add_option("csvs", plot_csvs, "trace CSV files")->required();
  plot_cmd->add_option("--out", plot_out, "output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (gen->parsed()) {
      const Dataset ds =
          gen_dataset(gen_n, gen_seed, gen_sigma, gen_ta, gen_tb, gen_qubits);
      save_dataset(ds, gen_out);
      std::cout << "wrote " << ds.samples.size() << " samples to " << gen_out
                << "\n";
      return 0;
    }
    if (train_cmd->parsed()) return do_train(train_flags);
    if (compare_cmd->parsed()) return do_compare(compare_flags);
    if (eval_cmd->parsed()) return do_eval(eval_flags, eval_params);
    if (plot_cmd->parsed()) {
      render_svg(plot_csvs, plot_out);
      std::cout << "wrote " << plot_out << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

} // namespace qfcn
