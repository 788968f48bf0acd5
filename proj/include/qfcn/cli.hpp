// Command-line front end: config files with total validation, experiment
// orchestration, trace CSVs, JSON comparison reports, and SVG curve plots.
#pragma once

#include <string>
#include <vector>

#include "qfcn/circuit.hpp"
#include "qfcn/data.hpp"
#include "qfcn/hybrid.hpp"
#include "qfcn/training.hpp"

namespace qfcn {

// One resolved run: every module's knobs plus experiment selection. The JSON
// config mirrors this struct section by section; command-line flags override
// single fields afterwards.
struct RunConfig {
  ArchitectureConfig architecture;
  TrainConfig training;
  DatasetMeta data_meta;      // generation parameters (data section)
  int n_samples = 40;
  std::string dataset_path;   // when set, load this file instead of generating
  std::string model = "qfcn";  // qfcn | hybrid
  std::string experiment = "hybrid_vs_pure";
  std::string out_dir = ".";
};

// Parses the JSON text into a RunConfig. Type errors, unknown fields, and
// bad enum values are all collected and reported together as
// "section.field: problem" lines in one invalid_argument.
RunConfig parse_run_config(const std::string& json_text);

// Range and consistency checks across all sections (called after flag
// overrides, before any compute); reports every violation at once.
void validate_run_config(const RunConfig& cfg);

// The configured dataset: loaded from dataset_path when set, generated from
// the data section otherwise.
Dataset resolve_dataset(const RunConfig& cfg);

// Header `epoch,loss,accuracy,elapsed_ms`, one row per epoch, 12 significant
// digits; byte-deterministic for a given trace.
void write_trace_csv(const TrainingTrace& trace, const std::string& path);

// Reads the per-epoch records back; initial_loss and stop_reason are not
// stored in the CSV and stay defaulted.
TrainingTrace read_trace_csv(const std::string& path);

void write_params(const std::vector<double>& values, const std::string& path);
std::vector<double> read_params(const std::string& path);

void write_report_json(const ComparisonReport& report, const std::string& path);

// Loss and accuracy panels, one polyline per input CSV per panel, legend
// from the file stems. Valid standalone XML.
void render_svg(const std::vector<std::string>& csv_paths,
                const std::string& path);

// Entry point behind main(): subcommands gen-data | train | compare | eval |
// plot. Returns 0 on success, 1 on validation errors (including usage), 2 on
// runtime failures.
int run_command(int argc, const char* const* argv);

} // namespace qfcn
