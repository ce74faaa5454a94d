#pragma once

#include <string>

#include "srlab/experiment.hpp"

namespace srlab {

void write_path_csv(const Path& path, const std::string& file);
Path read_path_csv(const std::string& file);
void write_control_csv(const Control& h, const std::string& file);

// Deterministic serialization of a report without runtime_s.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

std::string render_curves_csv(const ExperimentReport& report);
// Scatter of (eps, value); when a fit is present the plot carries exactly two
// line elements: the fitted extrapolation chord and the horizontal target.
std::string render_plot_svg(const ExperimentReport& report);

// Writes report.json, curves.csv, plot.svg (all bitwise-deterministic given
// the report) plus timing.json carrying the wall-clock runtime.
void emit_report(const ExperimentReport& report, const std::string& out_dir);
// Reads the files back; runtime_s is restored from timing.json when present,
// so parse_report(emit_report(r)) == r including the runtime.
ExperimentReport parse_report(const std::string& out_dir);

ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::string& file);

}  // namespace srlab
