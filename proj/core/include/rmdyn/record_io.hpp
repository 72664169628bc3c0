#pragma once

#include <string>
#include <vector>

#include "rmdyn/record.hpp"

namespace rmdyn {

/// summary.json body: kind, seed, summary values in order, series, notes.
std::string summary_json(const ExperimentRecord& record);

/// trials.csv body: header row, one LF-terminated row per trial; integers
/// verbatim, reals as %.17e, missing values as nan.
std::string trials_csv(const ExperimentRecord& record);

/// Writes summary.json, trials.csv and config.snapshot into dir (created if
/// needed). Throws std::runtime_error naming the path on IO failure.
void write_record(const ExperimentRecord& record, const std::string& dir);

/// Self-contained SVG diagnostics for the record kind. Returns the written
/// file names; kinds without a plot return an empty list.
std::vector<std::string> emit_plots(const ExperimentRecord& record, const std::string& dir);

/// The SVG document emit_plots would write for this record ("" if none).
std::string plot_svg(const ExperimentRecord& record);

}  // namespace rmdyn
