#pragma once

#include <filesystem>
#include <string>

#include "dispref/eval/metrics.hpp"

namespace dispref {

struct ComparisonReport {
    MetricReport raw;
    MetricReport refined;
    /// refined - raw for every column (SEE delta absent when either side is).
    MetricReport delta;
};

/// Scores raw and refined maps against gt. Holes in either prediction are
/// filled with fill_invalid_background() before scoring.
ComparisonReport compare_report(const DisparityMap& raw, const DisparityMap& refined, const DisparityMap& gt);

/// Columns: row,bad2,bad3,bad4,bad5,EPE,SEE,valid_px,edge_px. Leading '#'
/// lines describe the SEE operationalization. Missing SEE is written empty.
std::string to_csv(const ComparisonReport& report);
std::string to_text(const ComparisonReport& report);

void write_report_csv(const std::filesystem::path& path, const ComparisonReport& report);

}  // namespace dispref
