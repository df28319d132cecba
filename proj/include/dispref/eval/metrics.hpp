#pragma once

#include <map>
#include <optional>

#include "dispref/core/grid.hpp"

namespace dispref {

// All metrics score pixels with a valid ground truth. Predictions must be
// dense (no invalid pixels); use fill_invalid_background() on raw matcher
// output first. Violations throw std::domain_error.

/// Mean |pred - gt| over valid gt pixels.
double epe(const DisparityMap& pred, const DisparityMap& gt);

/// Percentage of valid gt pixels with |pred - gt| > threshold.
double bad(const DisparityMap& pred, const DisparityMap& gt, double threshold);

struct SoftEdgeError {
    double value = 0.0;
    std::size_t edge_count = 0;
};

/// Soft edge error. Edge pixels are valid gt pixels whose patch x patch gt
/// neighborhood spans a disparity range above edge_range_threshold. Each edge
/// pixel contributes min over the (valid) patch of |pred(p) - gt(q)|.
/// Returns nullopt when no pixel qualifies as an edge.
std::optional<SoftEdgeError> see(const DisparityMap& pred, const DisparityMap& gt, int patch = 5,
                                 double edge_range_threshold = 2.0);

struct MetricReport {
    double epe = 0.0;
    std::map<double, double> bad;  // threshold -> percentage
    std::optional<double> see;
    std::size_t valid_count = 0;
    std::size_t edge_count = 0;
};

/// EPE, bad2..bad5 and SEE (5x5 patch, 2 px edge range).
MetricReport evaluate(const DisparityMap& pred, const DisparityMap& gt);

/// Fills each invalid pixel from the nearest valid pixels on its row, taking
/// the smaller (background) of the left and right neighbors. Rows without any
/// valid pixel take zero.
DisparityMap fill_invalid_background(const DisparityMap& map);

}  // namespace dispref
