#pragma once

#include <span>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

// Sampling uses align-corners semantics: pixel centers are at integer
// coordinates and the first/last centers of source and destination coincide.

/// Per-channel bilinear blend of the four surrounding pixel centers.
/// Throws std::domain_error when coord lies outside [0, w-1] x [0, h-1].
std::vector<double> bilinear_sample(const PixelGrid& grid, ContinuousCoord coord);

/// Allocation-free variant; out.size() must equal grid.channels().
void bilinear_sample_into(const PixelGrid& grid, ContinuousCoord coord, std::span<double> out);

/// Source coordinate hit by destination index i when resampling n_src -> n_dst.
double resample_coordinate(int i, int n_src, int n_dst);

PixelGrid resize_bilinear(const PixelGrid& grid, int out_w, int out_h);

/// Nearest source pixel under the resize_bilinear mapping; ties go to the lower index.
/// Copies values verbatim, so invalid disparity sentinels survive untouched.
PixelGrid resize_nearest(const PixelGrid& grid, int out_w, int out_h);
DisparityMap resize_nearest(const DisparityMap& map, int out_w, int out_h);

/// Multiplies every valid disparity by s > 0.
DisparityMap scale_disparity_values(const DisparityMap& d, double s);

}  // namespace dispref
