#pragma once

#include <span>
#include <vector>

#include "dispref/core/grid.hpp"
#include "dispref/net/model.hpp"

namespace dispref {

/// Pyramids built once for a (left image, raw disparity) input, queried at
/// arbitrary continuous coordinates of the left frame.
class RefinementField {
public:
    RefinementField(const RefinementModel& model, const PixelGrid& left, const DisparityMap& raw);

    int width() const { return width_; }
    int height() const { return height_; }

    /// Disparities in left-image pixels at each coordinate.
    std::vector<double> query(std::span<const ContinuousCoord> coords) const;
    /// Full predictions (bins, offsets) for inspection.
    HeadOutput query_heads(std::span<const ContinuousCoord> coords) const;

private:
    const RefinementModel& model_;
    FeaturePyramid decoded_;
    int width_;
    int height_;
};

/// Refined disparity on a regular out_w x out_h grid. Output pixel (i, j)
/// samples the left frame at the align-corners mapped coordinate and its value
/// is expressed in output pixels (scaled by out_w / w_left). raw must be at
/// left resolution in left-pixel units.
DisparityMap refine_grid(const StereoPair& pair, const DisparityMap& raw, const RefinementModel& model, int out_w,
                         int out_h);

/// Query coordinates of refine_grid's output grid.
std::vector<ContinuousCoord> output_grid_coords(int ref_w, int ref_h, int out_w, int out_h);

}  // namespace dispref
