#pragma once

#include "dispref/blackbox/cost_volume.hpp"
#include "dispref/blackbox/sgm.hpp"
#include "dispref/core/grid.hpp"

namespace dispref {

struct BlackboxConfig {
    MatchingCostParams cost;
    SgmParams sgm;
    /// Search range in left-image pixels.
    int d_max = 32;

    /// Census + 8-path SGM (P1 10, P2 120).
    static BlackboxConfig sgm_census(int d_max = 32);
    /// AD-Census cost + 4-path scanline optimization with penalties scaled
    /// to the [0, 2] AD-Census cost range.
    static BlackboxConfig ad_census(int d_max = 32);
};

/// Cost, aggregation, WTA and optional left-right check on an equal-size pair.
DisparityMap compute_disparity(const PixelGrid& left, const PixelGrid& right, const BlackboxConfig& config);

/// Runs the matcher on a possibly unbalanced pair and returns a map at left
/// resolution in left-pixel units. For kappa > 1 the left image is bilinearly
/// resized to the right's size, matched with d_max / kappa (rounded up), then
/// nearest-upsampled and multiplied by kappa.
DisparityMap run_blackbox(const StereoPair& pair, const BlackboxConfig& config);

}  // namespace dispref
