#pragma once

#include <cstdint>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

struct PixelRect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
};

struct BiasPatch {
    PixelRect rect;
    double bias = 0.0;
};

/// One draw of ground-truth nuisances. Applied in order: bias patches,
/// Gaussian noise, quantization, holes.
struct Corruption {
    double noise_sigma = 0.0;
    bool quantize = false;
    std::vector<PixelRect> holes;
    std::vector<BiasPatch> biases;
    std::uint64_t noise_seed = 0;

    bool empty() const { return noise_sigma == 0.0 && !quantize && holes.empty() && biases.empty(); }
};

/// Random composition: each component is enabled independently (at least one
/// is), noise sigma in [0.25, 2] px, holes covering at most 20% of the area,
/// and up to three constant-bias patches.
Corruption draw_corruption(int w, int h, std::uint64_t seed);

/// Values stay non-negative; hole pixels become invalid.
DisparityMap apply_corruption(const DisparityMap& d, const Corruption& corruption);

DisparityMap corrupt_gt(const DisparityMap& d_gt, std::uint64_t seed);

}  // namespace dispref
