#pragma once

#include <array>
#include <span>

#include "dispref/blackbox/cost_volume.hpp"

namespace dispref {

struct SgmParams {
    double p1 = 10.0;
    double p2 = 120.0;
    int num_paths = 8;
    bool lr_check = true;
    double lr_threshold = 1.0;

    /// Throws std::domain_error unless p2 >= p1 >= 0 and num_paths is 4 or 8.
    void validate() const;
};

struct PathDirection {
    int dx;
    int dy;
};

/// The first four are the horizontal/vertical scanlines, the rest diagonals.
inline constexpr std::array<PathDirection, 8> kSgmDirections{{
    {1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1},
}};

/// L_r(p,d) = C(p,d) + [min(L_r(p-r,d), L_r(p-r,d+-1) + P1, min_k L_r(p-r,k) + P2) - min_k L_r(p-r,k)],
/// with L_r = C where p - r is outside the image.
CostVolume aggregate_path(const CostVolume& volume, PathDirection dir, double p1, double p2);

/// Sum of aggregate_path over the first params.num_paths directions.
CostVolume sgm_aggregate(const CostVolume& volume, const SgmParams& params);

}  // namespace dispref
