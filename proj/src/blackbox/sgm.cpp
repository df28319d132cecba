#include "dispref/blackbox/sgm.hpp"

#include <algorithm>
#include <stdexcept>

namespace dispref {

void SgmParams::validate() const {
    if (!(p1 >= 0.0) || !(p2 >= p1)) throw std::domain_error("SgmParams: require p2 >= p1 >= 0");
    if (num_paths != 4 && num_paths != 8) throw std::domain_error("SgmParams: num_paths must be 4 or 8");
    if (!(lr_threshold >= 0.0)) throw std::domain_error("SgmParams: lr_threshold must be >= 0");
}

CostVolume aggregate_path(const CostVolume& volume, PathDirection dir, double p1, double p2) {
    const int w = volume.width();
    const int h = volume.height();
    const int nd = volume.d_count();
    CostVolume agg(w, h, volume.d_max());

    // Visit order guarantees p - r is finished before p.
    const int y_begin = dir.dy >= 0 ? 0 : h - 1;
    const int y_step = dir.dy >= 0 ? 1 : -1;
    const int x_begin = dir.dx >= 0 ? 0 : w - 1;
    const int x_step = dir.dx >= 0 ? 1 : -1;

    for (int yi = 0, y = y_begin; yi < h; ++yi, y += y_step) {
        for (int xi = 0, x = x_begin; xi < w; ++xi, x += x_step) {
            auto cost = volume.pixel(x, y);
            auto out = agg.pixel(x, y);
            const int px = x - dir.dx;
            const int py = y - dir.dy;
            if (px < 0 || px >= w || py < 0 || py >= h) {
                std::copy(cost.begin(), cost.end(), out.begin());
                continue;
            }
            auto prev = agg.pixel(px, py);
            const double prev_min = *std::min_element(prev.begin(), prev.end());
            for (int d = 0; d < nd; ++d) {
                double best = std::min(prev[d], prev_min + p2);
                if (d > 0) best = std::min(best, prev[d - 1] + p1);
                if (d + 1 < nd) best = std::min(best, prev[d + 1] + p1);
                out[d] = cost[d] + (best - prev_min);
            }
        }
    }
    return agg;
}

CostVolume sgm_aggregate(const CostVolume& volume, const SgmParams& params) {
    params.validate();
    CostVolume sum(volume.width(), volume.height(), volume.d_max());
    auto acc = sum.data();
    for (int r = 0; r < params.num_paths; ++r) {
        const CostVolume path = aggregate_path(volume, kSgmDirections[r], params.p1, params.p2);
        auto src = path.data();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += src[i];
    }
    return sum;
}

}  // namespace dispref
