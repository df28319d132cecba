#include "dispref/blackbox/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dispref/core/sampling.hpp"

namespace dispref {

BlackboxConfig BlackboxConfig::sgm_census(int d_max) {
    BlackboxConfig c;
    c.cost.mode = CostMode::census;
    c.d_max = d_max;
    return c;
}

BlackboxConfig BlackboxConfig::ad_census(int d_max) {
    BlackboxConfig c;
    c.cost.mode = CostMode::ad_census;
    c.sgm.p1 = 0.8;
    c.sgm.p2 = 10.0;
    c.sgm.num_paths = 4;
    c.d_max = d_max;
    return c;
}

DisparityMap compute_disparity(const PixelGrid& left, const PixelGrid& right, const BlackboxConfig& config) {
    config.sgm.validate();
    const PixelGrid gl = to_grayscale(left);
    const PixelGrid gr = to_grayscale(right);
    const int d_max = std::min(config.d_max, gl.width() - 1);
    if (d_max < 1) throw std::domain_error("compute_disparity: image too narrow for matching");
    const CostVolume raw = matching_cost(gl, gr, d_max, config.cost);
    const CostVolume agg = sgm_aggregate(raw, config.sgm);
    DisparityMap disp = wta(agg);
    if (config.sgm.lr_check) disp = lr_consistency(disp, wta_right(agg), config.sgm.lr_threshold);
    return disp;
}

DisparityMap run_blackbox(const StereoPair& pair, const BlackboxConfig& config) {
    if (pair.balanced()) return compute_disparity(pair.left(), pair.right(), config);

    const double kappa = pair.kappa();
    const PixelGrid left_small = resize_bilinear(pair.left(), pair.right().width(), pair.right().height());
    BlackboxConfig low = config;
    low.d_max = static_cast<int>(std::ceil(config.d_max / kappa));
    const DisparityMap small = compute_disparity(left_small, pair.right(), low);
    return scale_disparity_values(resize_nearest(small, pair.left().width(), pair.left().height()), kappa);
}

}  // namespace dispref
