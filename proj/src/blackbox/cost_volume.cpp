#include "dispref/blackbox/cost_volume.hpp"

#include <cmath>
#include <stdexcept>

#include "dispref/blackbox/census.hpp"

namespace dispref {

CostVolume::CostVolume(int width, int height, int d_max, double fill)
    : width_(width), height_(height), d_max_(d_max) {
    if (width <= 0 || height <= 0 || d_max < 0) throw std::domain_error("CostVolume: bad dimensions");
    costs_.assign(static_cast<std::size_t>(width) * height * (d_max + 1), fill);
}

CostVolume matching_cost(const PixelGrid& left, const PixelGrid& right, int d_max, const MatchingCostParams& params) {
    if (!left.same_shape(right)) throw std::domain_error("matching_cost: left and right sizes differ");
    if (left.channels() != 1) throw std::domain_error("matching_cost: grayscale images required");
    if (d_max < 1) throw std::domain_error("matching_cost: d_max must be >= 1");

    const CensusGrid cl = census_transform(left, params.census_window);
    const CensusGrid cr = census_transform(right, params.census_window);
    const double neutral = 0.5 * cl.bit_count();

    CostVolume vol(left.width(), left.height(), d_max);
    for (int y = 0; y < left.height(); ++y) {
        for (int x = 0; x < left.width(); ++x) {
            auto costs = vol.pixel(x, y);
            for (int d = 0; d <= d_max; ++d) {
                const int xr = x - d;
                if (xr < 0) {
                    costs[d] = kOutOfFrameCost;
                    continue;
                }
                const double ham = (cl.valid(x, y) && cr.valid(xr, y))
                                       ? static_cast<double>(hamming_distance(cl.code(x, y), cr.code(xr, y)))
                                       : neutral;
                if (params.mode == CostMode::census) {
                    costs[d] = ham;
                } else {
                    const double ad = 255.0 * std::abs(left.at(x, y) - right.at(xr, y));
                    costs[d] = params.lambda_ad * (1.0 - std::exp(-ad / params.sigma_ad)) +
                               params.lambda_census * (1.0 - std::exp(-ham / params.sigma_census));
                }
            }
        }
    }
    return vol;
}

DisparityMap wta(const CostVolume& volume) {
    DisparityMap out(volume.width(), volume.height());
    for (int y = 0; y < volume.height(); ++y) {
        for (int x = 0; x < volume.width(); ++x) {
            auto costs = volume.pixel(x, y);
            int best = 0;
            for (int d = 1; d <= volume.d_max(); ++d)
                if (costs[d] < costs[best]) best = d;
            if (best <= x) out.at(x, y) = best;
        }
    }
    return out;
}

DisparityMap wta_right(const CostVolume& volume) {
    DisparityMap out(volume.width(), volume.height());
    for (int y = 0; y < volume.height(); ++y) {
        for (int xr = 0; xr < volume.width(); ++xr) {
            int best = -1;
            double best_cost = 0.0;
            for (int d = 0; d <= volume.d_max() && xr + d < volume.width(); ++d) {
                const double c = volume.at(xr + d, y, d);
                if (best < 0 || c < best_cost) {
                    best = d;
                    best_cost = c;
                }
            }
            if (best >= 0) out.at(xr, y) = best;
        }
    }
    return out;
}

DisparityMap lr_consistency(const DisparityMap& left_disp, const DisparityMap& right_disp, double threshold) {
    if (!left_disp.grid().same_shape(right_disp.grid()))
        throw std::domain_error("lr_consistency: map sizes differ");
    DisparityMap out = left_disp;
    for (int y = 0; y < left_disp.height(); ++y) {
        for (int x = 0; x < left_disp.width(); ++x) {
            if (!left_disp.valid(x, y)) continue;
            const int xr = x - static_cast<int>(std::lround(left_disp.at(x, y)));
            if (xr < 0 || xr >= left_disp.width() || !right_disp.valid(xr, y) ||
                std::abs(left_disp.at(x, y) - right_disp.at(xr, y)) > threshold)
                out.invalidate(x, y);
        }
    }
    return out;
}

}  // namespace dispref
