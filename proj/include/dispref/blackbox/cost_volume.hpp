#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dispref/core/grid.hpp"

namespace dispref {

/// Cost assigned to correspondences that fall outside the right image.
inline constexpr double kOutOfFrameCost = 1e4;

/// W x H x (d_max + 1) matching costs, disparity-contiguous per pixel.
class CostVolume {
public:
    CostVolume() = default;
    CostVolume(int width, int height, int d_max, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int d_max() const { return d_max_; }
    int d_count() const { return d_max_ + 1; }

    double& at(int x, int y, int d) { return costs_[offset(x, y) + d]; }
    double at(int x, int y, int d) const { return costs_[offset(x, y) + d]; }

    std::span<double> pixel(int x, int y) { return {costs_.data() + offset(x, y), static_cast<std::size_t>(d_count())}; }
    std::span<const double> pixel(int x, int y) const {
        return {costs_.data() + offset(x, y), static_cast<std::size_t>(d_count())};
    }

    std::span<double> data() { return costs_; }
    std::span<const double> data() const { return costs_; }

    bool same_shape(const CostVolume& o) const {
        return width_ == o.width_ && height_ == o.height_ && d_max_ == o.d_max_;
    }

private:
    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * width_ + x) * static_cast<std::size_t>(d_count());
    }

    int width_ = 0;
    int height_ = 0;
    int d_max_ = 0;
    std::vector<double> costs_;
};

enum class CostMode { census, ad_census };

struct MatchingCostParams {
    CostMode mode = CostMode::census;
    int census_window = 5;
    double lambda_ad = 1.0;
    double lambda_census = 1.0;
    /// Applied to |I_l - I_r| on the [0, 255] intensity scale.
    double sigma_ad = 10.0;
    double sigma_census = 8.0;
};

/// Equal-size grayscale pair ([0,1] intensities) -> cost volume.
/// Census mode: Hamming distance of census codes. AD-Census mode:
/// lambda_ad (1 - exp(-AD / sigma_ad)) + lambda_census (1 - exp(-H / sigma_census)).
/// Pixels with an invalid census window on either side use bit_count / 2 as
/// their Hamming distance. Entries with x - d < 0 hold kOutOfFrameCost.
CostVolume matching_cost(const PixelGrid& left, const PixelGrid& right, int d_max, const MatchingCostParams& params);

/// Per-pixel argmin over d, lowest index on ties. A pixel whose winner is an
/// out-of-frame disparity (d > x) is marked invalid.
DisparityMap wta(const CostVolume& volume);

/// Winner-take-all from the right view: cost for right pixel x at d is read
/// at left pixel x + d; disparities reaching past the left border are skipped.
DisparityMap wta_right(const CostVolume& volume);

/// Invalidates left pixels whose right correspondence x - round(d_L) leaves
/// the frame, is invalid, or disagrees by more than threshold.
DisparityMap lr_consistency(const DisparityMap& left_disp, const DisparityMap& right_disp, double threshold);

}  // namespace dispref
