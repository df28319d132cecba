#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dispref {

/// Marker stored in disparity maps for pixels without an estimate.
inline constexpr double kInvalidDisparity = -1.0;

/// Dense W x H x C raster of doubles, row-major with interleaved channels.
class PixelGrid {
public:
    PixelGrid() = default;
    PixelGrid(int width, int height, int channels = 1, double fill = 0.0);
    PixelGrid(int width, int height, int channels, std::vector<double> data);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }
    double at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const PixelGrid& other) const {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    /// Single channel copy.
    PixelGrid channel(int c) const;

    bool operator==(const PixelGrid&) const = default;

private:
    std::size_t index(int x, int y, int c) const {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// Single-channel disparity raster. Invalid pixels hold exactly kInvalidDisparity.
class DisparityMap {
public:
    DisparityMap() = default;
    DisparityMap(int width, int height, double fill = kInvalidDisparity);
    explicit DisparityMap(PixelGrid grid);

    int width() const { return grid_.width(); }
    int height() const { return grid_.height(); }

    double at(int x, int y) const { return grid_.at(x, y); }
    double& at(int x, int y) { return grid_.at(x, y); }
    bool valid(int x, int y) const { return grid_.at(x, y) >= 0.0; }
    void invalidate(int x, int y) { grid_.at(x, y) = kInvalidDisparity; }

    const PixelGrid& grid() const { return grid_; }
    PixelGrid& grid() { return grid_; }

    std::size_t valid_count() const;
    /// Largest valid value, or kInvalidDisparity when nothing is valid.
    double max_valid() const;

    /// Throws std::domain_error if a valid value exceeds d_max or an
    /// invalid pixel does not carry the sentinel.
    void validate(double d_max) const;

    bool operator==(const DisparityMap&) const = default;

private:
    PixelGrid grid_;
};

/// Location in the reference image frame; pixel centers sit on integers.
struct ContinuousCoord {
    double x = 0.0;
    double y = 0.0;
};

/// Rectified pair, possibly unbalanced (left at higher resolution).
class StereoPair {
public:
    StereoPair(PixelGrid left, PixelGrid right);

    const PixelGrid& left() const { return left_; }
    const PixelGrid& right() const { return right_; }
    /// w_l / w_r.
    double kappa() const { return static_cast<double>(left_.width()) / right_.width(); }
    bool balanced() const { return left_.width() == right_.width() && left_.height() == right_.height(); }

private:
    PixelGrid left_;
    PixelGrid right_;
};

/// Luma conversion (0.299 R + 0.587 G + 0.114 B); single-channel input is copied.
PixelGrid to_grayscale(const PixelGrid& image);

}  // namespace dispref
