#include "dispref/core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dispref {

PixelGrid::PixelGrid(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width <= 0 || height <= 0 || channels <= 0)
        throw std::domain_error("PixelGrid: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

PixelGrid::PixelGrid(int width, int height, int channels, std::vector<double> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (width <= 0 || height <= 0 || channels <= 0)
        throw std::domain_error("PixelGrid: dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * height * channels)
        throw std::domain_error("PixelGrid: data length does not match dimensions");
}

PixelGrid PixelGrid::channel(int c) const {
    if (c < 0 || c >= channels_)
        throw std::domain_error("PixelGrid::channel: index out of range");
    PixelGrid out(width_, height_, 1);
    for (int y = 0; y < height_; ++y)
        for (int x = 0; x < width_; ++x)
            out.at(x, y) = at(x, y, c);
    return out;
}

DisparityMap::DisparityMap(int width, int height, double fill) : grid_(width, height, 1, fill) {}

DisparityMap::DisparityMap(PixelGrid grid) : grid_(std::move(grid)) {
    if (grid_.channels() != 1)
        throw std::domain_error("DisparityMap: grid must have one channel");
}

std::size_t DisparityMap::valid_count() const {
    return static_cast<std::size_t>(
        std::count_if(grid_.data().begin(), grid_.data().end(), [](double v) { return v >= 0.0; }));
}

double DisparityMap::max_valid() const {
    double best = kInvalidDisparity;
    for (double v : grid_.data())
        if (v >= 0.0) best = std::max(best, v);
    return best;
}

void DisparityMap::validate(double d_max) const {
    for (double v : grid_.data()) {
        if (!std::isfinite(v))
            throw std::domain_error("DisparityMap: non-finite value");
        if (v < 0.0 && v != kInvalidDisparity)
            throw std::domain_error("DisparityMap: negative value other than the invalid sentinel");
        if (v > d_max)
            throw std::domain_error("DisparityMap: value " + std::to_string(v) + " exceeds d_max " +
                                    std::to_string(d_max));
    }
}

StereoPair::StereoPair(PixelGrid left, PixelGrid right) : left_(std::move(left)), right_(std::move(right)) {
    if (left_.empty() || right_.empty())
        throw std::domain_error("StereoPair: empty image");
    if (left_.channels() != right_.channels())
        throw std::domain_error("StereoPair: channel count mismatch");
    const double aspect_l = static_cast<double>(left_.width()) / left_.height();
    const double aspect_r = static_cast<double>(right_.width()) / right_.height();
    if (std::abs(aspect_l - aspect_r) > 1e-6 * aspect_l)
        throw std::domain_error("StereoPair: left and right aspect ratios differ");
    if (right_.width() > left_.width())
        throw std::domain_error("StereoPair: right image wider than left (kappa < 1)");
}

PixelGrid to_grayscale(const PixelGrid& image) {
    if (image.channels() == 1) return image;
    if (image.channels() != 3)
        throw std::domain_error("to_grayscale: expected 1 or 3 channels");
    PixelGrid out(image.width(), image.height(), 1);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x)
            out.at(x, y) = 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
    return out;
}

}  // namespace dispref
