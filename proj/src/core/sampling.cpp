#include "dispref/core/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dispref {
namespace {

// Slack for coordinates produced by floating point mappings that land a hair
// outside the last pixel center.
constexpr double kBoundsSlack = 1e-9;

double clamp_axis(double v, int extent, const char* axis) {
    const double hi = extent - 1;
    if (!(v >= -kBoundsSlack && v <= hi + kBoundsSlack))
        throw std::domain_error(std::string("bilinear_sample: ") + axis + " coordinate out of bounds");
    return std::clamp(v, 0.0, hi);
}

}  // namespace

void bilinear_sample_into(const PixelGrid& grid, ContinuousCoord coord, std::span<double> out) {
    if (out.size() != static_cast<std::size_t>(grid.channels()))
        throw std::domain_error("bilinear_sample_into: output size does not match channel count");
    const double x = clamp_axis(coord.x, grid.width(), "x");
    const double y = clamp_axis(coord.y, grid.height(), "y");
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, grid.width() - 1);
    const int y1 = std::min(y0 + 1, grid.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    for (int c = 0; c < grid.channels(); ++c) {
        const double top = (1.0 - fx) * grid.at(x0, y0, c) + fx * grid.at(x1, y0, c);
        const double bottom = (1.0 - fx) * grid.at(x0, y1, c) + fx * grid.at(x1, y1, c);
        out[c] = (1.0 - fy) * top + fy * bottom;
    }
}

std::vector<double> bilinear_sample(const PixelGrid& grid, ContinuousCoord coord) {
    std::vector<double> out(grid.channels());
    bilinear_sample_into(grid, coord, out);
    return out;
}

double resample_coordinate(int i, int n_src, int n_dst) {
    if (n_dst == 1) return 0.5 * (n_src - 1);
    return static_cast<double>(i) * (n_src - 1) / (n_dst - 1);
}

PixelGrid resize_bilinear(const PixelGrid& grid, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::domain_error("resize_bilinear: output dimensions must be positive");
    if (out_w == grid.width() && out_h == grid.height()) return grid;
    PixelGrid out(out_w, out_h, grid.channels());
    std::vector<double> px(grid.channels());
    for (int j = 0; j < out_h; ++j) {
        const double sy = resample_coordinate(j, grid.height(), out_h);
        for (int i = 0; i < out_w; ++i) {
            bilinear_sample_into(grid, {resample_coordinate(i, grid.width(), out_w), sy}, px);
            for (int c = 0; c < grid.channels(); ++c) out.at(i, j, c) = px[c];
        }
    }
    return out;
}

PixelGrid resize_nearest(const PixelGrid& grid, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1)
        throw std::domain_error("resize_nearest: output dimensions must be positive");
    if (out_w == grid.width() && out_h == grid.height()) return grid;
    // ceil(s - 0.5) rounds halves down.
    auto nearest = [](double s, int extent) {
        return std::clamp(static_cast<int>(std::ceil(s - 0.5)), 0, extent - 1);
    };
    std::vector<int> xs(out_w), ys(out_h);
    for (int i = 0; i < out_w; ++i) xs[i] = nearest(resample_coordinate(i, grid.width(), out_w), grid.width());
    for (int j = 0; j < out_h; ++j) ys[j] = nearest(resample_coordinate(j, grid.height(), out_h), grid.height());
    PixelGrid out(out_w, out_h, grid.channels());
    for (int j = 0; j < out_h; ++j)
        for (int i = 0; i < out_w; ++i)
            for (int c = 0; c < grid.channels(); ++c) out.at(i, j, c) = grid.at(xs[i], ys[j], c);
    return out;
}

DisparityMap resize_nearest(const DisparityMap& map, int out_w, int out_h) {
    return DisparityMap(resize_nearest(map.grid(), out_w, out_h));
}

DisparityMap scale_disparity_values(const DisparityMap& d, double s) {
    if (!(s > 0.0)) throw std::domain_error("scale_disparity_values: factor must be positive");
    DisparityMap out = d;
    for (double& v : out.grid().data())
        if (v >= 0.0) v *= s;
    return out;
}

}  // namespace dispref
