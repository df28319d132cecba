#include "dispref/train/corrupt.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dispref {
namespace {

PixelRect random_rect(std::mt19937_64& rng, int w, int h, double max_side_frac) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int rw = std::max(1, static_cast<int>(std::lround(unit(rng) * max_side_frac * w)));
    const int rh = std::max(1, static_cast<int>(std::lround(unit(rng) * max_side_frac * h)));
    const int x0 = std::uniform_int_distribution<int>(0, w - rw)(rng);
    const int y0 = std::uniform_int_distribution<int>(0, h - rh)(rng);
    return {x0, y0, x0 + rw, y0 + rh};
}

}  // namespace

Corruption draw_corruption(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Corruption c;
    c.noise_seed = rng();
    bool noise = unit(rng) < 0.6, holes = unit(rng) < 0.5, quant = unit(rng) < 0.4, bias = unit(rng) < 0.4;
    if (!noise && !holes && !quant && !bias) noise = true;

    if (noise) c.noise_sigma = 0.25 + 1.75 * unit(rng);
    c.quantize = quant;
    if (holes) {
        const long budget = static_cast<long>(0.2 * w * h);
        long area = 0;
        const int count = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int i = 0; i < count; ++i) {
            const PixelRect r = random_rect(rng, w, h, 0.3);
            const long a = static_cast<long>(r.x1 - r.x0) * (r.y1 - r.y0);
            if (area + a > budget) continue;
            area += a;  // overlaps only lower the true covered area
            c.holes.push_back(r);
        }
    }
    if (bias) {
        const int count = std::uniform_int_distribution<int>(1, 3)(rng);
        for (int i = 0; i < count; ++i) c.biases.push_back({random_rect(rng, w, h, 0.4), (unit(rng) * 2.0 - 1.0) * 4.0});
    }
    return c;
}

DisparityMap apply_corruption(const DisparityMap& d, const Corruption& c) {
    DisparityMap out = d;
    const int w = d.width(), h = d.height();
    for (const auto& b : c.biases)
        for (int y = b.rect.y0; y < std::min(b.rect.y1, h); ++y)
            for (int x = b.rect.x0; x < std::min(b.rect.x1, w); ++x)
                if (out.valid(x, y)) out.at(x, y) = std::max(0.0, out.at(x, y) + b.bias);
    if (c.noise_sigma > 0.0) {
        std::mt19937_64 rng(c.noise_seed);
        std::normal_distribution<double> noise(0.0, c.noise_sigma);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const double n = noise(rng);  // drawn for every pixel to keep the stream aligned
                if (out.valid(x, y)) out.at(x, y) = std::max(0.0, out.at(x, y) + n);
            }
    }
    if (c.quantize)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (out.valid(x, y)) out.at(x, y) = std::round(out.at(x, y));
    for (const auto& r : c.holes)
        for (int y = r.y0; y < std::min(r.y1, h); ++y)
            for (int x = r.x0; x < std::min(r.x1, w); ++x) out.invalidate(x, y);
    return out;
}

DisparityMap corrupt_gt(const DisparityMap& d_gt, std::uint64_t seed) {
    return apply_corruption(d_gt, draw_corruption(d_gt.width(), d_gt.height(), seed));
}

}  // namespace dispref
