// Brute-force reference implementations used by the unit tests and the
// acceptance run. Written straight from the definitions; they share no code
// with the library beyond the data containers.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include "dispref/blackbox/cost_volume.hpp"
#include "dispref/core/grid.hpp"

namespace oracle {

inline double bilinear(const dispref::PixelGrid& g, double x, double y, int c) {
    const int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
    double acc = 0.0;
    for (int j = 0; j <= 1; ++j)
        for (int i = 0; i <= 1; ++i) {
            const int xi = std::min(x0 + i, g.width() - 1), yj = std::min(y0 + j, g.height() - 1);
            const double wx = i ? x - x0 : 1.0 - (x - x0);
            const double wy = j ? y - y0 : 1.0 - (y - y0);
            acc += wx * wy * g.at(xi, yj, c);
        }
    return acc;
}

struct Census {
    std::uint64_t code = 0;
    bool valid = false;
};

inline Census census(const dispref::PixelGrid& img, int x, int y, int window) {
    const int r = window / 2;
    if (x < r || y < r || x + r >= img.width() || y + r >= img.height()) return {};
    Census out{0, true};
    int bit = 0;
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (img.at(x + dx, y + dy) < img.at(x, y)) out.code |= std::uint64_t{1} << bit;
            ++bit;
        }
    return out;
}

inline int popcount(std::uint64_t v) {
    int n = 0;
    for (; v; v >>= 1) n += static_cast<int>(v & 1u);
    return n;
}

/// Matching cost of one entry, census or AD-Census (lambda 1, sigma_ad 10, sigma_c 8).
inline double matching_cost(const dispref::PixelGrid& l, const dispref::PixelGrid& r, int x, int y, int d, int window,
                            bool ad_census) {
    if (x - d < 0) return 1e4;
    const Census a = census(l, x, y, window), b = census(r, x - d, y, window);
    const double ham = (a.valid && b.valid) ? popcount(a.code ^ b.code) : (window * window - 1) / 2.0;
    if (!ad_census) return ham;
    const double ad = 255.0 * std::abs(l.at(x, y) - r.at(x - d, y));
    return (1.0 - std::exp(-ad / 10.0)) + (1.0 - std::exp(-ham / 8.0));
}

/// One SGM path by memoized recursion along p - r; independent of any sweep order.
inline dispref::CostVolume sgm_path(const dispref::CostVolume& c, int dx, int dy, double p1, double p2) {
    const int w = c.width(), h = c.height(), n = c.d_count();
    std::vector<std::vector<double>> memo(static_cast<std::size_t>(w) * h);
    std::function<const std::vector<double>&(int, int)> L = [&](int x, int y) -> const std::vector<double>& {
        auto& m = memo[static_cast<std::size_t>(y) * w + x];
        if (!m.empty()) return m;
        std::vector<double> out(n);
        const int px = x - dx, py = y - dy;
        if (px < 0 || py < 0 || px >= w || py >= h) {
            for (int d = 0; d < n; ++d) out[d] = c.at(x, y, d);
        } else {
            const std::vector<double> prev = L(px, py);
            double lo = prev[0];
            for (double v : prev) lo = std::min(lo, v);
            for (int d = 0; d < n; ++d) {
                double best = std::numeric_limits<double>::infinity();
                for (int e = 0; e < n; ++e) {
                    const int jump = std::abs(d - e);
                    best = std::min(best, prev[e] + (jump == 0 ? 0.0 : jump == 1 ? p1 : p2));
                }
                out[d] = c.at(x, y, d) + (best - lo);
            }
        }
        m = std::move(out);
        return m;
    };
    dispref::CostVolume out(w, h, c.d_max());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int d = 0; d < n; ++d) out.at(x, y, d) = L(x, y)[d];
    return out;
}

inline double epe(const dispref::DisparityMap& p, const dispref::DisparityMap& g) {
    double s = 0.0;
    long n = 0;
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g.at(x, y) >= 0) {
                s += std::abs(p.at(x, y) - g.at(x, y));
                ++n;
            }
    return s / n;
}

inline double bad(const dispref::DisparityMap& p, const dispref::DisparityMap& g, double th) {
    long hit = 0, n = 0;
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x)
            if (g.at(x, y) >= 0) {
                ++n;
                if (std::abs(p.at(x, y) - g.at(x, y)) > th) ++hit;
            }
    return 100.0 * hit / n;
}

/// Soft edge error with a 5x5 patch and 2 px edge range; NaN when no edge pixel exists.
inline double see(const dispref::DisparityMap& p, const dispref::DisparityMap& g, int patch = 5, double range = 2.0) {
    const int r = patch / 2;
    double s = 0.0;
    long n = 0;
    for (int y = 0; y < g.height(); ++y)
        for (int x = 0; x < g.width(); ++x) {
            if (g.at(x, y) < 0) continue;
            double lo = 1e300, hi = -1e300, best = 1e300;
            for (int v = y - r; v <= y + r; ++v)
                for (int u = x - r; u <= x + r; ++u) {
                    if (u < 0 || v < 0 || u >= g.width() || v >= g.height() || g.at(u, v) < 0) continue;
                    lo = std::min(lo, g.at(u, v));
                    hi = std::max(hi, g.at(u, v));
                    best = std::min(best, std::abs(p.at(x, y) - g.at(u, v)));
                }
            if (hi - lo > range) {
                s += best;
                ++n;
            }
        }
    return n ? s / n : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace oracle
