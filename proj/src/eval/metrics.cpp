#include "dispref/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dispref {
namespace {

void check_inputs(const DisparityMap& pred, const DisparityMap& gt, const char* what) {
    if (pred.width() != gt.width() || pred.height() != gt.height())
        throw std::domain_error(std::string(what) + ": prediction and ground truth sizes differ");
    if (gt.valid_count() == 0) throw std::domain_error(std::string(what) + ": ground truth has no valid pixels");
    if (pred.valid_count() != static_cast<std::size_t>(pred.width()) * pred.height())
        throw std::domain_error(std::string(what) + ": prediction has invalid pixels");
}

}  // namespace

double epe(const DisparityMap& pred, const DisparityMap& gt) {
    check_inputs(pred, gt, "epe");
    double acc = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x)
            if (gt.valid(x, y)) {
                acc += std::abs(pred.at(x, y) - gt.at(x, y));
                ++n;
            }
    return acc / static_cast<double>(n);
}

double bad(const DisparityMap& pred, const DisparityMap& gt, double threshold) {
    check_inputs(pred, gt, "bad");
    std::size_t n = 0, count = 0;
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x)
            if (gt.valid(x, y)) {
                ++n;
                if (std::abs(pred.at(x, y) - gt.at(x, y)) > threshold) ++count;
            }
    return 100.0 * static_cast<double>(count) / static_cast<double>(n);
}

std::optional<SoftEdgeError> see(const DisparityMap& pred, const DisparityMap& gt, int patch,
                                 double edge_range_threshold) {
    if (patch < 1 || patch % 2 == 0) throw std::domain_error("see: patch size must be odd");
    check_inputs(pred, gt, "see");
    const int r = patch / 2;
    double acc = 0.0;
    std::size_t edges = 0;
    for (int y = 0; y < gt.height(); ++y) {
        for (int x = 0; x < gt.width(); ++x) {
            if (!gt.valid(x, y)) continue;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            double best = lo;
            const double p = pred.at(x, y);
            for (int qy = std::max(0, y - r); qy <= std::min(gt.height() - 1, y + r); ++qy)
                for (int qx = std::max(0, x - r); qx <= std::min(gt.width() - 1, x + r); ++qx) {
                    if (!gt.valid(qx, qy)) continue;
                    const double g = gt.at(qx, qy);
                    lo = std::min(lo, g);
                    hi = std::max(hi, g);
                    best = std::min(best, std::abs(p - g));
                }
            if (hi - lo > edge_range_threshold) {
                acc += best;
                ++edges;
            }
        }
    }
    if (edges == 0) return std::nullopt;
    return SoftEdgeError{acc / static_cast<double>(edges), edges};
}

MetricReport evaluate(const DisparityMap& pred, const DisparityMap& gt) {
    MetricReport r;
    r.epe = epe(pred, gt);
    for (double th : {2.0, 3.0, 4.0, 5.0}) r.bad[th] = bad(pred, gt, th);
    if (auto s = see(pred, gt)) {
        r.see = s->value;
        r.edge_count = s->edge_count;
    }
    r.valid_count = gt.valid_count();
    return r;
}

DisparityMap fill_invalid_background(const DisparityMap& map) {
    DisparityMap out = map;
    const int w = map.width();
    for (int y = 0; y < map.height(); ++y) {
        int x = 0;
        while (x < w) {
            if (map.valid(x, y)) {
                ++x;
                continue;
            }
            const int begin = x;
            while (x < w && !map.valid(x, y)) ++x;
            const bool has_left = begin > 0, has_right = x < w;
            double fill = 0.0;
            if (has_left && has_right) fill = std::min(map.at(begin - 1, y), map.at(x, y));
            else if (has_left) fill = map.at(begin - 1, y);
            else if (has_right) fill = map.at(x, y);
            for (int i = begin; i < x; ++i) out.at(i, y) = fill;
        }
    }
    return out;
}

}  // namespace dispref
