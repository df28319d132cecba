#include "dispref/net/refine.hpp"

#include <algorithm>
#include <stdexcept>

#include "dispref/autodiff/ops.hpp"
#include "dispref/core/sampling.hpp"

namespace dispref {
namespace {
// Bounds peak memory of one head evaluation.
constexpr std::size_t kQueryChunk = 8192;
}  // namespace

RefinementField::RefinementField(const RefinementModel& model, const PixelGrid& left, const DisparityMap& raw)
    : model_(model), width_(left.width()), height_(left.height()) {
    if (raw.width() != left.width() || raw.height() != left.height())
        throw std::domain_error("refine: raw disparity must have the left image's resolution");
    ad::NoGradGuard no_grad;
    decoded_ = model_.features(image_input(left, model_.config().image_channels),
                               disparity_input(raw, model_.config().max_disp));
}

HeadOutput RefinementField::query_heads(std::span<const ContinuousCoord> coords) const {
    ad::NoGradGuard no_grad;
    return model_.predict(model_.sample_point_features(decoded_, coords));
}

std::vector<double> RefinementField::query(std::span<const ContinuousCoord> coords) const {
    std::vector<double> out;
    out.reserve(coords.size());
    for (std::size_t begin = 0; begin < coords.size(); begin += kQueryChunk) {
        const auto chunk = coords.subspan(begin, std::min(kQueryChunk, coords.size() - begin));
        const HeadOutput h = query_heads(chunk);
        out.insert(out.end(), h.disparity.begin(), h.disparity.end());
    }
    return out;
}

std::vector<ContinuousCoord> output_grid_coords(int ref_w, int ref_h, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw std::domain_error("refine_grid: output dimensions must be positive");
    std::vector<ContinuousCoord> coords;
    coords.reserve(static_cast<std::size_t>(out_w) * out_h);
    for (int j = 0; j < out_h; ++j) {
        const double y = resample_coordinate(j, ref_h, out_h);
        for (int i = 0; i < out_w; ++i) coords.push_back({resample_coordinate(i, ref_w, out_w), y});
    }
    return coords;
}

DisparityMap refine_grid(const StereoPair& pair, const DisparityMap& raw, const RefinementModel& model, int out_w,
                         int out_h) {
    const RefinementField field(model, pair.left(), raw);
    const auto coords = output_grid_coords(field.width(), field.height(), out_w, out_h);
    const std::vector<double> disp = field.query(coords);
    const double unit = static_cast<double>(out_w) / field.width();
    DisparityMap out(out_w, out_h);
    auto data = out.grid().data();
    for (std::size_t i = 0; i < disp.size(); ++i) data[i] = std::max(0.0, disp[i]) * unit;
    return out;
}

}  // namespace dispref
