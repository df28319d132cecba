#include "dispref/net/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dispref/autodiff/checkpoint.hpp"
#include "dispref/autodiff/ops.hpp"

namespace dispref {
namespace {

constexpr double kRangeSlack = 1e-6;

std::vector<double> uniform(std::size_t n, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

void require_unit_range(const ad::Tensor& t, const char* what) {
    for (double v : t.values())
        if (!(v >= -kRangeSlack && v <= 1.0 + kRangeSlack))
            throw std::domain_error(std::string(what) + ": input values must be normalized to [0, 1]");
}

}  // namespace

PixelGrid FeaturePyramid::as_grid(std::size_t level) const { return ad::to_grid(levels.at(level)); }

RefinementModel::RefinementModel(NetConfig config, std::uint64_t seed) : config_(std::move(config)) {
    config_.validate();
    std::mt19937_64 rng(seed);
    const auto& ch = config_.channels;

    auto build_encoder = [&](const std::string& name, int in_channels) {
        std::vector<std::vector<Conv>> enc;
        int in = in_channels;
        for (int l = 0; l < config_.levels; ++l) {
            const std::string prefix = name + ".level" + std::to_string(l);
            std::vector<Conv> block;
            block.push_back(make_conv(prefix + ".conv0", in, ch[l], 3, l == 0 ? 1 : 2, rng));
            block.push_back(make_conv(prefix + ".conv1", ch[l], ch[l], 3, 1, rng));
            enc.push_back(std::move(block));
            in = ch[l];
        }
        return enc;
    };
    enc_image_ = build_encoder("enc_img", config_.image_channels);
    enc_disp_ = build_encoder("enc_disp", 2);

    dec_proj_.resize(config_.levels);
    dec_block_.resize(config_.levels);
    for (int l = config_.levels - 1; l >= 0; --l) {
        const std::string prefix = "dec.level" + std::to_string(l);
        // Width of the tensor the skip is added to.
        const int merge_width = l == config_.levels - 1 ? ch[l] : ch[l + 1];
        dec_proj_[l] = make_conv(prefix + ".skip_proj", ch[l], merge_width, 1, 1, rng);
        dec_block_[l] = make_conv(prefix + ".conv", merge_width, ch[l], 3, 1, rng);
    }

    if (config_.head == HeadKind::classify_offset) {
        mlp_class_ = make_mlp("mlp_c", config_.feature_dim(), config_.d_bins(), rng);
        mlp_offset_ = make_mlp("mlp_o", config_.feature_dim() + 1, 1, rng);
    } else {
        mlp_class_ = make_mlp("mlp_c", config_.feature_dim(), 1, rng);
    }
}

RefinementModel::Conv RefinementModel::make_conv(const std::string& name, int in, int out, int kernel, int stride,
                                                 std::mt19937_64& rng) {
    // He-uniform for the ReLU convolutions.
    const int fan_in = in * kernel * kernel;
    Conv c;
    c.weight = params_.add(name + ".weight", {out, in, kernel, kernel},
                           uniform(static_cast<std::size_t>(out) * fan_in, std::sqrt(6.0 / fan_in), rng));
    c.bias = params_.add(name + ".bias", {out}, std::vector<double>(out, 0.0));
    c.stride = stride;
    c.padding = kernel / 2;
    return c;
}

RefinementModel::Dense RefinementModel::make_dense(const std::string& name, int in, int out, bool first_layer,
                                                   std::mt19937_64& rng) {
    // Sinusoidal-network initialization with frequency 1.
    const double bound = first_layer ? 1.0 / in : std::sqrt(6.0 / in);
    Dense d;
    d.weight = params_.add(name + ".weight", {in, out}, uniform(static_cast<std::size_t>(in) * out, bound, rng));
    d.bias = params_.add(name + ".bias", {out}, uniform(out, 1.0 / std::sqrt(static_cast<double>(in)), rng));
    return d;
}

std::vector<RefinementModel::Dense> RefinementModel::make_mlp(const std::string& name, int in, int out,
                                                              std::mt19937_64& rng) {
    std::vector<Dense> mlp;
    int width = in;
    for (std::size_t i = 0; i < config_.mlp_hidden.size(); ++i) {
        mlp.push_back(make_dense(name + ".fc" + std::to_string(i), width, config_.mlp_hidden[i], i == 0, rng));
        width = config_.mlp_hidden[i];
    }
    mlp.push_back(make_dense(name + ".out", width, out, false, rng));
    return mlp;
}

ad::Tensor RefinementModel::apply(const Conv& conv, const ad::Tensor& x) {
    return ad::conv2d(x, conv.weight, conv.bias, conv.stride, conv.padding);
}

ad::Tensor RefinementModel::run_mlp(const std::vector<Dense>& mlp, ad::Tensor x) {
    for (std::size_t i = 0; i < mlp.size(); ++i) {
        x = ad::add_bias(ad::matmul(x, mlp[i].weight), mlp[i].bias);
        if (i + 1 < mlp.size()) x = ad::sine(x);
    }
    return x;
}

FeaturePyramid RefinementModel::encode(const std::vector<std::vector<Conv>>& encoder, const ad::Tensor& input,
                                       int in_channels) const {
    if (input.rank() != 3 || input.dim(0) != in_channels)
        throw std::domain_error("encode: expected input of shape [" + std::to_string(in_channels) + ",H,W], got " +
                                ad::shape_string(input.shape()));
    FeaturePyramid out;
    ad::Tensor x = input;
    double scale = 1.0;
    for (const auto& block : encoder) {
        for (const Conv& conv : block) x = ad::relu(apply(conv, x));
        out.levels.push_back(x);
        out.scales.push_back(scale);
        scale *= 0.5;
    }
    return out;
}

FeaturePyramid RefinementModel::encode_image(const ad::Tensor& image) const {
    require_unit_range(image, "encode_image");
    return encode(enc_image_, image, config_.image_channels);
}

FeaturePyramid RefinementModel::encode_disparity(const ad::Tensor& disparity) const {
    require_unit_range(disparity, "encode_disparity");
    return encode(enc_disp_, disparity, 2);
}

FeaturePyramid RefinementModel::decode(const FeaturePyramid& image_features,
                                       const FeaturePyramid& disparity_features) const {
    const int levels = config_.levels;
    if (static_cast<int>(image_features.size()) != levels || static_cast<int>(disparity_features.size()) != levels)
        throw std::domain_error("decode: pyramids must have one entry per level");
    for (int l = 0; l < levels; ++l)
        if (image_features.levels[l].shape() != disparity_features.levels[l].shape())
            throw std::domain_error("decode: image and disparity pyramids are misaligned at level " + std::to_string(l));

    FeaturePyramid out;
    out.levels.resize(levels);
    out.scales = image_features.scales;
    ad::Tensor prev;
    for (int l = levels - 1; l >= 0; --l) {
        const ad::Tensor& fi = image_features.levels[l];
        ad::Tensor merged = apply(dec_proj_[l], ad::add(fi, disparity_features.levels[l]));
        if (prev.defined()) merged = ad::add(ad::upsample_nearest2x(prev, fi.dim(1), fi.dim(2)), merged);
        prev = ad::relu(apply(dec_block_[l], merged));
        out.levels[l] = prev;
    }
    return out;
}

FeaturePyramid RefinementModel::features(const ad::Tensor& image, const ad::Tensor& disparity) const {
    return decode(encode_image(image), encode_disparity(disparity));
}

ad::Tensor RefinementModel::sample_point_features(const FeaturePyramid& decoded,
                                                  std::span<const ContinuousCoord> coords) const {
    if (decoded.size() == 0) throw std::domain_error("sample_point_features: empty pyramid");
    const ad::Tensor& base = decoded.levels[0];
    const double w0 = base.dim(2) - 1, h0 = base.dim(1) - 1;
    for (const auto& c : coords)
        if (!(c.x >= 0.0 && c.x <= w0 && c.y >= 0.0 && c.y <= h0))
            throw std::domain_error("sample_point_features: coordinate outside the reference image");

    std::vector<ad::Tensor> parts;
    std::vector<ContinuousCoord> scaled(coords.size());
    for (std::size_t l = 0; l < decoded.size(); ++l) {
        const ad::Tensor& level = decoded.levels[l];
        const double s = decoded.scales[l];
        const double xmax = level.dim(2) - 1, ymax = level.dim(1) - 1;
        // Strided levels cover the frame up to (extent - 1) * 2^l; the last
        // fraction of a pixel clamps to the border center.
        for (std::size_t i = 0; i < coords.size(); ++i)
            scaled[i] = {std::min(coords[i].x * s, xmax), std::min(coords[i].y * s, ymax)};
        parts.push_back(ad::sample_bilinear(level, scaled));
    }
    return ad::concat(parts, 1);
}

HeadOutput RefinementModel::predict(const ad::Tensor& point_features) const {
    if (point_features.rank() != 2 || point_features.dim(1) != config_.feature_dim())
        throw std::domain_error("predict: expected [N," + std::to_string(config_.feature_dim()) + "] features, got " +
                                ad::shape_string(point_features.shape()));
    const int n = point_features.dim(0);
    HeadOutput out;
    out.disparity.resize(n);

    if (config_.head == HeadKind::l1_regression) {
        out.regression = run_mlp(mlp_class_, point_features);
        auto r = out.regression.values();
        for (int i = 0; i < n; ++i) out.disparity[i] = r[i] * config_.max_disp;
        return out;
    }

    out.logits = run_mlp(mlp_class_, point_features);
    const int bins = config_.d_bins();
    auto lv = out.logits.values();
    out.argmax.resize(n);
    std::vector<double> bin_input(n);
    for (int i = 0; i < n; ++i) {
        const double* row = lv.data() + static_cast<std::size_t>(i) * bins;
        out.argmax[i] = static_cast<int>(std::max_element(row, row + bins) - row);
        bin_input[i] = static_cast<double>(out.argmax[i]) / config_.max_disp;
    }
    // The argmax enters the offset head as a constant.
    const ad::Tensor conditioned = ad::concat({point_features, ad::Tensor::constant({n, 1}, std::move(bin_input))}, 1);
    // Offsets live on a 2^-kOffsetBits grid, so argmax + offset is exact in a
    // double and disparity - offset gives back the argmax bit for bit.
    out.offset = ad::snap(ad::tanh(run_mlp(mlp_offset_, conditioned)), kOffsetBits);
    auto ov = out.offset.values();
    for (int i = 0; i < n; ++i) out.disparity[i] = out.argmax[i] + ov[i];
    return out;
}

PointPrediction RefinementModel::predict_point(std::span<const double> point_features) const {
    if (static_cast<int>(point_features.size()) != config_.feature_dim())
        throw std::domain_error("predict_point: feature length mismatch");
    ad::NoGradGuard no_grad;
    const HeadOutput h = predict(ad::Tensor::constant(
        {1, config_.feature_dim()}, std::vector<double>(point_features.begin(), point_features.end())));
    PointPrediction p;
    p.disparity = h.disparity[0];
    if (config_.head == HeadKind::classify_offset) {
        p.logits.assign(h.logits.values().begin(), h.logits.values().end());
        p.offset = h.offset.item();
        p.bin = h.argmax[0];
    } else {
        p.bin = static_cast<int>(std::floor(p.disparity));
        p.offset = p.disparity - p.bin;
    }
    return p;
}

void RefinementModel::save(const std::filesystem::path& checkpoint) const {
    ad::save_checkpoint(checkpoint, params_);
    write_model_card(model_card_path(checkpoint), config_);
}

RefinementModel RefinementModel::load(const std::filesystem::path& checkpoint) {
    RefinementModel model(read_model_card(model_card_path(checkpoint)), 0);
    ad::apply_checkpoint(ad::load_checkpoint(checkpoint), model.params_);
    return model;
}

ad::Tensor image_input(const PixelGrid& image, int channels) {
    PixelGrid src = image;
    if (channels == 1 && image.channels() == 3) src = to_grayscale(image);
    if (src.channels() != channels)
        throw std::domain_error("image_input: image has " + std::to_string(image.channels()) + " channels, model expects " +
                                std::to_string(channels));
    ad::Tensor t = ad::from_grid(src);
    require_unit_range(t, "image_input");
    return t;
}

ad::Tensor disparity_input(const DisparityMap& disparity, int max_disp) {
    const int w = disparity.width(), h = disparity.height();
    std::vector<double> v(2 * static_cast<std::size_t>(w) * h, 0.0);
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disparity.valid(x, y)) continue;
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            v[i] = std::min(disparity.at(x, y), static_cast<double>(max_disp)) / max_disp;
            v[plane + i] = 1.0;
        }
    return ad::Tensor::constant({2, h, w}, std::move(v));
}

}  // namespace dispref
