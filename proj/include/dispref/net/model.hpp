#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

#include "dispref/autodiff/parameter.hpp"
#include "dispref/autodiff/tensor.hpp"
#include "dispref/core/grid.hpp"
#include "dispref/net/config.hpp"

namespace dispref {

/// Multi-resolution features. Level l has extent ceil(input / 2^l) and
/// scale 2^-l relative to the input frame.
struct FeaturePyramid {
    std::vector<ad::Tensor> levels;  // each [C, H, W]
    std::vector<double> scales;

    std::size_t size() const { return levels.size(); }
    PixelGrid as_grid(std::size_t level) const;
};

/// Batched head outputs for N query points.
struct HeadOutput {
    ad::Tensor logits;              // [N, d_bins]   (classify_offset)
    ad::Tensor offset;              // [N, 1] in [-1, 1] (classify_offset)
    ad::Tensor regression;          // [N, 1] disparity / max_disp (l1_regression)
    std::vector<int> argmax;        // per point; empty for l1_regression
    std::vector<double> disparity;  // bin units == input-resolution pixels
};

/// Single query point view of HeadOutput.
struct PointPrediction {
    std::vector<double> logits;
    double offset = 0.0;
    int bin = 0;
    double disparity = 0.0;
};

/// Image and disparity encoders, merging decoder and the two point-wise MLP heads.
class RefinementModel {
public:
    RefinementModel(NetConfig config, std::uint64_t seed);

    // Layers alias the parameter tensors, so copies would share weights.
    RefinementModel(const RefinementModel&) = delete;
    RefinementModel& operator=(const RefinementModel&) = delete;
    RefinementModel(RefinementModel&&) = default;
    RefinementModel& operator=(RefinementModel&&) = default;

    const NetConfig& config() const { return config_; }
    ad::ParameterSet& params() { return params_; }
    const ad::ParameterSet& params() const { return params_; }

    /// image: [image_channels, H, W] with values in [0, 1].
    FeaturePyramid encode_image(const ad::Tensor& image) const;
    /// disparity: [2, H, W] = (d / max_disp, validity), values in [0, 1].
    FeaturePyramid encode_disparity(const ad::Tensor& disparity) const;
    /// Deepest level first: upsample, add projected encoder sum, conv block.
    FeaturePyramid decode(const FeaturePyramid& image_features, const FeaturePyramid& disparity_features) const;

    /// Both encoders followed by the decoder.
    FeaturePyramid features(const ad::Tensor& image, const ad::Tensor& disparity) const;

    /// [N, feature_dim]: per-level bilinear samples at coord * scale, concatenated in level order.
    ad::Tensor sample_point_features(const FeaturePyramid& decoded, std::span<const ContinuousCoord> coords) const;

    /// Applies the configured head to [N, feature_dim] point features.
    HeadOutput predict(const ad::Tensor& point_features) const;
    PointPrediction predict_point(std::span<const double> point_features) const;

    void save(const std::filesystem::path& checkpoint) const;
    /// Reads the model card next to the checkpoint, then the weights.
    static RefinementModel load(const std::filesystem::path& checkpoint);

private:
    struct Conv {
        ad::Tensor weight;
        ad::Tensor bias;
        int stride = 1;
        int padding = 1;
    };
    struct Dense {
        ad::Tensor weight;  // [in, out]
        ad::Tensor bias;    // [out]
    };

    Conv make_conv(const std::string& name, int in, int out, int kernel, int stride, std::mt19937_64& rng);
    Dense make_dense(const std::string& name, int in, int out, bool first_layer, std::mt19937_64& rng);
    std::vector<Dense> make_mlp(const std::string& name, int in, int out, std::mt19937_64& rng);
    FeaturePyramid encode(const std::vector<std::vector<Conv>>& encoder, const ad::Tensor& input, int in_channels) const;
    static ad::Tensor apply(const Conv& conv, const ad::Tensor& x);
    static ad::Tensor run_mlp(const std::vector<Dense>& mlp, ad::Tensor x);

    NetConfig config_;
    ad::ParameterSet params_;

    std::vector<std::vector<Conv>> enc_image_;
    std::vector<std::vector<Conv>> enc_disp_;
    std::vector<Conv> dec_proj_;
    std::vector<Conv> dec_block_;
    std::vector<Dense> mlp_class_;
    std::vector<Dense> mlp_offset_;
};

/// [C, H, W] tensor from an image in [0, 1]; converts RGB to luma when the
/// model expects one channel. Out-of-range values throw std::domain_error.
ad::Tensor image_input(const PixelGrid& image, int channels);

/// [2, H, W] tensor: min(d, max_disp) / max_disp and a validity mask; invalid
/// pixels are zero in both channels.
ad::Tensor disparity_input(const DisparityMap& disparity, int max_disp);

}  // namespace dispref
