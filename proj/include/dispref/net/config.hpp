#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace dispref {

enum class HeadKind {
    /// Softmax over integer bins plus a Tanh sub-pixel offset.
    classify_offset,
    /// Single linear output regressing disparity (L1 ablation baseline).
    l1_regression,
};

const char* to_string(HeadKind head);
HeadKind head_from_string(const std::string& text);

/// Offsets are kept to kOffsetBits fractional bits; with bins below 2^9 the
/// integer part fits in the rest of a double's mantissa.
inline constexpr int kOffsetBits = 44;
inline constexpr int kMaxBins = 512;

struct NetConfig {
    int levels = 4;
    std::vector<int> channels{16, 32, 64, 96};
    /// Largest representable disparity (px); classification uses max_disp + 1 bins.
    int max_disp = 32;
    std::vector<int> mlp_hidden{64, 64, 64};
    int image_channels = 1;
    HeadKind head = HeadKind::classify_offset;

    int d_bins() const { return max_disp + 1; }
    /// Length of the concatenated per-point decoder features.
    int feature_dim() const;

    /// Throws std::domain_error on inconsistent settings.
    void validate() const;

    static NetConfig desk_scale();
    /// VGG13-width encoders, 256 disparity levels and a PIFu-sized MLP.
    static NetConfig full_scale();

    /// Model card: one "key = value" line per field.
    std::string to_card() const;
    static NetConfig from_card(const std::string& text);

    bool operator==(const NetConfig&) const = default;
};

void write_model_card(const std::filesystem::path& path, const NetConfig& config);
NetConfig read_model_card(const std::filesystem::path& path);

/// "<checkpoint>.card"
std::filesystem::path model_card_path(const std::filesystem::path& checkpoint);

}  // namespace dispref
