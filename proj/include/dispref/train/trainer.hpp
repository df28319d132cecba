#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "dispref/core/grid.hpp"
#include "dispref/net/model.hpp"
#include "dispref/train/loss.hpp"

namespace dispref {

/// Raised when the training loss stops being finite.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RawSource { sgm, ad_census, corrupted_gt };
const char* to_string(RawSource source);

struct TrainConfig {
    long steps = 6000;
    int crop = 64;
    /// Largest disparity drawn by the scene generator (before scaling).
    double scene_d_max = 15.0;
    /// Search range handed to the matchers.
    int blackbox_d_max = 24;
    int coords_per_crop = 2048;
    double lr = 1e-4;
    /// The learning rate halves once this fraction of the steps is done.
    double lr_decay_at = 0.8;
    double sigma = kTargetSigma;
    double scale_min = 0.2;
    double scale_max = 3.0;
    /// Share of scenes whose right view is rendered at half resolution.
    double unbalanced_probability = 0.25;
    std::uint64_t seed = 1;
    /// Reuse the step-0 sample (scene, raw map and coordinates) for every step.
    bool fixed_sample = false;

    long val_every = 0;  // 0 disables validation
    int val_scenes = 4;
    std::filesystem::path log_csv;     // empty: no CSV
    std::filesystem::path checkpoint;  // empty: no checkpoints
    long checkpoint_every = 0;         // 0: only the final one

    void validate() const;
};

struct TrainSample {
    PixelGrid left;
    PixelGrid right;
    DisparityMap d_raw;  // scaled, left resolution
    DisparityMap d_gt;   // scaled
    std::vector<ContinuousCoord> coords;
    std::vector<double> gt_at_coords;  // from the scaled d_gt
    RawSource source = RawSource::sgm;
    double scale = 1.0;
    int kappa = 1;
};

/// Ground truth at a continuous coordinate: bilinear when the surrounding 2x2
/// pixels are valid and span at most 1 px, otherwise the nearest pixel.
/// Returns nullopt when that nearest pixel is invalid.
std::optional<double> sample_gt(const DisparityMap& gt, ContinuousCoord c);

/// Draws one training sample. Targets are sampled after the disparity
/// scaling augmentation is applied to both raw and GT.
TrainSample make_train_sample(const TrainConfig& config, int max_disp, std::uint64_t sample_seed);

/// Per-step seed derived from the run seed.
std::uint64_t step_seed(std::uint64_t seed, long step);

struct TrainLogRow {
    long step = 0;
    LossBreakdown loss;
    double lr = 0.0;
    std::optional<double> val_epe;
};

struct TrainResult {
    std::vector<TrainLogRow> log;
};

/// Held-out validation: mean EPE of the refined SGM output over scenes drawn
/// from a seed range disjoint from training.
double validation_epe(const RefinementModel& model, const TrainConfig& config);

/// Runs config.steps Adam steps on model in place.
TrainResult train_epochs(RefinementModel& model, const TrainConfig& config,
                         const std::function<void(const TrainLogRow&)>& on_step = {});

}  // namespace dispref
