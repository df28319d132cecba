#include "dispref/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dispref/autodiff/adam.hpp"
#include "dispref/autodiff/ops.hpp"
#include "dispref/blackbox/pipeline.hpp"
#include "dispref/core/image_io.hpp"
#include "dispref/core/sampling.hpp"
#include "dispref/eval/metrics.hpp"
#include "dispref/net/refine.hpp"
#include "dispref/train/corrupt.hpp"
#include "dispref/train/synth.hpp"

namespace dispref {
namespace {

constexpr std::uint64_t kValidationSeedBase = 0x5EED'0000'0000ULL;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void write_csv(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "step,total,ce,offset,masked_fraction,val_epe\n";
    out.precision(9);
    for (const auto& r : rows) {
        out << r.step << ',' << r.loss.total << ',' << r.loss.ce_term << ',' << r.loss.offset_term << ','
            << r.loss.masked_fraction << ',';
        if (r.val_epe) out << *r.val_epe;
        out << '\n';
    }
}

}  // namespace

const char* to_string(RawSource source) {
    switch (source) {
        case RawSource::sgm: return "sgm";
        case RawSource::ad_census: return "ad_census";
        case RawSource::corrupted_gt: return "corrupted_gt";
    }
    return "?";
}

void TrainConfig::validate() const {
    if (steps < 0) throw std::domain_error("train: steps must be >= 0");
    if (crop < 16 || crop % 2) throw std::domain_error("train: crop must be an even size >= 16");
    if (!(scene_d_max >= 1.0 && scene_d_max < crop / 4.0)) throw std::domain_error("train: need 1 <= scene_d_max < crop/4");
    if (blackbox_d_max < 1 || blackbox_d_max >= crop) throw std::domain_error("train: blackbox_d_max out of range");
    if (coords_per_crop < 1) throw std::domain_error("train: coords_per_crop must be positive");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::domain_error("train: lr must be finite and >= 0");
    if (!(lr_decay_at >= 0.0 && lr_decay_at <= 1.0)) throw std::domain_error("train: lr_decay_at must be in [0,1]");
    if (!(sigma > 0.0)) throw std::domain_error("train: sigma must be positive");
    if (!(scale_min > 0.0 && scale_max >= scale_min)) throw std::domain_error("train: bad scale range");
    if (!(unbalanced_probability >= 0.0 && unbalanced_probability <= 1.0))
        throw std::domain_error("train: unbalanced_probability must be in [0,1]");
    if (val_every < 0 || val_scenes < 1 || checkpoint_every < 0)
        throw std::domain_error("train: negative interval or empty validation set");
}

std::uint64_t step_seed(std::uint64_t seed, long step) {
    return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(step));
}

std::optional<double> sample_gt(const DisparityMap& gt, ContinuousCoord c) {
    const int w = gt.width(), h = gt.height();
    const int nx = std::clamp(static_cast<int>(std::ceil(c.x - 0.5)), 0, w - 1);
    const int ny = std::clamp(static_cast<int>(std::ceil(c.y - 0.5)), 0, h - 1);
    if (!gt.valid(nx, ny)) return std::nullopt;
    const int x0 = std::clamp(static_cast<int>(std::floor(c.x)), 0, w - 1), x1 = std::min(x0 + 1, w - 1);
    const int y0 = std::clamp(static_cast<int>(std::floor(c.y)), 0, h - 1), y1 = std::min(y0 + 1, h - 1);
    const double q[4] = {gt.at(x0, y0), gt.at(x1, y0), gt.at(x0, y1), gt.at(x1, y1)};
    double lo = q[0], hi = q[0];
    for (double v : q) {
        if (v < 0.0) return gt.at(nx, ny);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi - lo > 1.0) return gt.at(nx, ny);  // do not blend across a depth edge
    const double fx = c.x - x0, fy = c.y - y0;
    return (q[0] * (1 - fx) + q[1] * fx) * (1 - fy) + (q[2] * (1 - fx) + q[3] * fx) * fy;
}

TrainSample make_train_sample(const TrainConfig& config, int max_disp, std::uint64_t sample_seed) {
    std::mt19937_64 rng(sample_seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::uint64_t scene_seed = rng();
    TrainSample s;
    s.kappa = unit(rng) < config.unbalanced_probability ? 2 : 1;
    const SynthScene scene = synth_scene_unbalanced(scene_seed, config.crop, config.crop, config.scene_d_max, s.kappa);
    s.left = scene.left;
    s.right = scene.right;

    s.source = static_cast<RawSource>(std::uniform_int_distribution<int>(0, 2)(rng));
    const std::uint64_t corrupt_seed = rng();
    DisparityMap raw;
    switch (s.source) {
        case RawSource::sgm:
            raw = run_blackbox(StereoPair(s.left, s.right), BlackboxConfig::sgm_census(config.blackbox_d_max));
            break;
        case RawSource::ad_census:
            raw = run_blackbox(StereoPair(s.left, s.right), BlackboxConfig::ad_census(config.blackbox_d_max));
            break;
        case RawSource::corrupted_gt:
            raw = corrupt_gt(scene.d_gt, corrupt_seed);
            break;
    }

    // Joint scaling of raw and GT; targets are only drawn from the scaled GT below.
    const double gt_max = std::max(scene.d_gt.max_valid(), 1e-6);
    const double hi = std::min(config.scale_max, max_disp / gt_max);
    const double lo = std::min(config.scale_min, hi);
    s.scale = lo + (hi - lo) * unit(rng);
    s.d_raw = scale_disparity_values(raw, s.scale);
    s.d_gt = scale_disparity_values(scene.d_gt, s.scale);

    const double w1 = config.crop - 1, h1 = config.crop - 1;
    while (static_cast<int>(s.coords.size()) < config.coords_per_crop) {
        const ContinuousCoord c{unit(rng) * w1, unit(rng) * h1};
        const auto g = sample_gt(s.d_gt, c);
        if (!g) continue;
        s.coords.push_back(c);
        s.gt_at_coords.push_back(std::min(*g, static_cast<double>(max_disp)));
    }
    return s;
}

double validation_epe(const RefinementModel& model, const TrainConfig& config) {
    double total = 0.0;
    for (int i = 0; i < config.val_scenes; ++i) {
        const SynthScene scene = synth_scene(kValidationSeedBase + i, config.crop, config.crop, config.scene_d_max);
        const StereoPair pair(scene.left, scene.right);
        const DisparityMap raw = run_blackbox(pair, BlackboxConfig::sgm_census(config.blackbox_d_max));
        total += epe(refine_grid(pair, raw, model, config.crop, config.crop), scene.d_gt);
    }
    return total / config.val_scenes;
}

TrainResult train_epochs(RefinementModel& model, const TrainConfig& config,
                         const std::function<void(const TrainLogRow&)>& on_step) {
    config.validate();
    const NetConfig& net = model.config();
    ad::Adam adam;
    TrainResult result;
    const long decay_step = static_cast<long>(std::floor(config.lr_decay_at * config.steps));

    std::optional<TrainSample> fixed;
    for (long step = 0; step < config.steps; ++step) {
        if (config.fixed_sample && !fixed) fixed = make_train_sample(config, net.max_disp, step_seed(config.seed, 0));
        const TrainSample sample =
            fixed ? *fixed : make_train_sample(config, net.max_disp, step_seed(config.seed, step));

        const FeaturePyramid pyr =
            model.features(image_input(sample.left, net.image_channels), disparity_input(sample.d_raw, net.max_disp));
        const HeadOutput out = model.predict(model.sample_point_features(pyr, sample.coords));
        const RefinementLoss loss = net.head == HeadKind::classify_offset
                                        ? refinement_loss(out.logits, out.offset, sample.gt_at_coords, config.sigma)
                                        : l1_regression_loss(out.regression, sample.gt_at_coords, net.max_disp);
        if (!std::isfinite(loss.breakdown.total))
            throw DivergenceError("training diverged at step " + std::to_string(step) + " (loss " +
                                  std::to_string(loss.breakdown.total) + ")");

        model.params().zero_grad();
        ad::backward(loss.total);
        const double lr = step >= decay_step ? 0.5 * config.lr : config.lr;
        adam.step(model.params(), lr);

        TrainLogRow row{step, loss.breakdown, lr, std::nullopt};
        if (config.val_every > 0 && (step + 1) % config.val_every == 0) row.val_epe = validation_epe(model, config);
        result.log.push_back(row);
        if (on_step) on_step(row);

        if (!config.checkpoint.empty() && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0)
            model.save(config.checkpoint);
        if (!config.log_csv.empty() && row.val_epe) write_csv(config.log_csv, result.log);
    }
    if (!config.checkpoint.empty()) model.save(config.checkpoint);
    if (!config.log_csv.empty()) write_csv(config.log_csv, result.log);
    return result;
}

}  // namespace dispref
