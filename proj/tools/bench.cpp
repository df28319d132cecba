// Quick timing and matcher-quality probe on synthetic scenes.
#include <chrono>
#include <cmath>
#include <cstdio>

#include "CLI11.hpp"
#include "dispref/blackbox/pipeline.hpp"
#include "dispref/eval/metrics.hpp"
#include "dispref/net/model.hpp"
#include "dispref/net/refine.hpp"
#include "dispref/train/synth.hpp"
#include "dispref/train/trainer.hpp"

using namespace dispref;

int main(int argc, char** argv) {
    CLI::App app{"dispref benchmark"};
    int scenes = 20, steps = 20, size = 64;
    double d_max = 15;
    bool continuous = false;
    double lr = 1e-4;
    long val_every = 0;
    std::string head = "classify_offset";
    std::uint64_t seed = 1;
    app.add_option("--scenes", scenes);
    app.add_option("--steps", steps);
    app.add_option("--size", size);
    app.add_option("--scene-dmax", d_max);
    app.add_flag("--continuous", continuous, "non-integer constant layers");
    app.add_option("--lr", lr);
    app.add_option("--val-every", val_every);
    app.add_option("--head", head);
    app.add_option("--seed", seed);
    std::string ckpt;
    app.add_option("--ckpt", ckpt, "save the trained model here");
    CLI11_PARSE(app, argc, argv);

    SynthOptions opt;
    opt.integer_constant_layers = !continuous;
    for (const char* mode : {"sgm", "adcensus"}) {
        double sum_epe = 0, sum_b3 = 0, sum_b1 = 0;
        for (int i = 0; i < scenes; ++i) {
            const SynthScene s = synth_scene(1000 + i, size, size, d_max, opt);
            const auto cfg = mode[0] == 's' ? BlackboxConfig::sgm_census(24) : BlackboxConfig::ad_census(24);
            const DisparityMap raw = fill_invalid_background(run_blackbox(StereoPair(s.left, s.right), cfg));
            sum_epe += epe(raw, s.d_gt);
            sum_b3 += bad(raw, s.d_gt, 3.0);
            sum_b1 += bad(raw, s.d_gt, 1.0);
        }
        std::printf("%-9s EPE %.3f  bad1 %.2f  bad3 %.2f\n", mode, sum_epe / scenes, sum_b1 / scenes, sum_b3 / scenes);
    }

    NetConfig nc;
    nc.head = head_from_string(head);
    RefinementModel model(nc, seed);
    TrainConfig tc;
    tc.steps = steps;
    tc.crop = size;
    tc.scene_d_max = d_max;
    tc.lr = lr;
    tc.seed = seed;
    tc.val_every = val_every;
    tc.val_scenes = 8;
    double window = 0;
    auto report = [&](const TrainLogRow& r) {
        window += r.loss.total;
        if (r.val_epe) {
            std::printf("step %ld  loss %.4f  masked %.3f  val_epe %.4f\n", r.step + 1, window / val_every,
                        r.loss.masked_fraction, *r.val_epe);
            std::fflush(stdout);
            window = 0;
        }
    };
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = train_epochs(model, tc, report);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("train: %d steps, %.3f s/step, last loss %.4f\n", steps, sec / std::max(steps, 1),
                res.log.empty() ? 0.0 : res.log.back().loss.total);
    if (!ckpt.empty()) model.save(ckpt);

    // Held-out breakdown: raw vs refined, visible vs occluded pixels.
    double raw_epe = 0, ref_epe = 0, raw_b3 = 0, ref_b3 = 0, raw_occ = 0, ref_occ = 0, raw_vis = 0, ref_vis = 0;
    long n_occ = 0, n_vis = 0;
    for (int i = 0; i < scenes; ++i) {
        const SynthScene s = synth_scene(5000 + i, size, size, d_max, opt);
        const StereoPair pair(s.left, s.right);
        const DisparityMap raw0 = run_blackbox(pair, BlackboxConfig::sgm_census(24));
        const DisparityMap raw = fill_invalid_background(raw0);
        const DisparityMap ref = refine_grid(pair, raw0, model, size, size);
        raw_epe += epe(raw, s.d_gt) / scenes;
        ref_epe += epe(ref, s.d_gt) / scenes;
        raw_b3 += bad(raw, s.d_gt, 3.0) / scenes;
        ref_b3 += bad(ref, s.d_gt, 3.0) / scenes;
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double er = std::abs(raw.at(x, y) - s.d_gt.at(x, y)), ef = std::abs(ref.at(x, y) - s.d_gt.at(x, y));
                if (s.occluded.at(x, y) != 0.0) {
                    raw_occ += er;
                    ref_occ += ef;
                    ++n_occ;
                } else {
                    raw_vis += er;
                    ref_vis += ef;
                    ++n_vis;
                }
            }
    }
    std::printf("held-out: EPE %.3f -> %.3f  bad3 %.2f -> %.2f  visible EPE %.3f -> %.3f  occluded EPE %.3f -> %.3f (%.1f%% occluded)\n",
                raw_epe, ref_epe, raw_b3, ref_b3, raw_vis / n_vis, ref_vis / n_vis, raw_occ / std::max(n_occ, 1L),
                ref_occ / std::max(n_occ, 1L), 100.0 * n_occ / (n_occ + n_vis));
}
